"""Hermitian system-ancilla embedding of a non-Hermitian Hamiltonian.

A system with real-spectrum non-Hermitian Hamiltonian H is embedded
into a doubled Hermitian Hamiltonian acting on (spin-1/2) x (system);
unitary evolution followed by post-selection on the ancilla spin-up
outcome reproduces the normalized non-unitary dynamics of H.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .biortho import BiorthoEigensystem, as_complex_matrix, biortho_decompose
from .dynamics import Propagator, PureState, evolve_state
from .errors import GSquareNotPSD, ZeroProjection
from .metric import MetricOperator, build_eta_r

__all__ = [
    "AncillaEmbedding",
    "build_embedding",
    "embed_state",
    "postselect_up",
    "verify_equivalence",
    "broken_phase_M",
]

_SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])


@dataclass(frozen=True)
class AncillaEmbedding:
    """Doubled Hermitian Hamiltonian and the operators that build it.

    ``h_sa = 1_2 (x) a_block + sigma_y (x) b_block`` acts on the ordered
    basis (up (x) system, down (x) system); its spectrum is the system
    spectrum, doubly degenerate.
    """

    h_s: np.ndarray
    eigensystem: BiorthoEigensystem
    eta_r: MetricOperator
    c: float
    g: np.ndarray
    a_block: np.ndarray
    b_block: np.ndarray
    h_sa: np.ndarray

    @property
    def dim(self) -> int:
        return self.h_s.shape[0]


def build_embedding(H_s) -> AncillaEmbedding:
    """Construct the Hermitian embedding of a real-spectrum Hamiltonian.

    The constant c is the sum of inverse metric eigenvalues, the
    Hermitian coupling operator g solves g^2 = c eta_r - 1, and the
    blocks follow from requiring that states of the form
    (psi, g psi) stay of that form under the doubled evolution.
    """
    H_s = as_complex_matrix(H_s)
    es = biortho_decompose(H_s)
    eta = build_eta_r(es)  # raises SpectrumNotReal in the broken phase

    lam = np.linalg.eigvalsh(eta.matrix)
    c = float(np.sum(1.0 / lam))
    g_sq = c * eta.matrix - np.eye(es.dim)
    w, V = np.linalg.eigh(g_sq)
    if w.min() < -1e-10 * max(1.0, np.linalg.norm(g_sq)):
        raise GSquareNotPSD(
            f"c*eta - 1 has negative eigenvalue {w.min():.3e}")
    g = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T
    g = (g + g.conj().T) / 2.0

    one_plus_g2 = np.eye(es.dim) + g @ g
    a_block = np.linalg.solve(one_plus_g2.conj().T,
                              (H_s + g @ H_s @ g).conj().T).conj().T
    b_block = np.linalg.solve(one_plus_g2.conj().T,
                              (1j * (H_s @ g - g @ H_s)).conj().T).conj().T
    a_block = (a_block + a_block.conj().T) / 2.0
    b_block = (b_block + b_block.conj().T) / 2.0
    h_sa = np.kron(np.eye(2), a_block) + np.kron(_SIGMA_Y, b_block)
    return AncillaEmbedding(H_s, es, eta, c, g, a_block, b_block, h_sa)


def embed_state(emb: AncillaEmbedding, psi_s: PureState) -> PureState:
    """Normalized doubled state K [ up (x) psi + down (x) g psi ]."""
    v = psi_s.amplitudes
    K = (emb.c * np.vdot(v, emb.eta_r.matrix @ v).real) ** -0.5
    amp = np.concatenate([v, emb.g @ v]) * K
    return PureState(amp, basis="ancilla+" + psi_s.basis)


def postselect_up(psi_sa: PureState) -> PureState:
    """Keep the ancilla-up block and renormalize to unit norm."""
    amp = psi_sa.amplitudes
    if amp.shape[0] % 2 != 0:
        raise ValueError("doubled state must have even dimension")
    n = amp.shape[0] // 2
    up = amp[:n]
    nrm = np.linalg.norm(up)
    if nrm < 1e-300:
        raise ZeroProjection("ancilla-up block has zero weight")
    return PureState(up / nrm)


def verify_equivalence(emb: AncillaEmbedding, psi0: PureState, t_grid) -> float:
    """Max distance between post-selected and direct normalized evolution.

    Both states are normalized and phase-aligned (the relative phase is
    fixed by maximizing the overlap) before differencing.
    """
    es_sa = biortho_decompose(emb.h_sa)
    prop_sa = Propagator(es_sa)
    prop_s = Propagator(emb.eigensystem)
    start = embed_state(emb, psi0)
    worst = 0.0
    for t in t_grid:
        big = evolve_state(prop_sa, start, float(t))
        up = postselect_up(big).amplitudes
        direct = evolve_state(prop_s, psi0, float(t)).amplitudes
        direct = direct / np.linalg.norm(direct)
        overlap = np.vdot(up, direct)
        if abs(overlap) > 0:
            up = up * (overlap / abs(overlap))
        worst = max(worst, float(np.linalg.norm(up - direct)))
    return worst


def broken_phase_M(H_s, m: float, t: float):
    """Broken-phase norm operator M(t) = m exp(i (H - H^dag) t).

    Returns (M(t), smallest eigenvalue of M(t) - 1).  The embedding
    exists on [0, tau] only while that eigenvalue stays positive, which
    bounds the usable m from below by the anti-Hermitian growth rate.
    """
    H_s = as_complex_matrix(H_s)
    anti = H_s - H_s.conj().T
    M = m * sla.expm(1j * anti * t)
    M = (M + M.conj().T) / 2.0
    w = np.linalg.eigvalsh(M - np.eye(H_s.shape[0]))
    return M, float(w.min())
