"""Builders and closed-form references for the three lattice models.

* a two-site gain/loss model with complex onsite energy r e^{+-i theta}
  and Peierls-phased hopping s e^{+-i phi},
* a resonant level coupled to two tight-binding leads through a complex
  hybridization gamma (left) and gamma* (right),
* a periodic chain with staggered onsite energy and staggered imaginary
  hopping that turns quantum critical as the two amplitudes meet.

All builders return plain complex matrices; closed forms are provided
where the models are analytically solvable and are used as oracles in
the test-suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ExceptionalPoint, RootCountMismatch

__all__ = [
    "TwoLevelParams",
    "RLMParams",
    "ChainParams",
    "TwoLevelClosedForms",
    "BoundStatePrediction",
    "two_level_hamiltonian",
    "two_level_closed_forms",
    "two_level_norm_closed",
    "two_level_occupancy_closed",
    "two_level_parity",
    "rlm_hamiltonian",
    "rlm_dot_index",
    "rlm_parity",
    "rlm_bound_state_predictions",
    "rlm_scattering_momenta",
    "chain_hamiltonian",
    "chain_parity",
    "chain_dispersion",
    "chain_block",
]


# -- parameter records --------------------------------------------------------

@dataclass(frozen=True)
class TwoLevelParams:
    r: float = 0.6
    s: float = 1.0
    theta: float = np.pi / 2
    phi: float = 0.0

    def __post_init__(self):
        if self.s == 0:
            raise ValueError("s must be nonzero (it sets the energy unit)")
        if self.r < 0:
            raise ValueError("r must be nonnegative")

    @property
    def z(self) -> float:
        return self.r / self.s * np.sin(self.theta)


@dataclass(frozen=True)
class RLMParams:
    N: int = 2018          # total lead sites; the dot adds one more
    J: float = 1.0
    gamma: complex = 0.2

    def __post_init__(self):
        if self.N <= 0 or self.N % 2:
            raise ValueError("N must be even and positive")
        if self.J <= 0:
            raise ValueError("J must be positive")

    @property
    def dim(self) -> int:
        return self.N + 1

    @property
    def gamma_tilde(self) -> float:
        g = complex(self.gamma)
        return float(((g * g + np.conj(g) ** 2) / 2).real)


@dataclass(frozen=True)
class ChainParams:
    N: int = 100
    J: float = 1.0
    g_onsite: float = 0.2
    delta: float = 0.1
    delta_s: float | None = None   # when set, delta is derived as g - delta_s

    def __post_init__(self):
        if self.N <= 0 or self.N % 2:
            raise ValueError("N must be even and positive")
        if self.J <= 0:
            raise ValueError("J must be positive")
        if self.delta_s is not None:
            object.__setattr__(self, "delta", self.g_onsite - self.delta_s)
        if self.delta < 0 or self.g_onsite < 0:
            raise ValueError("g and delta must be nonnegative")


# -- two-level model ----------------------------------------------------------

def two_level_hamiltonian(p: TwoLevelParams) -> np.ndarray:
    """2x2 gain/loss Hamiltonian in the (up, down) site basis."""
    return np.array([
        [p.r * np.exp(1j * p.theta), p.s * np.exp(1j * p.phi)],
        [p.s * np.exp(-1j * p.phi), p.r * np.exp(-1j * p.theta)],
    ])


def two_level_parity() -> np.ndarray:
    """Site exchange operator (sigma_x)."""
    return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class TwoLevelClosedForms:
    """Analytic eigensystem and metric data; fields are None when the
    respective phase does not apply."""

    E_plus: complex
    E_minus: complex
    right: np.ndarray          # columns (R_+, R_-)
    left: np.ndarray           # columns (L_+, L_-)
    eta_r: np.ndarray | None = None
    eta_r_sqrt: np.ndarray | None = None
    h: np.ndarray | None = None
    eta_cp: np.ndarray | None = None


def two_level_closed_forms(p: TwoLevelParams) -> TwoLevelClosedForms:
    """Evaluate the analytic eigenvalue/eigenvector/metric formulas.

    Unbroken (|z| < 1): fills eta_r, its positive square root, and the
    isospectral Hermitian matrix h.  Broken (|z| > 1): fills the
    indefinite pair metric eta_cp = sgn(z) sigma_x dressed with the
    hopping phase.  Exactly at |z| = 1 the formulas are singular.
    """
    z = p.z
    if abs(abs(z) - 1.0) < 1e-12:
        raise ExceptionalPoint("|z| = 1 is the exceptional point")
    eph = np.exp(1j * p.phi)
    offset = p.r * np.cos(p.theta)

    if abs(z) < 1:
        rt = np.sqrt(1 - z * z)
        E_plus = offset + p.s * rt
        E_minus = offset - p.s * rt
        wp, wm = 1j * z + rt, 1j * z - rt
        right = np.empty((2, 2), dtype=complex)
        left = np.empty((2, 2), dtype=complex)
        for col, w in enumerate((wp, wm)):
            nr = np.sqrt(1 + w * w + 0j)
            right[:, col] = np.array([eph * w, 1.0]) / nr
            wl = np.conj(w)  # -iz +- sqrt(1-z^2) for real z
            nl = np.sqrt(1 + wl * wl + 0j)
            left[:, col] = np.array([eph * wl, 1.0]) / nl
        eta_r = (1 / rt) * np.array([[1.0, -1j * z * eph],
                                     [1j * z * np.conj(eph), 1.0]])
        ap = np.sqrt(0.5 + 0.5 * rt)
        am = np.sign(z) * np.sqrt(0.5 - 0.5 * rt)
        eta_r_sqrt = (1 - z * z) ** -0.25 * np.array(
            [[ap, -1j * am * eph], [1j * am * np.conj(eph), ap]])
        h = np.array([[offset, p.s * rt * eph],
                      [p.s * rt * np.conj(eph), offset]])
        return TwoLevelClosedForms(E_plus, E_minus, right, left,
                                   eta_r=eta_r, eta_r_sqrt=eta_r_sqrt, h=h)

    rt = np.sqrt(z * z - 1)
    E_plus = offset + 1j * p.s * rt
    E_minus = offset - 1j * p.s * rt
    wp, wm = z + rt, z - rt
    right = np.empty((2, 2), dtype=complex)
    left = np.empty((2, 2), dtype=complex)
    for col, w in enumerate((wp, wm)):
        nr = np.sqrt(1 - w * w + 0j)
        right[:, col] = np.array([1j * eph * w, 1.0]) / nr
        left[:, col] = np.array([-1j * eph * w, 1.0]) / np.conj(nr)
    eta_cp = np.sign(z) * np.array([[0.0, eph], [np.conj(eph), 0.0]])
    return TwoLevelClosedForms(E_plus, E_minus, right, left, eta_cp=eta_cp)


def two_level_norm_closed(p: TwoLevelParams, t: float) -> float:
    """Norm <psi(t)|psi(t)> for the initial state localized on the up site.

    In the unbroken phase the norm oscillates with the level splitting;
    in the broken phase it grows with the gain rate.
    """
    z = p.z
    if abs(abs(z) - 1.0) < 1e-12:
        raise ExceptionalPoint("|z| = 1 is the exceptional point")
    if abs(z) < 1:
        rt = np.sqrt(1 - z * z)
        w = 2 * p.s * rt * t
        return float((1 - z * z * np.cos(w) + z * rt * np.sin(w)) / (1 - z * z))
    rt = np.sqrt(z * z - 1)
    gz = 2 * rt * p.s
    ep, em = np.exp(gz * t), np.exp(-gz * t)
    return float((ep * (z * z + z * rt) + em * (z * z - z * rt) - 2)
                 / (2 * (z * z - 1)))


def two_level_occupancy_closed(p: TwoLevelParams, t: float) -> float:
    """Up-site occupancy (Hermitian convention) from the up-site start."""
    z = p.z
    if abs(abs(z) - 1.0) < 1e-12:
        raise ExceptionalPoint("|z| = 1 is the exceptional point")
    if abs(z) < 1:
        rt = np.sqrt(1 - z * z)
        w = 2 * p.s * rt * t
        num = 0.5 * (1 + np.cos(w)) - z * z * np.cos(w) + z * rt * np.sin(w)
        den = 1 - z * z * np.cos(w) + z * rt * np.sin(w)
        return float(num / den)
    rt = np.sqrt(z * z - 1)
    gz = 2 * rt  # in units of s*t
    ep, em = np.exp(gz * p.s * t), np.exp(-gz * p.s * t)
    num = ep * (z * z + z * rt - 0.5) + em * (z * z - z * rt - 0.5) - 1.0
    den = ep * (z * z + z * rt) + em * (z * z - z * rt) - 2.0
    return float(num / den)


# -- resonant level model -----------------------------------------------------

def rlm_dot_index(p: RLMParams) -> int:
    """Row index of the dot site (sites j = -N/2..N/2 stored in order)."""
    return p.N // 2


def rlm_hamiltonian(p: RLMParams) -> np.ndarray:
    """Two leads of N/2 sites with hopping -J, dot coupled by -gamma
    on the left bond and -gamma* on the right bond (open ends).

    Both matrix elements of a bond carry the same amplitude, so a
    complex gamma makes the matrix complex symmetric rather than
    Hermitian.
    """
    n = p.dim
    half = p.N // 2
    gamma = complex(p.gamma)
    H = np.zeros((n, n), dtype=complex)

    def bond(i, j, amp):
        H[i, j] += amp
        H[j, i] += amp

    for j in range(-half, -1):
        bond(j + half, j + 1 + half, -p.J)
    bond(-1 + half, half, -gamma)
    bond(half, 1 + half, -np.conj(gamma))
    for j in range(1, half):
        bond(j + half, j + 1 + half, -p.J)
    return H


def rlm_parity(p: RLMParams) -> np.ndarray:
    """Reflection through the dot site, j -> -j."""
    n = p.dim
    P = np.zeros((n, n))
    for i in range(n):
        P[i, n - 1 - i] = 1.0
    return P


@dataclass(frozen=True)
class BoundStatePrediction:
    regime: str                    # "none", "real_pair", "imaginary_pair"
    energies: tuple
    xi: float | None


def rlm_bound_state_predictions(p: RLMParams) -> BoundStatePrediction:
    """Thermodynamic-limit bound-state energies and localization length.

    A pair of real energies beyond the band edges appears for
    Re(gamma^2) > J^2; a purely imaginary conjugate pair appears for
    gamma_i > gamma_r.  Otherwise only extended states exist.
    """
    gt2 = 2.0 * p.gamma_tilde          # gamma^2 + conj(gamma)^2
    J2 = p.J * p.J
    if gt2 > J2:
        e = gt2 / np.sqrt(gt2 - J2)
        xi = 2.0 / np.log(abs((gt2 - J2) / J2))
        return BoundStatePrediction("real_pair", (-e, +e), float(xi))
    if gt2 < 0:
        e = abs(gt2) / np.sqrt(J2 - gt2)
        xi = 2.0 / np.log(abs((gt2 - J2) / J2))
        return BoundStatePrediction("imaginary_pair", (-1j * e, +1j * e), float(xi))
    return BoundStatePrediction("none", (), None)


def _quantization_mismatch(k: float, Gamma: float, J: float, N: int) -> float:
    """Real form of the standing-wave quantization condition.

    The condition exp(ikN) = (Gamma - J^2 e^{-2ik}) / (Gamma - J^2 e^{2ik})
    is equivalent to Im[e^{ikN/2} (Gamma - J^2 e^{2ik})] = 0 wherever the
    denominator does not vanish.
    """
    return Gamma * np.sin(k * N / 2) - J * J * np.sin(k * (N / 2 + 2))


def rlm_scattering_momenta(p: RLMParams, lam: int):
    """All scattering momenta k in (0, pi) of the lam = +-1 branch.

    The odd branch decouples from the dot and reduces to the open-chain
    quantization k = 2 pi m / (N + 2); the even branch is solved by
    bracketed bisection of the real phase equation on a 10 N grid,
    refined to 1e-12.  Roots where the defining quotient degenerates
    (vanishing denominator) are discarded.
    """
    if lam not in (-1, +1):
        raise ValueError("lam must be +1 or -1")
    J2 = p.J * p.J
    if lam == -1:
        # Gamma_- = -J^2 for every gamma: exact odd-chain momenta
        return np.array([2 * np.pi * m / (p.N + 2) for m in range(1, p.N // 2 + 1)])

    Gamma = 2.0 * p.gamma_tilde - J2
    grid = np.linspace(0.0, np.pi, 10 * p.N + 1)[1:-1]
    vals = _quantization_mismatch(grid, Gamma, p.J, p.N)
    roots = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(grid[i])
        elif a * b < 0:
            roots.append(brentq(_quantization_mismatch, grid[i], grid[i + 1],
                                args=(Gamma, p.J, p.N), xtol=1e-13, rtol=1e-15))
    keep = []
    for k in roots:
        w = Gamma - J2 * np.exp(2j * k)
        if abs(w) > 1e-8 * (abs(Gamma) + J2):
            keep.append(k)
    keep = np.array(sorted(keep))

    expected = p.N // 2 + 1
    if rlm_bound_state_predictions(p).regime != "none":
        expected -= 2
    if len(keep) != expected:
        raise RootCountMismatch(
            f"found {len(keep)} even-branch momenta, expected {expected}")
    return keep


# -- staggered chain ----------------------------------------------------------

def chain_hamiltonian(p: ChainParams) -> np.ndarray:
    """Periodic chain with staggered onsite g and staggered imaginary
    hopping; the uniform hopping amplitude is +J/2.

    Site j (1-based) carries onsite energy g (-1)^j and couples to site
    j+1 with (J + i delta (-1)^j)/2 on both matrix elements of the bond.
    """
    N = p.N
    H = np.zeros((N, N), dtype=complex)
    for j in range(1, N + 1):
        sgn = (-1) ** j
        H[j - 1, j - 1] = p.g_onsite * sgn
        amp = (p.J + 1j * p.delta * sgn) / 2.0
        nxt = j % N
        H[j - 1, nxt] += amp
        H[nxt, j - 1] += amp
    return H


def chain_parity(p: ChainParams) -> np.ndarray:
    """Ring reflection j -> 1 - j (mod N), which exchanges the two
    sublattices so that conjugation restores the staggered hopping."""
    N = p.N
    P = np.zeros((N, N))
    for j in range(1, N + 1):
        target = (1 - j) % N + 1
        P[target - 1, j - 1] = 1.0
    return P


def chain_block(p: ChainParams, k: float) -> np.ndarray:
    """2x2 momentum block coupling k and k - pi."""
    a = p.J * np.cos(k)
    return np.array([[a, p.g_onsite + p.delta * np.sin(k)],
                     [p.g_onsite - p.delta * np.sin(k), -a]], dtype=complex)


def chain_dispersion(p: ChainParams, k: float):
    """Band energies +-sqrt((J^2 + delta^2) cos^2 k + g^2 - delta^2)."""
    val = ((p.J ** 2 + p.delta ** 2) * np.cos(k) ** 2
           + p.g_onsite ** 2 - p.delta ** 2)
    root = np.sqrt(val + 0j)
    return -root, +root
