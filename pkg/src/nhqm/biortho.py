"""Dense biorthonormal eigendecomposition of non-Hermitian matrices.

Left and right eigenvectors are obtained from two independent dense
eigensolves (of H and of its adjoint) and matched by eigenvalue
conjugation.  Degenerate clusters are biorthonormalized with a two-sided
modified Gram-Schmidt sweep.  The normalization convention is

* ``<L_nu|R_mu> = delta_{nu,mu}``,
* equal Euclidean norms ``|R_nu| = |L_nu|`` within each pair,
* the largest-magnitude entry of each right column is real positive.

The balanced-norm convention makes metric operators built from the left
columns reproduce the analytic closed forms of the solvable models.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotDiagonalizable

__all__ = [
    "SpectralClass",
    "BiorthoEigensystem",
    "as_complex_matrix",
    "biortho_decompose",
    "verify_completeness",
    "verify_spectral_representation",
    "classify_spectrum",
    "exceptional_proximity",
]

DEGENERACY_RTOL = 1e-8  # cluster threshold relative to the spectral scale


class SpectralClass(enum.Enum):
    ALL_REAL = "all_real"
    CONJUGATE_PAIRS = "conjugate_pairs"
    MIXED = "mixed"
    NOT_PSEUDO_HERMITIAN = "not_pseudo_hermitian"


def as_complex_matrix(H) -> np.ndarray:
    """Validate and return a square, finite, complex matrix."""
    H = np.ascontiguousarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix entries must be finite")
    return H


@dataclass(frozen=True)
class BiorthoEigensystem:
    """Eigenvalues with biorthonormal right/left eigenvector matrices.

    Attributes
    ----------
    eigenvalues : (n,) complex array, sorted by (Re, Im).
    right, left : (n, n) complex arrays; columns are |R_nu>, |L_nu> with
        <L_nu|R_mu> = delta.
    partners : (n,) int array; ``partners[nu]`` is the index of the
        complex-conjugate partner of eigenvalue ``nu`` and ``-1`` for a
        real eigenvalue.
    tol : classification tolerance used to tag real/paired eigenvalues.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    partners: np.ndarray
    tol: float
    _digest: str = field(default="", repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.eigenvalues))))

    def real_indices(self) -> np.ndarray:
        return np.where(self.partners < 0)[0]

    def pair_indices(self) -> list:
        """Return each conjugate pair once as (plus, minus) by Im E."""
        pairs = []
        seen = set()
        for nu, mate in enumerate(self.partners):
            if mate < 0 or nu in seen:
                continue
            seen.update((nu, int(mate)))
            p, m = (nu, int(mate))
            if self.eigenvalues[p].imag < self.eigenvalues[m].imag:
                p, m = m, p
            pairs.append((p, m))
        return pairs

    def digest(self) -> str:
        return self._digest

    def propagator_matrix(self, t: float, adjoint: bool = False) -> np.ndarray:
        """exp(-iHt) (or exp(-iH^dag t)) from the spectral representation."""
        if adjoint:
            phases = np.exp(-1j * np.conj(self.eigenvalues) * t)
            return (self.left * phases) @ self.right.conj().T
        phases = np.exp(-1j * self.eigenvalues * t)
        return (self.right * phases) @ self.left.conj().T


def _sorted_eig(M: np.ndarray, key_values=None):
    values, vectors = np.linalg.eig(M)
    keys = values if key_values is None else key_values(values)
    # quantize the primary key so eigensolver noise cannot flip the
    # relative order of conjugate-pair members between two decompositions
    scale = max(1.0, float(np.max(np.abs(keys))))
    quantum = 1e-9 * scale
    order = np.lexsort((keys.imag, np.round(keys.real / quantum)))
    return values[order], vectors[:, order]


def _match_left_to_right(E, El, L, scale):
    """Reorder left columns so conj(El) tracks E positionwise.

    After the noise-quantized sorts the sequences agree except possibly
    on a few tie positions; those are repaired by greedy nearest-
    conjugate matching.
    """
    target = np.conj(El)
    bad = np.where(np.abs(E - target) > 1e-6 * scale)[0]
    if len(bad) == 0:
        return El, L
    perm = np.arange(len(E))
    remaining = list(bad)
    for i in bad:
        j = min(remaining, key=lambda j: abs(E[i] - target[j]))
        perm[i] = j
        remaining.remove(j)
    return El[perm], L[:, perm]


def _clusters(values: np.ndarray, dtol: float):
    edges = [0]
    for i in range(1, len(values)):
        if abs(values[i] - values[i - 1]) > dtol:
            edges.append(i)
    edges.append(len(values))
    return list(zip(edges[:-1], edges[1:]))


def biortho_decompose(H, tol: float = 1e-9) -> BiorthoEigensystem:
    """Decompose H into a verified biorthonormal eigensystem.

    Parameters
    ----------
    H : (n, n) array_like
        Diagonalizable complex matrix.
    tol : float
        Tolerance used both for the diagonalizability guard (minimum
        left-right overlap of unit-normalized eigenvectors) and for the
        real/paired classification of eigenvalues.

    Raises
    ------
    NotDiagonalizable
        If an eigenvector cluster is too close to an exceptional point
        for the biorthonormalization to be trustworthy.
    """
    H = as_complex_matrix(H)
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = H.shape[0]

    E, R = _sorted_eig(H)
    El, L = _sorted_eig(H.conj().T, key_values=np.conj)
    scale = max(1.0, float(np.max(np.abs(E))))
    El, L = _match_left_to_right(E, El, L, scale)

    if np.max(np.abs(E - np.conj(El))) > 1e-6 * scale:
        raise NotDiagonalizable(
            "left/right spectra do not match under conjugation; "
            "input is too ill-conditioned to pair eigenvectors"
        )

    dtol = DEGENERACY_RTOL * scale
    for a, b in _clusters(E, dtol):
        # Two-sided modified Gram-Schmidt inside the (near-)degenerate block.
        for p in range(a, b):
            for q in range(a, p):
                R[:, p] -= R[:, q] * (L[:, q].conj() @ R[:, p])
                L[:, p] -= L[:, q] * (R[:, q].conj() @ L[:, p])
            nr = np.linalg.norm(R[:, p])
            nl = np.linalg.norm(L[:, p])
            if nr == 0.0 or nl == 0.0:
                raise NotDiagonalizable("eigenvector cluster collapsed")
            overlap = (L[:, p].conj() @ R[:, p]) / (nl * nr)
            if abs(overlap) < tol:
                raise NotDiagonalizable(
                    f"eigenvector pair {p} has left-right overlap "
                    f"{abs(overlap):.3e} < tol={tol:.3e} (exceptional point)"
                )
            R[:, p] /= nr
            L[:, p] /= np.conj(L[:, p].conj() @ R[:, p])
            # balance Euclidean norms while keeping <L|R> = 1
            beta = np.sqrt(np.linalg.norm(L[:, p]))
            R[:, p] *= beta
            L[:, p] /= beta

    # per-column phase: largest-|.| entry of R real positive; L follows
    for nu in range(n):
        i0 = int(np.argmax(np.abs(R[:, nu])))
        ph = R[i0, nu] / abs(R[i0, nu])
        R[:, nu] /= ph
        L[:, nu] /= ph

    # polish: eigensolver crosstalk between close (but unclustered)
    # levels leaves <L|R> off the identity at ~eps/gap; one solve with
    # the (nearly unit) Gram matrix restores exact duality
    gram = L.conj().T @ R
    gram_res = np.linalg.norm(gram - np.eye(n))
    if gram_res > 1e-2:
        raise NotDiagonalizable(
            f"biorthonormalization failed (gram residual {gram_res:.2e})")
    if gram_res > 1e-14:
        L = L @ np.linalg.inv(gram).conj().T

    # ordering tie-break inside exactly degenerate clusters: larger
    # first-component magnitude first (keeps output reproducible)
    for a, b in _clusters(E, dtol):
        if b - a > 1:
            order = a + np.argsort(-np.abs(R[0, a:b]), kind="stable")
            R[:, a:b] = R[:, order]
            L[:, a:b] = L[:, order]
            E[a:b] = E[order]

    partners = _pair_partners(E, tol * scale)
    digest = hashlib.sha256(
        E.tobytes() + R.tobytes() + L.tobytes()
    ).hexdigest()[:16]
    return BiorthoEigensystem(
        eigenvalues=E, right=R, left=L, partners=partners, tol=tol,
        _digest=digest,
    )


def _pair_partners(E: np.ndarray, atol: float) -> np.ndarray:
    """Tag complex eigenvalues with their conjugate partner (-1 if real)."""
    n = len(E)
    partners = np.full(n, -1, dtype=int)
    complex_idx = [i for i in range(n) if abs(E[i].imag) >= atol]
    unmatched = set(complex_idx)
    for i in complex_idx:
        if i not in unmatched:
            continue
        best, best_d = -1, np.inf
        for j in unmatched:
            if j == i:
                continue
            d = abs(E[i] - np.conj(E[j]))
            if d < best_d:
                best, best_d = j, d
        if best >= 0 and best_d < atol * 10 + 1e-300:
            partners[i], partners[best] = best, i
            unmatched.discard(i)
            unmatched.discard(best)
        # unmatched complex eigenvalues keep partner -1 but are not real;
        # classify_spectrum detects them via the imaginary part
    return partners


def verify_completeness(es: BiorthoEigensystem) -> float:
    """Frobenius residual of sum_nu |R_nu><L_nu| against the identity."""
    n = es.dim
    return float(np.linalg.norm(es.right @ es.left.conj().T - np.eye(n)))


def verify_spectral_representation(es: BiorthoEigensystem, H) -> float:
    """Relative Frobenius residual of R diag(E) L^dag against H."""
    H = as_complex_matrix(H)
    rebuilt = (es.right * es.eigenvalues) @ es.left.conj().T
    return float(np.linalg.norm(rebuilt - H) / max(np.linalg.norm(H), 1e-300))


def classify_spectrum(es: BiorthoEigensystem, tol: float = 1e-9) -> SpectralClass:
    """Classify the spectrum as real, paired, mixed, or unpaired."""
    atol = tol * es.scale
    E = es.eigenvalues
    is_complex = np.abs(E.imag) >= atol
    if not np.any(is_complex):
        return SpectralClass.ALL_REAL
    for nu in np.where(is_complex)[0]:
        mate = es.partners[nu]
        if mate < 0 or abs(E[nu] - np.conj(E[mate])) > 10 * atol:
            return SpectralClass.NOT_PSEUDO_HERMITIAN
    if np.all(is_complex):
        return SpectralClass.CONJUGATE_PAIRS
    return SpectralClass.MIXED


def exceptional_proximity(H) -> float:
    """Distance-from-exceptional-point diagnostic in [0, 1].

    Unit-normalized left and right eigenvectors are paired by eigenvalue
    conjugation; the result is the smallest left-right overlap, computed
    as the minimal singular value of the cluster overlap matrix so that
    exactly degenerate subspaces are assessed basis-independently.  The
    value is 1 for a Hermitian matrix and tends to 0 at an exceptional
    point.
    """
    H = as_complex_matrix(H)
    E, R = _sorted_eig(H)
    El, L = _sorted_eig(H.conj().T, key_values=np.conj)
    R = R / np.linalg.norm(R, axis=0)
    L = L / np.linalg.norm(L, axis=0)
    scale = max(1.0, float(np.max(np.abs(E))))
    worst = 1.0
    for a, b in _clusters(E, DEGENERACY_RTOL * scale):
        overlap = L[:, a:b].conj().T @ R[:, a:b]
        smin = np.linalg.svd(overlap, compute_uv=False)[-1]
        worst = min(worst, float(smin))
    return worst
