"""Metric operators for pseudo-Hermitian Hamiltonians.

Builds the positive-definite metric from left eigenvectors of a
real-spectrum Hamiltonian, the indefinite complex-pair variant for
broken-symmetry spectra, Hermitian square roots, and the isospectral
Hermitian equivalent of the Hamiltonian.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .biortho import (
    BiorthoEigensystem,
    SpectralClass,
    as_complex_matrix,
    classify_spectrum,
)
from .errors import (
    NotPositiveDefinite,
    SingularMetric,
    SpectrumNotReal,
    UnpairedComplexEigenvalue,
)

__all__ = [
    "MetricKind",
    "MetricOperator",
    "build_eta_r",
    "eta_r_inverse",
    "build_eta_cp",
    "is_pseudo_hermitian",
    "eta_sqrt",
    "eta_inverse_sqrt",
    "hermitian_equivalent",
    "pt_observable_check",
    "pt_observable_from_hermitian",
]

PD_FLOOR = 1e-12  # relative eigenvalue floor deciding positive definiteness


class MetricKind(enum.Enum):
    ETA_R = "eta_r"
    ETA_CP = "eta_cp"
    GENERIC = "generic"


@dataclass(frozen=True)
class MetricOperator:
    """A Hermitian metric candidate tied to the eigensystem that built it."""

    matrix: np.ndarray
    kind: MetricKind
    positive_definite: bool
    source_hash: str = ""

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_residual(self) -> float:
        m = self.matrix
        return float(np.linalg.norm(m - m.conj().T) / max(np.linalg.norm(m), 1e-300))


def _is_positive_definite(matrix: np.ndarray) -> bool:
    w = np.linalg.eigvalsh(matrix)
    return bool(w.min() > PD_FLOOR * max(np.linalg.norm(matrix), 1e-300))


def generic_metric(matrix, source_hash: str = "") -> MetricOperator:
    """Wrap a user-supplied Hermitian matrix as a metric candidate."""
    matrix = as_complex_matrix(matrix)
    matrix = (matrix + matrix.conj().T) / 2.0
    return MetricOperator(matrix, MetricKind.GENERIC,
                          _is_positive_definite(matrix), source_hash)


def build_eta_r(es: BiorthoEigensystem) -> MetricOperator:
    """Positive metric sum_nu |L_nu><L_nu| for a real-spectrum eigensystem.

    Raises SpectrumNotReal when complex eigenvalues are present; use
    :func:`build_eta_cp` in that regime.
    """
    if classify_spectrum(es, es.tol) is not SpectralClass.ALL_REAL:
        raise SpectrumNotReal("eta_r requires an entirely real spectrum")
    eta = es.left @ es.left.conj().T
    eta = (eta + eta.conj().T) / 2.0
    return MetricOperator(eta, MetricKind.ETA_R, True, es.digest())


def eta_r_inverse(es: BiorthoEigensystem) -> np.ndarray:
    """Analytic inverse sum_nu |R_nu><R_nu| of the eta_r metric."""
    inv = es.right @ es.right.conj().T
    return (inv + inv.conj().T) / 2.0


def build_eta_cp(es: BiorthoEigensystem) -> MetricOperator:
    """Indefinite metric for spectra with complex-conjugate pairs.

    Real-eigenvalue terms enter as |L><L|; each conjugate pair (the
    member with Im E > 0 is taken as unstarred) contributes the cross
    terms |L_+><L_-| + |L_-><L_+| in the decomposition's gauge.  The
    result is Hermitian and intertwines H with its adjoint, but it is
    not positive definite once at least one pair exists.
    """
    cls = classify_spectrum(es, es.tol)
    if cls is SpectralClass.ALL_REAL:
        raise SpectrumNotReal("eta_cp expects at least one complex pair; "
                              "use build_eta_r for real spectra")
    if cls is SpectralClass.NOT_PSEUDO_HERMITIAN:
        raise UnpairedComplexEigenvalue(
            "spectrum has an unpaired complex eigenvalue")
    L = es.left
    eta = np.zeros((es.dim, es.dim), dtype=complex)
    for nu in es.real_indices():
        eta += np.outer(L[:, nu], L[:, nu].conj())
    for p, m in es.pair_indices():
        eta += np.outer(L[:, p], L[:, m].conj())
        eta += np.outer(L[:, m], L[:, p].conj())
    eta = (eta + eta.conj().T) / 2.0
    return MetricOperator(eta, MetricKind.ETA_CP,
                          _is_positive_definite(eta), es.digest())


def is_pseudo_hermitian(H, eta: MetricOperator, cond_limit: float = 1e14) -> float:
    """Relative residual |eta H eta^-1 - H^dag| / |H| (Frobenius)."""
    H = as_complex_matrix(H)
    m = eta.matrix
    if np.linalg.cond(m) > cond_limit:
        raise SingularMetric("metric is numerically singular")
    # solve instead of forming the inverse: eta H eta^-1 = eta H solved on the right
    X = np.linalg.solve(m.conj().T, (m @ H).conj().T).conj().T
    return float(np.linalg.norm(X - H.conj().T)
                 / max(np.linalg.norm(H), 1e-300))


def eta_sqrt(eta: MetricOperator) -> MetricOperator:
    """Positive Hermitian square root via eigendecomposition.

    Raises NotPositiveDefinite for indefinite metrics (the complex-pair
    metric has no Hermitian positive root).
    """
    w, V = np.linalg.eigh(eta.matrix)
    if not eta.positive_definite or w.min() <= PD_FLOOR * np.linalg.norm(eta.matrix):
        raise NotPositiveDefinite(
            "metric is not positive definite; square root refused")
    root = (V * np.sqrt(w)) @ V.conj().T
    root = (root + root.conj().T) / 2.0
    return MetricOperator(root, MetricKind.GENERIC, True, eta.source_hash)


def eta_inverse_sqrt(eta: MetricOperator) -> np.ndarray:
    """eta^{-1/2} for a positive-definite metric."""
    w, V = np.linalg.eigh(eta.matrix)
    if not eta.positive_definite or w.min() <= PD_FLOOR * np.linalg.norm(eta.matrix):
        raise NotPositiveDefinite(
            "metric is not positive definite; inverse root refused")
    return (V / np.sqrt(w)) @ V.conj().T


def hermitian_equivalent(H, eta_r: MetricOperator) -> np.ndarray:
    """Isospectral Hermitian matrix h = eta^{1/2} H eta^{-1/2}."""
    H = as_complex_matrix(H)
    root = eta_sqrt(eta_r).matrix
    h = np.linalg.solve(root.conj().T, (root @ H).conj().T).conj().T
    return h


def pt_observable_check(O, eta: MetricOperator) -> float:
    """|eta O - O^dag eta| / max(1, |O|); zero for a metric-compatible observable."""
    O = as_complex_matrix(O)
    m = eta.matrix
    return float(np.linalg.norm(m @ O - O.conj().T @ m)
                 / max(1.0, np.linalg.norm(O)))


def pt_observable_from_hermitian(O_herm, eta_r: MetricOperator) -> np.ndarray:
    """Map a Hermitian operator to its metric-compatible partner.

    Returns eta^{-1/2} O eta^{1/2}, which passes pt_observable_check for
    the same metric.
    """
    O_herm = as_complex_matrix(O_herm)
    root = eta_sqrt(eta_r).matrix
    inv_root = eta_inverse_sqrt(eta_r)
    return inv_root @ O_herm @ root
