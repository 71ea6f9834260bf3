"""Non-unitary time evolution, expectation conventions, and ensembles.

Time evolution of states and density matrices uses the spectral
representation of the (time-independent) Hamiltonian; ODE stepping is
reserved for the perturbed-evolution oracle.  Three expectation-value
conventions are provided: the standard Hermitian one, and the two
metric-weighted variants used with pseudo-Hermitian Hamiltonians.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .biortho import (
    BiorthoEigensystem,
    SpectralClass,
    as_complex_matrix,
    classify_spectrum,
)
from .errors import (
    NonHermitianPerturbation,
    NonStationaryInitialDensity,
    SpectrumNotReal,
    StepSizeNotConverged,
    ZeroNormState,
    ZeroPartitionFunction,
)
from .metric import MetricOperator

__all__ = [
    "PureState",
    "Propagator",
    "Direction",
    "DensityMatrix",
    "ResponseSpec",
    "evolve_state",
    "expval",
    "evolve_density",
    "ensemble_from_states",
    "rho_can",
    "rho_nH",
    "stationarity_residual",
    "linear_response",
    "response_oracle",
]


@dataclass(frozen=True)
class PureState:
    """State vector in a fixed orthonormal working basis."""

    amplitudes: np.ndarray
    basis: str = "site"

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.ndim != 1:
            raise ValueError("amplitudes must be a vector")
        if not np.all(np.isfinite(amp.view(float))):
            raise ValueError("amplitudes must be finite")
        if np.linalg.norm(amp) == 0.0:
            raise ZeroNormState("state has zero norm")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PureState":
        return PureState(self.amplitudes / self.norm(), self.basis)


class Direction(enum.Enum):
    FORWARD = "forward"    # exp(-i H t)
    ADJOINT = "adjoint"    # exp(-i H^dag t)


@dataclass(frozen=True)
class Propagator:
    """Spectral propagator for a time-independent Hamiltonian."""

    eigensystem: BiorthoEigensystem
    direction: Direction = Direction.FORWARD

    def matrix(self, t: float) -> np.ndarray:
        return self.eigensystem.propagator_matrix(
            t, adjoint=self.direction is Direction.ADJOINT)


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix with explicit trace bookkeeping.

    The ``non_hermitian`` flag marks ensembles (like the naive Boltzmann
    one for a non-Hermitian generator) that are allowed to violate
    Hermiticity; physical ensembles are Hermitian, positive
    semidefinite, and unit trace.
    """

    matrix: np.ndarray
    non_hermitian: bool = False

    def __post_init__(self):
        object.__setattr__(self, "matrix",
                           as_complex_matrix(self.matrix))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_residual(self) -> float:
        m = self.matrix
        return float(np.linalg.norm(m - m.conj().T)
                     / max(np.linalg.norm(m), 1e-300))


def evolve_state(prop: Propagator, psi0: PureState, t: float) -> PureState:
    """Apply exp(-iHt) spectrally; no renormalization is performed."""
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    es = prop.eigensystem
    if psi0.dim != es.dim:
        raise ValueError("state dimension does not match the propagator")
    if prop.direction is Direction.FORWARD:
        coeff = es.left.conj().T @ psi0.amplitudes
        amp = es.right @ (np.exp(-1j * es.eigenvalues * t) * coeff)
    else:
        coeff = es.right.conj().T @ psi0.amplitudes
        amp = es.left @ (np.exp(-1j * np.conj(es.eigenvalues) * t) * coeff)
    return PureState(amp, psi0.basis)


def expval(O, psi: PureState, convention: str = "hermitian",
           metric: MetricOperator | None = None) -> complex:
    """Expectation value of O in one of the three conventions.

    ``hermitian``      <psi|O|psi> / <psi|psi>
    ``pt``             <psi|eta O|psi> / <psi|eta|psi>  (metric required)
    ``biorthogonal``   same structure with a generic metric g

    The pt and biorthogonal conventions share the algebra; they differ
    only in which metric the caller supplies.
    """
    O = as_complex_matrix(O)
    v = psi.amplitudes
    if convention == "hermitian":
        den = np.vdot(v, v)
    elif convention in ("pt", "biorthogonal"):
        if metric is None:
            raise ValueError(f"convention {convention!r} requires a metric")
        den = np.vdot(v, metric.matrix @ v)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    if abs(den) < 1e-300:
        raise ZeroNormState("expectation denominator vanishes")
    if convention == "hermitian":
        num = np.vdot(v, O @ v)
    else:
        num = np.vdot(v, metric.matrix @ (O @ v))
    return complex(num / den)


def evolve_density(prop: Propagator, rho0: DensityMatrix, t: float) -> DensityMatrix:
    """rho(t) = exp(-iHt) rho0 exp(+iH^dag t); the trace is not preserved."""
    U = prop.eigensystem.propagator_matrix(
        t, adjoint=prop.direction is Direction.ADJOINT)
    m = U @ rho0.matrix @ U.conj().T
    return DensityMatrix(m, non_hermitian=rho0.non_hermitian)


def ensemble_from_states(states, weights) -> DensityMatrix:
    """Hermitian unit-trace mixture sum_n p_n |psi_n><psi_n| / <psi_n|psi_n>."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be nonnegative and sum to 1")
    dim = states[0].dim
    rho = np.zeros((dim, dim), dtype=complex)
    for p, s in zip(weights, states):
        v = s.amplitudes
        rho += p * np.outer(v, v.conj()) / np.vdot(v, v).real
    return DensityMatrix(rho)


def rho_can(es: BiorthoEigensystem, beta: float):
    """Boltzmann-weighted spectral ensemble exp(-beta H)/Z.

    Returns (DensityMatrix, Z).  For a non-Hermitian generator the
    result is flagged ``non_hermitian``; for complex spectra the weights
    are complex.  This ensemble is generally not stationary.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    E = es.eigenvalues
    weights = np.exp(-beta * E)
    Z = complex(np.sum(weights))
    if abs(Z) < 1e-300:
        raise ZeroPartitionFunction("partition function vanishes")
    m = (es.right * (weights / Z)) @ es.left.conj().T
    herm_res = np.linalg.norm(m - m.conj().T) / max(np.linalg.norm(m), 1e-300)
    return DensityMatrix(m, non_hermitian=bool(herm_res > 1e-12)), Z


def rho_nH(es: BiorthoEigensystem, beta: float) -> DensityMatrix:
    """Stationary Hermitian Boltzmann ensemble over right eigenstates.

    rho = (1/Z) sum_nu exp(-beta E_nu) |R_nu><R_nu| / <R_nu|R_nu>,
    defined for real spectra only; it is Hermitian, positive
    semidefinite, unit trace, and stationary under the non-unitary
    evolution.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if classify_spectrum(es, es.tol) is not SpectralClass.ALL_REAL:
        raise SpectrumNotReal(
            "no stationary mixed ensemble is available for complex spectra")
    E = es.eigenvalues.real
    weights = np.exp(-beta * E)
    Z = weights.sum()
    if Z < 1e-300:
        raise ZeroPartitionFunction("partition function vanishes")
    norms = np.einsum("in,in->n", es.right.conj(), es.right).real
    m = (es.right * (weights / norms / Z)) @ es.right.conj().T
    m = (m + m.conj().T) / 2.0
    return DensityMatrix(m)


def stationarity_residual(es: BiorthoEigensystem, rho: DensityMatrix,
                          t_grid) -> float:
    """max_t |rho(t)/Tr rho(t) - rho(0)/Tr rho(0)| (Frobenius)."""
    prop = Propagator(es)
    ref = rho.matrix / np.trace(rho.matrix)
    worst = 0.0
    for t in t_grid:
        m = evolve_density(prop, rho, float(t)).matrix
        worst = max(worst, float(np.linalg.norm(m / np.trace(m) - ref)))
    return worst


@dataclass(frozen=True)
class ResponseSpec:
    """Perturbation setup for linear response.

    ``O`` is the Hermitian observable, ``D`` the Hermitian operator the
    drive couples to, and (``times``, ``values``) the sampled drive
    f(t) on a uniform grid starting at 0 with f(t < 0) = 0.
    """

    O: np.ndarray
    D: np.ndarray
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        O = as_complex_matrix(self.O)
        D = as_complex_matrix(self.D)
        for name, M in (("O", O), ("D", D)):
            res = np.linalg.norm(M - M.conj().T) / max(1.0, np.linalg.norm(M))
            if res > 1e-12:
                raise NonHermitianPerturbation(
                    f"{name} must be Hermitian (residual {res:.2e})")
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or len(times) < 2:
            raise ValueError("times/values must be matching 1d arrays")
        steps = np.diff(times)
        if times[0] != 0.0 or np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps[0]:
            raise ValueError("times must be a uniform grid starting at 0")
        object.__setattr__(self, "O", O)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)


def _grid_upto(spec: ResponseSpec, t: float):
    idx = np.searchsorted(spec.times, t + 1e-12)
    if idx < 2 or abs(spec.times[idx - 1] - t) > 1e-9 * max(t, 1.0):
        raise ValueError("t must coincide with a node of the drive grid")
    return spec.times[:idx], spec.values[:idx]


def _check_response_inputs(H0, eta0, rho, spec):
    H0 = as_complex_matrix(H0)
    es_check = None  # caller supplies a stationary rho; verified directly
    U = sla.expm(-1j * H0 * 1.0)
    m = U @ rho.matrix @ U.conj().T
    m = m / np.trace(m)
    ref = rho.matrix / np.trace(rho.matrix)
    if np.linalg.norm(m - ref) > 1e-8:
        raise NonStationaryInitialDensity(
            "initial density matrix is not stationary under H0")
    return H0


def linear_response(H0, eta0: MetricOperator, rho: DensityMatrix,
                    spec: ResponseSpec, t: float) -> float:
    """First-order change of <O> at time t under the drive f(t) D.

    Evaluates the retarded-commutator convolution plus the norm
    correction that a non-unitary evolution generates; the drive is
    integrated with the trapezoid rule on its own grid.  For a
    Hermitian generator the norm correction vanishes identically and
    the standard Kubo result is recovered.
    """
    H0 = _check_response_inputs(H0, eta0, rho, spec)
    ts, fs = _grid_upto(spec, t)
    r = rho.matrix / np.trace(rho.matrix)
    O, D = spec.O, spec.D
    Hd = H0.conj().T

    chi = np.empty(len(ts))
    norm_kick = np.empty(len(ts), dtype=complex)
    for i, tp in enumerate(ts):
        tau = t - tp
        # metric-transported observable exp(iH^dag tau) O exp(-iH tau)
        M = sla.expm(1j * Hd * tau) @ O @ sla.expm(-1j * H0 * tau)
        chi[i] = (-1j * np.trace(r @ (M @ D - D @ M))).real
        Dd = sla.expm(1j * H0 * (tp - t)) @ D @ sla.expm(-1j * H0 * (tp - t))
        norm_kick[i] = np.trace(r @ (Dd.conj().T - Dd))
    commutator_term = float(np.trapezoid(fs * chi, ts))
    o_expect = np.trace(r @ O).real
    norm_term = complex(1j * np.trapezoid(fs * norm_kick, ts))
    return commutator_term - o_expect * norm_term.real


def response_oracle(H0, rho: DensityMatrix, spec: ResponseSpec, t: float,
                    eps: float, rtol: float = 1e-8, max_halvings: int = 18) -> float:
    """Nonperturbative finite-difference response via stepped evolution.

    Evolves rho under H0 + eps f(t) D with midpoint time-ordered steps,
    halving the step until the result is converged, and returns
    (<O>_perturbed - <O>_unperturbed) / eps.
    """
    if eps == 0.0:
        raise ValueError("eps must be nonzero (0/0 guard)")
    H0 = _check_response_inputs(H0, None, rho, spec)
    ts, fs = _grid_upto(spec, t)
    r = rho.matrix / np.trace(rho.matrix)
    O, D = spec.O, spec.D

    U0 = sla.expm(-1j * H0 * t)
    m0 = U0 @ r @ U0.conj().T
    base = (np.trace(m0 @ O) / np.trace(m0)).real

    def evolve(nsub: int) -> float:
        U = np.eye(H0.shape[0], dtype=complex)
        for i in range(len(ts) - 1):
            t0, t1 = ts[i], ts[i + 1]
            h = (t1 - t0) / nsub
            for k in range(nsub):
                tm = t0 + (k + 0.5) * h
                # drive interpolated linearly at the midpoint
                f = np.interp(tm, ts, fs)
                U = sla.expm(-1j * (H0 + eps * f * D) * h) @ U
        m = U @ r @ U.conj().T
        return (np.trace(m @ O) / np.trace(m)).real

    prev = evolve(1)
    for k in range(1, max_halvings + 1):
        cur = evolve(2 ** k)
        if abs(cur - prev) <= rtol * max(1.0, abs(cur)):
            return (cur - base) / eps
        prev = cur
    raise StepSizeNotConverged(
        f"midpoint stepping did not converge within {max_halvings} halvings")
