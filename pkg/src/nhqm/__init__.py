"""Numerical toolbox for PT-symmetric / pseudo-Hermitian lattice models.

Biorthonormal eigensystems, metric operators, non-unitary dynamics with
competing expectation-value conventions, Hermitian ancilla embeddings,
stationary ensembles with linear response, and free-fermion many-body
correlators, plus a CLI that reproduces the reference figures as CSV
and PNG reports.
"""

from .biortho import (
    BiorthoEigensystem,
    SpectralClass,
    biortho_decompose,
    classify_spectrum,
    exceptional_proximity,
    verify_completeness,
    verify_spectral_representation,
)
from .metric import (
    MetricKind,
    MetricOperator,
    build_eta_cp,
    build_eta_r,
    eta_r_inverse,
    eta_sqrt,
    hermitian_equivalent,
    is_pseudo_hermitian,
    pt_observable_check,
    pt_observable_from_hermitian,
)
from .dynamics import (
    DensityMatrix,
    Direction,
    Propagator,
    PureState,
    ResponseSpec,
    ensemble_from_states,
    evolve_density,
    evolve_state,
    expval,
    linear_response,
    response_oracle,
    rho_can,
    rho_nH,
    stationarity_residual,
)
from .ancilla import (
    AncillaEmbedding,
    broken_phase_M,
    build_embedding,
    embed_state,
    postselect_up,
    verify_equivalence,
)
from .models import (
    ChainParams,
    RLMParams,
    TwoLevelParams,
    chain_dispersion,
    chain_hamiltonian,
    rlm_bound_state_predictions,
    rlm_hamiltonian,
    rlm_scattering_momenta,
    two_level_closed_forms,
    two_level_hamiltonian,
    two_level_norm_closed,
    two_level_occupancy_closed,
)
from .manybody import (
    ComplexPair,
    OccupationPolicy,
    SlaterState,
    ZeroMode,
    corr_bio,
    corr_hermitian,
    corr_matrix,
    critical_green_scan,
    dot_occupancy_scan,
    fock_oracle,
    ground_state,
    pt_convergence_scan,
)

__version__ = "0.1.0"
