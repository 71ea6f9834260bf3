import numpy as np
import pytest
import scipy.linalg as sla

from nhqm.biortho import biortho_decompose
from nhqm.dynamics import (
    DensityMatrix,
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
from nhqm.errors import (
    NonHermitianPerturbation,
    NonStationaryInitialDensity,
    SpectrumNotReal,
    ZeroNormState,
)
from nhqm.metric import build_eta_r
from nhqm.models import (
    TwoLevelParams,
    two_level_hamiltonian,
    two_level_norm_closed,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
D_L = np.diag([1.0, 0.0]).astype(complex)
UP = PureState(np.array([1.0, 0.0], dtype=complex))


@pytest.fixture(scope="module")
def two_level_06():
    p = TwoLevelParams(r=0.6, s=1.0, theta=np.pi / 2, phi=0.0)
    H = two_level_hamiltonian(p)
    es = biortho_decompose(H)
    return p, H, es


class TestEvolveState:
    def test_identity_at_zero_time(self, two_level_06):
        _, _, es = two_level_06
        psi = evolve_state(Propagator(es), UP, 0.0)
        assert np.allclose(psi.amplitudes, UP.amplitudes, atol=1e-14)

    def test_norm_oscillation_quarter_period(self, two_level_06):
        p, _, es = two_level_06
        t = (np.pi / 2) / (2 * p.s * np.sqrt(1 - p.z ** 2))
        psi = evolve_state(Propagator(es), UP, t)
        assert abs(psi.norm() ** 2 - 2.3125) < 1e-10
        assert abs(two_level_norm_closed(p, t) - 2.3125) < 1e-14

    def test_norm_closed_form_on_grid(self, two_level_06):
        p, _, es = two_level_06
        prop = Propagator(es)
        for t in np.linspace(0.0, 12.0, 60):
            psi = evolve_state(prop, UP, float(t))
            assert abs(psi.norm() ** 2 - two_level_norm_closed(p, float(t))) < 1e-10

    def test_hermitian_evolution_is_unitary(self, rng):
        A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        H = (A + A.conj().T) / 2
        es = biortho_decompose(H)
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi0 = PureState(v / np.linalg.norm(v))
        for t in (0.7, 3.1, -2.2):
            assert abs(evolve_state(Propagator(es), psi0, t).norm() - 1.0) < 1e-12

    def test_composition(self, two_level_06):
        _, _, es = two_level_06
        prop = Propagator(es)
        t1, t2 = 0.9, 2.3
        once = evolve_state(prop, UP, t1 + t2)
        twice = evolve_state(prop, evolve_state(prop, UP, t1), t2)
        assert np.linalg.norm(once.amplitudes - twice.amplitudes) < 1e-11

    def test_bio_inner_product_conserved(self, two_level_06, rng):
        # the metric-weighted inner product is constant for real spectra
        _, _, es = two_level_06
        eta = build_eta_r(es).matrix
        prop = Propagator(es)
        for _ in range(5):
            a = PureState(rng.normal(size=2) + 1j * rng.normal(size=2))
            b = PureState(rng.normal(size=2) + 1j * rng.normal(size=2))
            ref = np.vdot(a.amplitudes, eta @ b.amplitudes)
            for t in np.linspace(0.0, 20.0, 9):
                at = evolve_state(prop, a, float(t)).amplitudes
                bt = evolve_state(prop, b, float(t)).amplitudes
                assert abs(np.vdot(at, eta @ bt) - ref) < 1e-10


class TestExpval:
    def test_initial_occupancy(self, two_level_06):
        assert abs(expval(D_L, UP) - 1.0) < 1e-14

    def test_half_period_occupancy(self, two_level_06):
        p, _, es = two_level_06
        # at omega_z s t = pi: value (1/2 (1+cos) - z^2 cos)/(1 - z^2 cos) = 0.36/1.36
        t = np.pi / (2 * np.sqrt(1 - p.z ** 2))
        psi = evolve_state(Propagator(es), UP, t)
        assert abs(expval(D_L, psi).real - 0.36 / 1.36) < 1e-10

    def test_pt_energy_expectation_is_probabilistic(self, two_level_06, rng):
        _, H, es = two_level_06
        eta = build_eta_r(es)
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi = PureState(v)
        c = es.left.conj().T @ v
        expected = np.sum(es.eigenvalues.real * np.abs(c) ** 2) / np.sum(np.abs(c) ** 2)
        got = expval(H, psi, convention="pt", metric=eta)
        assert abs(got.imag) < 1e-12
        assert abs(got.real - expected) < 1e-12

    def test_hermitian_value_within_spectral_bounds(self, rng):
        O = np.diag([0.0, 0.3, 1.0]).astype(complex)
        for _ in range(20):
            v = rng.normal(size=3) + 1j * rng.normal(size=3)
            val = expval(O, PureState(v)).real
            assert -1e-12 <= val <= 1.0 + 1e-12

    def test_pt_denominator_positive(self, two_level_06, rng):
        _, _, es = two_level_06
        eta = build_eta_r(es).matrix
        for _ in range(20):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            assert np.vdot(v, eta @ v).real > 0

    def test_heisenberg_identity_only_in_pt_convention(self, two_level_06):
        p, H, es = two_level_06
        eta = build_eta_r(es)
        prop = Propagator(es)
        O = D_L
        worst_pt, worst_std = 0.0, 0.0
        for t in np.linspace(0.2, 6.0, 12):
            psi_t = evolve_state(prop, UP, float(t))
            lhs = expval(O, psi_t, convention="pt", metric=eta)
            U = es.propagator_matrix(float(t))
            Uinv = es.propagator_matrix(-float(t))
            O_heis = Uinv @ O @ U  # exp(+iHt) O exp(-iHt)
            rhs = expval(O_heis, UP, convention="pt", metric=eta)
            worst_pt = max(worst_pt, abs(lhs - rhs))
            lhs_std = expval(O, psi_t).real
            rhs_std = expval(O_heis, UP).real
            worst_std = max(worst_std, abs(lhs_std - rhs_std))
        assert worst_pt < 1e-10
        assert worst_std > 1e-3  # no conventional Heisenberg picture

    def test_zero_state_rejected(self):
        with pytest.raises(ZeroNormState):
            PureState(np.zeros(2))


class TestDensity:
    def test_hermitian_trace_preserved(self, rng):
        A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        H = (A + A.conj().T) / 2
        es = biortho_decompose(H)
        rho = ensemble_from_states(
            [PureState(rng.normal(size=3) + 1j * rng.normal(size=3))
             for _ in range(2)], [0.5, 0.5])
        for t in (0.5, 2.0, 7.0):
            out = evolve_density(Propagator(es), rho, t)
            assert abs(out.trace - 1.0) < 1e-12

    def test_trace_tracks_state_norm(self, two_level_06):
        p, _, es = two_level_06
        rho0 = ensemble_from_states([UP], [1.0])
        t = (np.pi / 2) / (2 * p.s * np.sqrt(1 - p.z ** 2))
        out = evolve_density(Propagator(es), rho0, t)
        assert abs(out.trace.real - 2.3125) < 1e-10

    def test_hermiticity_preserved(self, two_level_06, rng):
        _, _, es = two_level_06
        rho0 = ensemble_from_states(
            [PureState(rng.normal(size=2) + 1j * rng.normal(size=2))
             for _ in range(2)], [0.3, 0.7])
        out = evolve_density(Propagator(es), rho0, 3.3)
        assert out.hermiticity_residual() < 1e-12


class TestEnsembles:
    def test_rho_can_infinite_temperature(self, two_level_06):
        _, _, es = two_level_06
        rho, Z = rho_can(es, 0.0)
        assert np.allclose(rho.matrix, np.eye(2) / 2, atol=1e-12)

    def test_rho_can_partition_function(self, two_level_06):
        _, H, es = two_level_06
        rho, Z = rho_can(es, 1.0)
        assert abs(Z - 2 * np.cosh(0.8)) < 1e-12
        # cross-check against the matrix exponential
        assert abs(Z - np.trace(sla.expm(-H))) < 1e-12
        assert rho.non_hermitian

    def test_rho_can_not_stationary(self, two_level_06):
        _, _, es = two_level_06
        rho, _ = rho_can(es, 1.0)
        assert stationarity_residual(es, rho, np.linspace(0, 5, 26)) > 1e-2

    def test_rho_nH_hermitian_limit_is_canonical(self, rng):
        A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        H = (A + A.conj().T) / 2
        es = biortho_decompose(H)
        got = rho_nH(es, 1.3).matrix
        want = sla.expm(-1.3 * H)
        want = want / np.trace(want)
        assert np.max(np.abs(got - want)) < 1e-11

    def test_rho_nH_properties_and_stationarity(self, two_level_06):
        _, _, es = two_level_06
        rho = rho_nH(es, 2.0)
        assert abs(rho.trace - 1.0) < 1e-12
        assert rho.hermiticity_residual() < 1e-12
        assert np.linalg.eigvalsh(rho.matrix).min() > -1e-14
        assert stationarity_residual(es, rho, np.linspace(0, 10, 21)) < 1e-11

    def test_rho_nH_refused_for_broken_spectrum(self):
        H = two_level_hamiltonian(TwoLevelParams(r=1.25, s=1.0))
        with pytest.raises(SpectrumNotReal):
            rho_nH(biortho_decompose(H), 1.0)

    def test_lagrange_identity_for_functions_of_h(self, two_level_06):
        # Tr[rho_nH f(H)] = Tr[rho_can f(H)] although the ensembles differ
        _, H, es = two_level_06
        rnh = rho_nH(es, 1.0)
        rcan, _ = rho_can(es, 1.0)
        f = H @ H
        a = np.trace(rnh.matrix @ f)
        b = np.trace(rcan.matrix @ f)
        assert abs(a - b) < 1e-12
        expected = np.sum(es.eigenvalues.real ** 2 * np.exp(-es.eigenvalues.real)) \
            / np.sum(np.exp(-es.eigenvalues.real))
        assert abs(a.real - expected) < 1e-12


def step_drive(t_max=4.0, n=161):
    times = np.linspace(0.0, t_max, n)
    return times, np.ones_like(times)


class TestLinearResponse:
    def test_zero_drive_zero_response(self, two_level_06):
        _, H, es = two_level_06
        eta = build_eta_r(es)
        rho = rho_nH(es, 2.0)
        times, _ = step_drive()
        spec = ResponseSpec(SX, SX, times, np.zeros_like(times))
        assert linear_response(H, eta, rho, spec, 2.0) == pytest.approx(0.0, abs=1e-14)

    def test_hermitian_limit_matches_rabi_closed_form(self):
        # H0 = (Delta/2) sigma_z, ground start, drive sigma_x:
        # first-order <sigma_x>(t) = (2/Delta)(cos(Delta t) - 1)
        delta = 1.7
        H0 = np.diag([delta / 2, -delta / 2]).astype(complex)
        es = biortho_decompose(H0)
        eta = build_eta_r(es)
        rho = DensityMatrix(np.diag([0.0, 1.0]).astype(complex))
        times, values = step_drive(t_max=3.0, n=3001)
        spec = ResponseSpec(SX, SX, times, values)
        t = 3.0
        got = linear_response(H0, eta, rho, spec, t)
        want = (2 / delta) * (np.cos(delta * t) - 1)
        assert abs(got - want) < 1e-6
        # oracle agrees with the analytic first order as eps -> 0
        sym = 0.5 * (response_oracle(H0, rho, spec, t, 1e-4)
                     + response_oracle(H0, rho, spec, t, -1e-4))
        assert abs(sym - want) < 1e-6

    def test_two_level_matches_oracle_with_linear_error(self, two_level_06):
        _, H, es = two_level_06
        eta = build_eta_r(es)
        rho = rho_nH(es, 2.0)
        times, values = step_drive(t_max=3.0, n=1501)
        spec = ResponseSpec(SX, SX, times, values)
        t = 3.0
        lr = linear_response(H, eta, rho, spec, t)
        diffs = {}
        for eps in (1e-3, 1e-4):
            diffs[eps] = abs(lr - response_oracle(H, rho, spec, t, eps))
        # first-order agreement: |lr - oracle| = C eps with stable C
        ratio = diffs[1e-3] / diffs[1e-4]
        assert 10 / 12 < ratio < 10 * 12

    def test_requires_stationary_rho(self, two_level_06):
        _, H, es = two_level_06
        eta = build_eta_r(es)
        rho, _ = rho_can(es, 1.0)
        times, values = step_drive()
        spec = ResponseSpec(SX, SX, times, values)
        with pytest.raises(NonStationaryInitialDensity):
            linear_response(H, eta, rho, spec, 2.0)

    def test_requires_hermitian_operators(self):
        times, values = step_drive()
        with pytest.raises(NonHermitianPerturbation):
            ResponseSpec(np.array([[0, 1], [0, 0]], dtype=complex), SX,
                         times, values)

    def test_oracle_rejects_zero_eps(self, two_level_06):
        _, H, es = two_level_06
        rho = rho_nH(es, 2.0)
        times, values = step_drive()
        spec = ResponseSpec(SX, SX, times, values)
        with pytest.raises(ValueError):
            response_oracle(H, rho, spec, 2.0, 0.0)
