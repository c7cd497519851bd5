import numpy as np
import pytest
import scipy.integrate

from gbdt.continuous import (
    ContinuousState,
    PotentialSpec,
    darboux_j_residual,
    darboux_matrix,
    dynamical_solution,
    evolve_closed_form,
    evolve_ode,
    identity_residual_profile,
    intertwining_residual,
    l2_identity,
    min_eig_profile,
    schrodinger_residuals,
    state_at,
    transform_eigenfunction,
    transformed_potential,
    validate_triple,
    x_blocks,
    z_blocks,
)
from gbdt.errors import (
    AccuracyError,
    DomainError,
    NotPositiveDefiniteError,
    SpectralGuardError,
)
from gbdt.linalg import frob
from gbdt.params import ParameterTriple
from gbdt.sampling import (
    continuous_triple,
    decaying_scalar_triple,
    random_hermitian,
    soliton_triple,
)

from conftest import grid


def scalar_triple(a, s0, pi0):
    return ParameterTriple.make(
        np.array([[a]], dtype=complex),
        np.array([[s0]], dtype=complex),
        np.array([pi0], dtype=complex),
    )


def zero_pi_triple(n=2, h=2, seed=0):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, n)
    return ParameterTriple.make(a, np.eye(n), np.zeros((n, 2 * h)))


class TestValidate:
    def test_trivial_examples(self):
        assert validate_triple(scalar_triple(2.0, 1.0, [1.0, 1.0])) == 0.0
        assert validate_triple(scalar_triple(1j, 1.0, [1j, 1.0])) == pytest.approx(
            0.0, abs=1e-15
        )
        assert validate_triple(zero_pi_triple()) == 0.0

    def test_variant_guard(self):
        t = ParameterTriple.make(np.eye(1), np.eye(1), np.zeros((1, 2)), "discrete")
        with pytest.raises(ValueError):
            validate_triple(t)


class TestClosedForm:
    def test_initial_condition_exact(self):
        rng = np.random.default_rng(1)
        triple = continuous_triple(rng, 3, 2)
        st = evolve_closed_form(triple, grid(1.0, 1e-2))
        assert np.array_equal(st.pi[0], triple.pi0)
        assert np.array_equal(st.s[0], triple.s0)

    def test_zero_orbit(self):
        st = evolve_closed_form(zero_pi_triple(), grid(2.0, 1e-2))
        assert not st.pi.any()
        assert np.array_equal(st.s, np.broadcast_to(np.eye(2), st.s.shape))

    def test_s_matches_adaptive_quadrature(self):
        # A = -kappa^2 (kappa=1), Pi0 = [1, 1]: Lambda2(x) = e^{-x}, so
        # S(x) = S0 + int_0^x e^{-2 eta} d eta; the oracle integrates
        # |Lambda2|^2 adaptively, independent of the Simpson path.
        triple = scalar_triple(-1.0, 1.0, [1.0, 1.0])
        st = evolve_closed_form(triple, grid(5.0))
        for x in (0.5, 1.0, 5.0):
            oracle, err = scipy.integrate.quad(lambda e: np.exp(-2.0 * e), 0.0, x)
            assert err < 1e-12
            k = st.sample_index(x)
            assert abs(st.s[k, 0, 0] - (1.0 + oracle)) < 1e-10

    def test_identity_drift_small(self):
        rng = np.random.default_rng(2)
        triple = continuous_triple(rng, 4, 3)
        st = evolve_closed_form(triple, grid(5.0))
        scale = 1.0 + frob(triple.a) * np.max(np.linalg.norm(st.s, axis=(1, 2)))
        assert st.id_drift <= 1e-9 * scale

    def test_grid_validation(self):
        triple = zero_pi_triple()
        with pytest.raises(DomainError):
            evolve_closed_form(triple, np.array([1.0, 2.0, 3.0]))
        with pytest.raises(DomainError):
            evolve_closed_form(triple, np.array([0.0, 0.2, 0.1]))


class TestOde:
    def test_matches_closed_form(self, seeded_state):
        st_c = evolve_closed_form(seeded_state.triple, seeded_state.xs)
        assert np.max(np.abs(st_c.pi - seeded_state.pi)) < 1e-8
        assert np.max(np.abs(st_c.s - seeded_state.s)) < 1e-8

    def test_zero_orbit_bit_exact(self):
        triple = zero_pi_triple()
        st = evolve_ode(triple, PotentialSpec.zero(2), grid(1.0, 1e-2))
        assert not st.pi.any()
        assert np.array_equal(st.s, np.broadcast_to(np.eye(2), st.s.shape))

    def test_constant_potential_drift(self):
        rng = np.random.default_rng(3)
        triple = continuous_triple(rng, 3, 2)
        xs = grid(5.0)
        u = PotentialSpec.tabulated(
            xs, np.broadcast_to(0.3 * np.eye(2), (xs.size, 2, 2))
        )
        st = evolve_ode(triple, u, xs)
        scale = 1.0 + frob(triple.a) * np.max(np.linalg.norm(st.s, axis=(1, 2)))
        assert st.id_drift <= 1e-9 * scale

    def test_tabulated_zero_matches_zero_kind(self):
        rng = np.random.default_rng(4)
        triple = continuous_triple(rng, 2, 1)
        xs = grid(1.0)
        u_tab = PotentialSpec.tabulated(xs, np.zeros((xs.size, 1, 1)))
        st_a = evolve_ode(triple, PotentialSpec.zero(1), xs)
        st_b = evolve_ode(triple, u_tab, xs)
        assert np.max(np.abs(st_a.pi - st_b.pi)) < 1e-12

    def test_coarse_step_raises_with_suggestion(self):
        # A = 2i: the identity balances Im(A) S against Im(Pi1 conj(Pi2)),
        # so RK4 truncation shows up as genuine drift.
        triple = scalar_triple(2.0j, 1.0, [2.0j, 1.0])
        with pytest.raises(AccuracyError) as exc:
            evolve_ode(triple, PotentialSpec.zero(1), grid(5.0, 0.5), step=0.5)
        assert exc.value.suggested_step is not None
        assert exc.value.suggested_step < 0.5

    def test_potential_coverage_enforced(self):
        triple = zero_pi_triple(h=1)
        xs = grid(2.0, 1e-2)
        short = PotentialSpec.tabulated(grid(1.0, 1e-2), np.zeros((101, 1, 1)))
        with pytest.raises(DomainError):
            evolve_ode(triple, short, xs)
        coarse = PotentialSpec.tabulated(grid(2.0, 0.5), np.zeros((5, 1, 1)))
        with pytest.raises(DomainError):
            evolve_ode(triple, coarse, xs)

    def test_against_independent_integrator(self):
        # Cross-integrator oracle: the same flow (with the same
        # piecewise-linear potential) integrated by scipy's DOP853 from a
        # flattened state must agree with the RK4 sweep.
        rng = np.random.default_rng(11)
        triple = continuous_triple(rng, 2, 1)
        xs = grid(1.0)
        u_vals = (0.2 * np.sin(3.0 * xs))[:, None, None].astype(complex)
        u = PotentialSpec.tabulated(xs, u_vals)
        st = evolve_ode(triple, u, xs)

        n, h = triple.n, triple.h

        def rhs(x, y):
            pi = y[: n * 2 * h].reshape(n, 2 * h)
            s = y[n * 2 * h :].reshape(n, n)
            phi1, phi2 = pi[:, :h], pi[:, h:]
            dpi = np.concatenate(
                [triple.a @ phi2 - phi2 @ u.at_x(x), -phi1], axis=1
            )
            ds = phi2 @ phi2.conj().T
            return np.concatenate([dpi.ravel(), ds.ravel()])

        y0 = np.concatenate([triple.pi0.ravel(), triple.s0.ravel()])
        sol = scipy.integrate.solve_ivp(
            rhs, (0.0, 1.0), y0, method="DOP853", rtol=1e-12, atol=1e-12,
            max_step=1e-2,
        )
        pi_end = sol.y[: n * 2 * h, -1].reshape(n, 2 * h)
        s_end = sol.y[n * 2 * h :, -1].reshape(n, n)
        assert frob(pi_end - st.pi[-1]) < 1e-8
        assert frob(s_end - st.s[-1]) < 1e-8


class TestStateAt:
    def test_sample_returns_stored(self, seeded_state):
        pi, s = state_at(seeded_state, seeded_state.xs[7])
        assert np.array_equal(pi, seeded_state.pi[7])
        assert np.array_equal(s, seeded_state.s[7])

    def test_off_grid_consistent(self, seeded_state):
        x = 1.00037
        pi, s = state_at(seeded_state, x)
        fine = evolve_closed_form(
            seeded_state.triple, np.linspace(0.0, x, 2001)
        )
        assert frob(pi - fine.pi[-1]) < 1e-9
        assert frob(s - fine.s[-1]) < 1e-9

    def test_outside_interval(self, seeded_state):
        with pytest.raises(DomainError):
            state_at(seeded_state, 11.0)


class TestXBlocks:
    def test_zero_orbit(self):
        st = evolve_closed_form(zero_pi_triple(), grid(1.0, 1e-2))
        xb = x_blocks(st)
        assert not xb.x11.any() and not xb.x22.any()

    def test_hermitian_structure(self, seeded_state):
        xb = x_blocks(seeded_state)
        assert np.max(np.abs(xb.x12 - xb.x21.conj().transpose(0, 2, 1))) < 1e-12
        assert np.max(np.abs(xb.x11 - xb.x11.conj().transpose(0, 2, 1))) < 1e-12
        assert np.max(np.abs(xb.x22 - xb.x22.conj().transpose(0, 2, 1))) < 1e-12

    def test_positive_semidefinite(self, seeded_state):
        xb = x_blocks(seeded_state)
        full = np.concatenate(
            [
                np.concatenate([xb.x11, xb.x12], axis=2),
                np.concatenate([xb.x21, xb.x22], axis=2),
            ],
            axis=1,
        )
        assert np.min(np.linalg.eigvalsh(full)) > -1e-12

    def test_x22_decays_on_decaying_branch(self):
        st = evolve_closed_form(decaying_scalar_triple(1.0), grid(20.0, 1e-2))
        xb = x_blocks(st)
        assert abs(xb.x22[-1, 0, 0]) < 1e-10
        assert abs(xb.x22[0, 0, 0]) > 0.1

    def test_non_pd_s_reports_sample(self, seeded_state):
        s_bad = seeded_state.s.copy()
        s_bad[5] = -np.eye(seeded_state.n)
        st = ContinuousState(
            seeded_state.triple,
            seeded_state.xs,
            seeded_state.pi,
            s_bad,
            seeded_state.u,
            seeded_state.id_drift,
        )
        with pytest.raises(NotPositiveDefiniteError, match="x=0.005"):
            x_blocks(st)


class TestTransformedPotential:
    def test_zero_orbit_reproduces_u(self):
        st = evolve_closed_form(zero_pi_triple(), grid(1.0, 1e-2))
        ut = transformed_potential(st)
        assert not ut.any()

    def test_hermitian_output(self, seeded_state):
        ut = transformed_potential(seeded_state)
        assert np.max(np.abs(ut - ut.conj().transpose(0, 2, 1))) < 1e-12

    def test_soliton_profile(self, soliton_state):
        # For Pi0 = [-kappa, 1], S0 = 1 + 1/(2 kappa): S = c1 + c2 e^{2x}
        # with c1 = 1, c2 = 1/(2 kappa), so u~ = -2 sech^2(x + phi) with
        # phi = ln(c2/c1)/2 (all derived from the scalar closed form).
        ut = transformed_potential(soliton_state)[:, 0, 0]
        phi = 0.5 * np.log(0.5)
        expected = -2.0 / np.cosh(soliton_state.xs + phi) ** 2
        assert np.max(np.abs(ut - expected)) < 1e-8

    def test_differential_identity_fd(self, soliton_state, seeded_state):
        for st in (soliton_state, seeded_state):
            assert schrodinger_residuals(st)["x22_fd"] < 1e-6


class TestDynamicalSolution:
    def test_t_zero_is_z2(self, seeded_state):
        _, z2 = z_blocks(seeded_state)
        psi = dynamical_solution(seeded_state, [0.0])
        assert np.max(np.abs(psi[0] - z2)) < 1e-14
        assert psi.shape[2:] == (seeded_state.h, seeded_state.n)

    def test_zero_orbit(self):
        st = evolve_closed_form(zero_pi_triple(), grid(1.0, 1e-2))
        psi = dynamical_solution(st, [0.0, 1.0])
        assert not psi.any()

    def test_pde_residuals(self, soliton_state, seeded_state):
        for st in (soliton_state, seeded_state):
            res = schrodinger_residuals(st)
            assert res["elliptic_chain"] < 1e-9
            assert res["space_fd"] < 1e-4


class TestDarboux:
    def test_zero_orbit_identity(self):
        st = evolve_closed_form(zero_pi_triple(), grid(1.0, 1e-2))
        w = darboux_matrix(st, 0.7 + 0.2j, 0.5)
        assert np.array_equal(w, np.eye(4))

    def test_large_lambda_bound(self, seeded_state):
        lam = 1e6
        w = darboux_matrix(seeded_state, lam, 2.0)
        pi_x, s_x = state_at(seeded_state, 2.0)
        from gbdt.linalg import solve_hpd

        z = solve_hpd(s_x, pi_x).conj().T
        rho = np.max(np.abs(np.linalg.eigvals(seeded_state.triple.a)))
        bound = frob(z) * frob(pi_x) / (lam - rho)
        assert frob(w - np.eye(2 * seeded_state.h)) <= bound

    def test_intertwining_residual(self, seeded_state, soliton_state):
        for st, lam in ((seeded_state, 2.0 + 0.5j), (soliton_state, 1.7)):
            assert intertwining_residual(st, lam, 1.0, delta=1e-4) < 1e-5

    def test_j_relation(self, seeded_state):
        for lam in (1.9, 0.8 + 1.1j):
            for x in (0.0, 2.5):
                assert darboux_j_residual(seeded_state, lam, x) < 1e-10

    def test_spectral_guard(self, soliton_state):
        with pytest.raises(SpectralGuardError):
            darboux_matrix(soliton_state, -1.0, 1.0)


class TestEigenfunctionTransform:
    def test_zero_orbit_passthrough(self):
        st = evolve_closed_form(zero_pi_triple(n=2, h=1), grid(1.0, 1e-2))
        y = lambda x: np.array([np.exp(0.5j * x)])
        yp = lambda x: np.array([0.5j * np.exp(0.5j * x)])
        out = transform_eigenfunction(st, y, yp, 0.25)
        expected = np.exp(0.5j * st.xs)[:, None, None]
        assert np.max(np.abs(out.values - expected)) < 1e-14

    def test_plane_wave_residual(self, seeded_state):
        h = seeded_state.h
        g = np.ones(h)
        kw = 1.3
        y = lambda x: np.exp(1j * kw * x) * g
        yp = lambda x: 1j * kw * np.exp(1j * kw * x) * g
        out = transform_eigenfunction(seeded_state, y, yp, kw**2)
        assert out.residual < 1e-8

    def test_soliton_transform_bounded(self):
        st = evolve_closed_form(soliton_triple(1.0), grid(20.0, 1e-2))
        kw = 0.9
        y = lambda x: np.array([np.exp(1j * kw * x)])
        yp = lambda x: np.array([1j * kw * np.exp(1j * kw * x)])
        out = transform_eigenfunction(st, y, yp, kw**2)
        assert out.residual < 1e-8
        assert np.max(np.abs(out.values)) < 10.0

    def test_lambda_guard(self, soliton_state):
        y = lambda x: np.array([1.0 + 0j])
        with pytest.raises(SpectralGuardError):
            transform_eigenfunction(soliton_state, y, y, -1.0)


class TestL2Identity:
    def test_zero_orbit(self):
        st = evolve_closed_form(zero_pi_triple(), grid(1.0, 1e-2))
        lhs, rhs = l2_identity(st, 1.0)
        assert not lhs.any() and np.max(np.abs(rhs)) < 1e-14

    def test_small_ell_both_small(self, soliton_state):
        lhs, rhs = l2_identity(soliton_state, 0.01)
        assert frob(lhs) < 0.01 and frob(rhs) < 0.01

    def test_soliton_identity(self, soliton_state):
        for ell in (1.0, 5.0, 10.0):
            lhs, rhs = l2_identity(soliton_state, ell)
            assert frob(lhs - rhs) < 1e-8

    def test_monotone_and_bounded(self, soliton_state):
        from gbdt.linalg import inv_hpd

        lhs2, _ = l2_identity(soliton_state, 2.0)
        lhs5, _ = l2_identity(soliton_state, 5.0)
        assert np.linalg.eigvalsh(lhs5 - lhs2)[0] > -1e-12
        s0_inv = inv_hpd(soliton_state.triple.s0)
        assert np.linalg.eigvalsh(s0_inv - lhs5)[0] > 0

    def test_positive_ell_required(self, soliton_state):
        with pytest.raises(DomainError):
            l2_identity(soliton_state, 0.0)


class TestPotentialSpec:
    def test_linear_interpolation(self):
        gridu = np.array([0.0, 1.0, 2.0])
        vals = np.array([[[0.0]], [[2.0]], [[4.0]]], dtype=complex)
        u = PotentialSpec.tabulated(gridu, vals)
        assert u.at_x(0.5)[0, 0] == pytest.approx(1.0)
        assert u.values_on(np.array([1.5]))[0, 0, 0] == pytest.approx(3.0)

    def test_rejects_non_hermitian_sample(self):
        vals = np.array([[[0.0, 1.0], [0.0, 0.0]]] * 2, dtype=complex)
        with pytest.raises(Exception, match="Hermitian"):
            PotentialSpec.tabulated(np.array([0.0, 1.0]), vals)

    def test_rejects_bad_grid(self):
        with pytest.raises(DomainError):
            PotentialSpec.tabulated(np.array([0.0, 0.0]), np.zeros((2, 1, 1)))


class TestInvariants:
    def test_positivity_preserved(self, seeded_state):
        lam0 = np.linalg.eigvalsh(seeded_state.triple.s0)[0]
        eigs = min_eig_profile(seeded_state)
        assert eigs.min() >= lam0 - 1e-9 * (1.0 + _max_s(seeded_state))

    def test_s_monotone_in_definite_order(self, seeded_state):
        diffs = seeded_state.s[1:] - seeded_state.s[:-1]
        assert np.min(np.linalg.eigvalsh(diffs)) > -1e-10

    def test_identity_profile_matches_drift(self, seeded_state):
        prof = identity_residual_profile(seeded_state)
        assert prof.max() == pytest.approx(seeded_state.id_drift)


def _max_s(state):
    return float(np.max(np.linalg.norm(state.s, axis=(1, 2))))
