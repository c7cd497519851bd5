import numpy as np
import pytest

from gbdt.discrete import (
    JacobiData,
    breve_w,
    build_initial_jacobi,
    discrete_solution,
    dynamical_residual,
    eigen_blocks,
    j14_residual,
    j_algebra_residuals,
    jacobi_commutation_residual,
    run_recursion,
    transform_jacobi,
    validate_discrete_triple,
    xi_matrix,
    xi_tilde,
    xi_tilde_checks,
    xi_tilde_via_x,
)
from gbdt.errors import ConditionError, NotPositiveDefiniteError
from gbdt.linalg import frob, herm_power, inv_hpd
from gbdt.params import ParameterTriple, signature_j
from gbdt.sampling import (
    discrete_triple,
    jacobi_sequences,
    random_dims,
    scalar_eigen_triple,
)


def free_data(kmax, h=1):
    """C == I, Q == 0 (free discrete system)."""
    return JacobiData.constant(
        np.eye(h, dtype=complex), np.zeros((h, h), dtype=complex), kmax
    )


def zero_pi_discrete(n=2, h=1):
    return ParameterTriple.make(
        np.eye(n), np.eye(n), np.zeros((n, 2 * h)), variant="discrete"
    )


@pytest.fixture(scope="module")
def seeded_run():
    rng = np.random.default_rng(99)
    triple = discrete_triple(rng, 3, 2)
    data = jacobi_sequences(rng, 2, 51)
    traj = run_recursion(triple, data, 50)
    return traj, transform_jacobi(traj)


@pytest.fixture(scope="module")
def scalar_run():
    triple = scalar_eigen_triple()
    data = free_data(41)
    traj = run_recursion(triple, data, 40)
    return traj, transform_jacobi(traj)


class TestInitialJacobi:
    def test_free_system(self):
        blocks = build_initial_jacobi(free_data(4))
        assert np.allclose(blocks.a, -1j * np.ones((3, 1, 1)), atol=1e-15)
        assert not blocks.b.any()

    def test_scalar_commuting(self):
        q = 0.7
        data = JacobiData.constant(np.eye(1), q * np.eye(1), 3)
        blocks = build_initial_jacobi(data)
        assert np.allclose(blocks.b, q * np.ones((3, 1, 1)), atol=1e-15)

    def test_seeded_b_hermitian(self):
        rng = np.random.default_rng(5)
        data = jacobi_sequences(rng, 3, 6)
        blocks = build_initial_jacobi(data)
        dev = blocks.b - blocks.b.conj().transpose(0, 2, 1)
        assert np.max(np.abs(dev)) < 1e-12
        # c_{k+1} = a_k* by definition
        assert np.array_equal(blocks.c(2), blocks.a[0].conj().T)

    def test_block_formulas(self):
        rng = np.random.default_rng(6)
        data = jacobi_sequences(rng, 2, 3)
        blocks = build_initial_jacobi(data)
        expected = -1j * herm_power(data.C(1), -0.5) @ herm_power(data.C(2), 0.5)
        assert frob(blocks.a[0] - expected) < 1e-14

    def test_commutation_gate(self):
        c = np.eye(2, dtype=complex)[None].repeat(2, axis=0)
        q = np.array([[[0.0, 1.0], [0.0, 0.0]]] * 2, dtype=complex)
        data = JacobiData(c, q)
        assert jacobi_commutation_residual(data) > 1.0
        with pytest.raises(ConditionError, match=r"\(A-3\)"):
            build_initial_jacobi(data)

    def test_non_pd_c_rejected(self):
        data = JacobiData.constant(-np.eye(1), np.zeros((1, 1)), 2)
        with pytest.raises(NotPositiveDefiniteError):
            build_initial_jacobi(data)


class TestTripleValidation:
    def test_examples(self):
        assert validate_discrete_triple(zero_pi_discrete()) == 0.0
        t = ParameterTriple.make(
            np.array([[1j]]), np.eye(1), np.array([[1.0, 1.0]]), "discrete"
        )
        assert validate_discrete_triple(t) == pytest.approx(0.0, abs=1e-15)
        assert validate_discrete_triple(scalar_eigen_triple()) == 0.0


class TestRecursion:
    def test_zero_orbit(self):
        traj = run_recursion(zero_pi_discrete(), free_data(11), 10)
        assert not traj.pi[1:].any()
        assert np.array_equal(traj.s, np.broadcast_to(np.eye(2), traj.s.shape))

    def test_free_xi_is_signature(self):
        data = free_data(3)
        xi = xi_matrix(data, 1)
        assert np.array_equal(xi, signature_j("discrete", 1))
        res = j_algebra_residuals(data, 1)
        assert res["xi_j_unitary"] == 0.0

    def test_j_algebra_exact(self):
        rng = np.random.default_rng(7)
        data = jacobi_sequences(rng, 2, 4)
        res = j_algebra_residuals(data, 2)
        assert res["PjP"] == 0.0
        assert res["jPj"] == 0.0
        assert res["Pxij"] == 0.0

    def test_seeded_identity_chain(self, seeded_run):
        traj, _ = seeded_run
        assert traj.id_residuals.max() <= 1e-10

    def test_monotone_s(self, seeded_run):
        traj, _ = seeded_run
        diffs = traj.s[1:] - traj.s[:-1]
        assert np.min(np.linalg.eigvalsh(diffs)) > -1e-12
        lam0 = np.linalg.eigvalsh(traj.s[0])[0]
        assert np.min(np.linalg.eigvalsh(traj.s)) >= lam0 - 1e-12

    def test_x_psd(self, seeded_run):
        traj, _ = seeded_run
        assert np.min(np.linalg.eigvalsh(traj.x)) > -1e-12

    def test_adjoint_form_spot_check(self, seeded_run):
        traj, _ = seeded_run
        assert j14_residual(traj) < 1e-12


class TestTransform:
    def test_zero_orbit_bit_equal(self):
        data = free_data(11)
        traj = run_recursion(zero_pi_discrete(), data, 10)
        tj = transform_jacobi(traj)
        assert np.array_equal(tj.Ct, data.c)
        assert np.array_equal(tj.Qt, data.q[:10])
        blocks = build_initial_jacobi(data)
        assert np.array_equal(tj.at, blocks.a[:10])
        assert np.array_equal(tj.bt, blocks.b[:10])

    def test_commutation_and_hermiticity(self, seeded_run):
        _, tj = seeded_run
        assert tj.j3_residual <= 1e-10
        assert tj.bt_herm_residual <= 1e-12

    def test_pd_order(self, seeded_run):
        traj, tj = seeded_run
        for k in range(1, traj.nsteps + 2):
            lam_ct = np.linalg.eigvalsh(tj.Ct[k - 1])[0]
            lam_c = np.linalg.eigvalsh(traj.data.C(k))[0]
            assert lam_ct >= lam_c - 1e-12

    def test_block_symmetry(self, seeded_run):
        _, tj = seeded_run
        assert np.array_equal(tj.ct(2), tj.at[0].conj().T)


class TestXiTilde:
    def test_zero_orbit_all_zero(self):
        data = free_data(11)
        traj = run_recursion(zero_pi_discrete(), data, 10)
        tj = transform_jacobi(traj)
        rep = xi_tilde_checks(traj, tj)
        assert rep.j_unitarity == 0.0
        assert rep.forward_identity < 1e-15
        assert not rep.factorization_skipped

    def test_seeded_residuals(self):
        rng = np.random.default_rng(12)
        triple = discrete_triple(rng, 2, 2)
        data = jacobi_sequences(rng, 2, 31)
        traj = run_recursion(triple, data, 30)
        tj = transform_jacobi(traj)
        rep = xi_tilde_checks(traj, tj)
        assert rep.j_unitarity <= 1e-9
        assert rep.cbreve_inverse <= 1e-9
        assert rep.factorization <= 1e-9
        assert rep.forward_identity <= 1e-9

    def test_template_structure(self, seeded_run):
        traj, tj = seeded_run
        for k in (1, 17, 50):
            xt = xi_tilde(traj, tj, k)
            h = traj.h
            assert not xt[h:, h:].any()  # (2,2) block exactly zero
            assert (
                frob(xt[h:, :h] - inv_hpd(tj.Ct[k - 1])) <= 1e-10
            )  # (2,1) block is the inverse of the transformed C
            assert frob(xt - xi_tilde_via_x(traj, k)) < 1e-12

    def test_singular_a_branch(self):
        # A = diag(0, 1) with the first Pi block zeroed keeps the triple
        # valid while det A = 0: the factorization check must be skipped
        # and everything else still verified.
        a = np.diag([0.0, 1.0]).astype(complex)
        triple = ParameterTriple.make(
            a, np.eye(2), np.array([[0.0, 0.3], [0.0, 0.4j]]), "discrete"
        )
        rng = np.random.default_rng(13)
        data = jacobi_sequences(rng, 1, 21)
        traj = run_recursion(triple, data, 20)
        tj = transform_jacobi(traj)
        rep = xi_tilde_checks(traj, tj)
        assert rep.factorization_skipped
        assert rep.factorization is None
        assert "singular" in rep.note
        assert rep.j_unitarity <= 1e-10
        assert rep.cbreve_inverse <= 1e-10
        assert rep.forward_identity <= 1e-10

    def test_breve_w_j_unitary(self, seeded_run):
        traj, _ = seeded_run
        j = signature_j("discrete", traj.h)
        for k in (0, 25, 50):
            w = breve_w(traj, k)
            assert frob(w @ j @ w.conj().T - j) < 1e-12


class TestEigenBlocks:
    def test_zero_orbit(self):
        data = free_data(11)
        traj = run_recursion(zero_pi_discrete(), data, 10)
        tj = transform_jacobi(traj)
        eb = eigen_blocks(traj, tj)
        assert not eb.y.any()
        assert eb.row_residuals.max() == 0.0

    def test_scalar_reference(self, scalar_run):
        traj, tj = scalar_run
        eb = eigen_blocks(traj, tj)
        assert eb.row_residuals.max() <= 1e-10
        # the truncated last row is genuinely not small
        assert eb.truncated_row_residual > 1e-6

    def test_seeded_boundary_runs(self):
        rng = np.random.default_rng(21)
        for _ in range(3):
            n, h = random_dims(rng)
            triple = discrete_triple(rng, n, h, first_block_zero=True)
            data = jacobi_sequences(rng, h, 51)
            traj = run_recursion(triple, data, 50)
            tj = transform_jacobi(traj)
            eb = eigen_blocks(traj, tj)
            assert eb.row_residuals.max() <= 1e-9

    def test_condition_enforced(self, seeded_run):
        traj, tj = seeded_run
        with pytest.raises(ConditionError, match=r"\(J0\)") as exc:
            eigen_blocks(traj, tj)
        assert "relative norm" in str(exc.value)

    def test_residual_scales_with_perturbation(self):
        # Rotating A into the complex plane keeps the boundary condition
        # (first Pi block stays zero) but breaks the generator identity by
        # exactly 2 eps; the eigen-relation residuals must scale linearly.
        triple = scalar_eigen_triple()
        data = free_data(31)

        def worst(eps):
            a = triple.a + 1j * eps
            t = ParameterTriple.make(a, triple.s0, triple.pi0, "discrete")
            traj = run_recursion(t, data, 30, id_tol=1.0)
            tj = transform_jacobi(traj)
            return eigen_blocks(traj, tj).row_residuals.max()

        r6, r4 = worst(1e-6), worst(1e-4)
        assert r4 / r6 == pytest.approx(100.0, rel=0.35)


class TestDiscreteSolution:
    def test_t_zero(self, scalar_run):
        traj, tj = scalar_run
        eb = eigen_blocks(traj, tj)
        psi = discrete_solution(eb, traj.triple.a, [0.0])
        assert np.array_equal(psi[0], eb.y)

    def test_zero_orbit(self):
        data = free_data(11)
        traj = run_recursion(zero_pi_discrete(), data, 10)
        eb = eigen_blocks(traj, transform_jacobi(traj))
        psi = discrete_solution(eb, traj.triple.a, [0.0, 1.0])
        assert not psi.any()

    def test_dynamical_residual(self, scalar_run):
        traj, tj = scalar_run
        eb = eigen_blocks(traj, tj)
        a = traj.triple.a
        res = dynamical_residual(eb, tj, a, [0.1, 1.0, 10.0])
        assert res <= 1e-9 * (1.0 + frob(a))

    def test_semigroup_consistency(self, scalar_run):
        traj, tj = scalar_run
        eb = eigen_blocks(traj, tj)
        a = traj.triple.a
        delta = 1e-3
        from gbdt.linalg import mat_exp

        psi = discrete_solution(eb, a, [1.0, 1.0 + delta])
        stepped = psi[0] @ mat_exp(-1j * delta * a)
        assert np.max(np.abs(psi[1] - stepped)) < 1e-10
