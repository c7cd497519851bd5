"""Seeded generators of valid inputs for tests, verification and demos.

The generator identity is linear in S0 once A is written as
A = (R/2 + H) S0^{-1} with R the (skew-Hermitian) right-hand side and H
an arbitrary Hermitian matrix, so valid triples can be sampled exactly:
pick Pi0, S0 > 0 and H at random and solve for A. A is then rescaled
(together with Pi0 and H, which preserves the identity exactly) to keep
trajectories tame over the desk-scale windows used by the checks.
"""

import numpy as np

from .params import ParameterTriple, signature_j
from .discrete import JacobiData
from .linalg import inv_hpd

DEFAULT_DIMS_MAX = (4, 3)


def crandn(rng, *shape):
    """Standard complex normal samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_hermitian(rng, n, scale=1.0):
    g = crandn(rng, n, n)
    return scale * 0.5 * (g + g.conj().T)


def random_hpd(rng, n, spread=0.5):
    """Well-conditioned Hermitian positive definite matrix near I."""
    g = crandn(rng, n, n)
    return np.eye(n, dtype=np.complex128) + spread * (g @ g.conj().T) / n


def random_dims(rng, n_max=4, h_max=3):
    return int(rng.integers(1, n_max + 1)), int(rng.integers(1, h_max + 1))


def _scaled_triple(rng, n, h, variant, a_norm, pi_scale, first_block_zero):
    pi0 = pi_scale * crandn(rng, n, 2 * h)
    if first_block_zero:
        pi0[:, :h] = 0.0
    s0 = random_hpd(rng, n)
    hmat = random_hermitian(rng, n, scale=0.5)
    rhs = pi0 @ signature_j(variant, h) @ pi0.conj().T
    if variant == "discrete":
        rhs = 1j * rhs
    a_raw = (0.5 * rhs + hmat) @ inv_hpd(s0)
    norm = float(np.linalg.norm(a_raw, 2))
    scale = min(1.0, a_norm / norm) if norm > 0 else 1.0
    return ParameterTriple.make(
        scale * a_raw, s0, np.sqrt(scale) * pi0, variant=variant
    )


def continuous_triple(rng, n, h, a_norm=0.6, pi_scale=0.5):
    """Random valid continuous triple with ||A||_2 <= a_norm."""
    return _scaled_triple(rng, n, h, "continuous", a_norm, pi_scale, False)


def discrete_triple(rng, n, h, a_norm=0.15, pi_scale=0.3, first_block_zero=False):
    """Random valid discrete triple (optionally satisfying the boundary
    condition: first block column of Pi0 zeroed).

    Default scales keep 50-step recursion orbits within ~1e4 in norm, so
    the propagated identity stays well below its absolute 1e-10 tolerance
    in double precision.
    """
    return _scaled_triple(rng, n, h, "discrete", a_norm, pi_scale, first_block_zero)


def jacobi_sequences(rng, h, kmax, q_scale=0.15, c_spread=0.2):
    """Random commuting Jacobi data: C(k) > 0 near I and Q(k) = M C(k)^{-1}
    with M Hermitian, which is the general solution of the commutation
    identity."""
    c = np.empty((kmax, h, h), dtype=np.complex128)
    q = np.empty((kmax, h, h), dtype=np.complex128)
    for i in range(kmax):
        c[i] = random_hpd(rng, h, spread=c_spread)
        m = random_hermitian(rng, h, scale=q_scale)
        q[i] = m @ inv_hpd(c[i])
    return JacobiData(c, q)


def soliton_triple(kappa):
    """1x1 data whose transformed potential is the -2 kappa^2 sech^2 well.

    The growing branch Pi0 = [-kappa, 1] makes S(x) an exponential-plus-
    constant, so ln S is a shifted cosh and u~ = -2 (ln S)'' collapses to
    the sech^2 profile; S0 keeps the constant part positive.
    """
    kappa = float(kappa)
    a = np.array([[-(kappa**2)]], dtype=np.complex128)
    pi0 = np.array([[-kappa, 1.0]], dtype=np.complex128)
    s0 = np.array([[1.0 + 1.0 / (2.0 * kappa)]], dtype=np.complex128)
    return ParameterTriple.make(a, s0, pi0, variant="continuous")


def decaying_scalar_triple(kappa=1.0):
    """1x1 data on the decaying branch (Pi0 = [kappa, 1]): S saturates and
    X22 -> 0 as x grows."""
    kappa = float(kappa)
    a = np.array([[-(kappa**2)]], dtype=np.complex128)
    pi0 = np.array([[kappa, 1.0]], dtype=np.complex128)
    s0 = np.array([[1.0]], dtype=np.complex128)
    return ParameterTriple.make(a, s0, pi0, variant="continuous")


def growth_scalar_triple():
    """n=1 triple with A = i (pure e^t norm growth)."""
    a = np.array([[1j]], dtype=np.complex128)
    pi0 = np.array([[1j, 1.0]], dtype=np.complex128)
    s0 = np.array([[1.0]], dtype=np.complex128)
    return ParameterTriple.make(a, s0, pi0, variant="continuous")


def jordan_block_triple():
    """n=2 triple whose A is a single nilpotent Jordan block (tau=0, r=1)."""
    a = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)
    s0 = np.eye(2, dtype=np.complex128)
    pi0 = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=np.complex128)
    return ParameterTriple.make(a, s0, pi0, variant="continuous")


def hermitian_scalar_triple():
    """n=1 triple with real A (bounded norms: tau = 0, r = 0)."""
    a = np.array([[0.7]], dtype=np.complex128)
    pi0 = np.array([[0.8, 1.1]], dtype=np.complex128)
    s0 = np.array([[1.0]], dtype=np.complex128)
    return ParameterTriple.make(a, s0, pi0, variant="continuous")


def scalar_eigen_triple():
    """The boundary-condition reference case: A = 2, S0 = 1, Pi0 = [0, 1]."""
    a = np.array([[2.0]], dtype=np.complex128)
    s0 = np.array([[1.0]], dtype=np.complex128)
    pi0 = np.array([[0.0, 1.0]], dtype=np.complex128)
    return ParameterTriple.make(a, s0, pi0, variant="discrete")


def random_g(rng, n):
    """Generic solution direction g in C^n."""
    return crandn(rng, n)
