"""Dense complex matrix primitives used throughout the package.

All matrices are plain ``numpy`` arrays of ``complex128``. Hermitian
inputs are accepted up to a relative asymmetry of ``HERMITIAN_TOL`` and
symmetrized on entry; larger asymmetry is treated as a caller error so
that integration drift never masquerades as user input.
"""

import warnings

import numpy as np
import scipy.linalg

from .errors import (
    ConditioningWarning,
    DimensionError,
    DomainError,
    HermitianError,
    NotPositiveDefiniteError,
)

#: Relative asymmetry below which a matrix counts as Hermitian.
HERMITIAN_TOL = 1e-10

#: ``is_posdef`` warns when the smallest eigenvalue is below this (relative).
CONDITIONING_TOL = 1e-12


def as_cmatrix(m, name="matrix"):
    """Coerce to a finite complex 2-D array (copying only if needed)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"{name}: expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name}: entries must be finite")
    return a


def require_square(m, name="matrix"):
    a = as_cmatrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name}: expected square, got shape {a.shape}")
    return a


def frob(m):
    """Frobenius norm."""
    return float(np.linalg.norm(m))


def require_hermitian(m, tol=HERMITIAN_TOL, name="matrix"):
    """Validate Hermitian symmetry and return the symmetrized matrix.

    Asymmetry up to ``tol * (1 + ||M||)`` is absorbed by replacing M with
    (M + M*)/2; anything larger raises :class:`HermitianError`.
    """
    a = require_square(m, name)
    dev = frob(a - a.conj().T)
    if dev > tol * (1.0 + frob(a)):
        raise HermitianError(
            f"{name}: asymmetry {dev:.3e} exceeds tolerance "
            f"{tol * (1.0 + frob(a)):.3e}"
        )
    return 0.5 * (a + a.conj().T)


def mat_exp(m):
    """Matrix exponential e^M by scaling-and-squaring (Pade kernel).

    Backed by ``scipy.linalg.expm``; accurate to ~1e-12 relative for
    ||M|| up to 1e3, which covers every use in this package (large-time
    propagators included).
    """
    a = require_square(m, "mat_exp")
    return np.asarray(scipy.linalg.expm(a), dtype=np.complex128)


def is_posdef(m, name="matrix"):
    """Test positive definiteness of a Hermitian matrix.

    Returns
    -------
    (ok, min_eig) : (bool, float)
        ``ok`` is True iff a Cholesky factorization with strictly
        positive pivots exists; ``min_eig`` is the smallest-eigenvalue
        estimate. Emits :class:`ConditioningWarning` when ``ok`` holds
        with a margin inside rounding noise.
    """
    a = require_hermitian(m, name=name)
    min_eig = float(np.linalg.eigvalsh(a)[0])
    try:
        np.linalg.cholesky(a)
        ok = True
    except np.linalg.LinAlgError:
        ok = False
    if ok and min_eig < CONDITIONING_TOL * (1.0 + frob(a)):
        warnings.warn(
            f"{name}: positive definite but smallest eigenvalue "
            f"{min_eig:.3e} is within rounding noise",
            ConditioningWarning,
            stacklevel=2,
        )
    return ok, min_eig


def solve_hpd(s, b, name="matrix"):
    """Solve S X = B for Hermitian positive definite S via Cholesky."""
    a = require_hermitian(s, name=name)
    rhs = np.asarray(b, dtype=np.complex128)
    if rhs.shape[0] != a.shape[0]:
        raise DimensionError(
            f"solve_hpd: rhs has {rhs.shape[0]} rows, S is {a.shape[0]}x{a.shape[0]}"
        )
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        min_eig = float(np.linalg.eigvalsh(a)[0])
        raise NotPositiveDefiniteError(
            f"{name}: not positive definite (min eigenvalue ~ {min_eig:.3e})",
            min_eig=min_eig,
        ) from exc
    return scipy.linalg.cho_solve(factor, rhs, check_finite=False)


def inv_hpd(s, name="matrix"):
    """Inverse of a Hermitian positive definite matrix."""
    a = require_hermitian(s, name=name)
    out = solve_hpd(a, np.eye(a.shape[0], dtype=np.complex128), name=name)
    return 0.5 * (out + out.conj().T)


def herm_power(m, exponent, name="matrix"):
    """Principal power M^exponent of a Hermitian positive definite matrix.

    Uses a full eigendecomposition (matrices here are small, and the
    principal branch must be deterministic). Negative and fractional
    exponents require all eigenvalues strictly positive.
    """
    a = require_hermitian(m, name=name)
    w, v = np.linalg.eigh(a)
    if w[0] <= 0.0:
        raise NotPositiveDefiniteError(
            f"{name}: not positive definite (min eigenvalue ~ {w[0]:.3e})",
            min_eig=float(w[0]),
        )
    out = (v * np.power(w, exponent)) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def herm_sqrt(m, name="matrix"):
    """Principal (positive definite) square root of a Hermitian PD matrix."""
    return herm_power(m, 0.5, name=name)
