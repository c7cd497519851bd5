"""Jordan-structure-driven long-time growth of solution norms.

The time dependence of the explicit solutions enters only through
e^{-i t A}. With A = U J U^{-1} in Jordan form, J = diag{lambda_i I + K_i},
the L2 norm of a generic solution column grows like

    ||psi(., t) g|| ~ C e^{tau t} |t|^r,   t -> +/- inf,

with tau the extreme imaginary part of the eigenvalues and r the largest
nilpotent order among the blocks attaining it. This module computes the
exact exponents from declared (or computed) Jordan data, evaluates
e^{-i t A} through that structure, and fits the exponents empirically
from norm samples produced by the evolution pipeline.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, FitError
from .linalg import frob, mat_exp, require_square
from .quadrature import simpson

__all__ = [
    "JORDAN_TOL",
    "JordanSpectrum",
    "GrowthExponents",
    "FitResult",
    "jordan_matrix",
    "jordan_residual",
    "growth_exponents",
    "exp_profile",
    "fit_times",
    "norm_growth_samples",
    "empirical_growth_fit",
]

#: Relative tolerance for || A - U J U^{-1} || when U is declared.
JORDAN_TOL = 1e-8

#: Eigenvalue clustering tolerance for computed spectra.
CLUSTER_TOL = 1e-8


@dataclass(frozen=True)
class JordanSpectrum:
    """Jordan data {(lambda_i, n_i)} of A, optionally with the similarity U.

    Numerical Jordan forms are ill-posed, so defective structure must be
    user-declared; ``from_matrix`` only handles the diagonalizable case.
    """

    blocks: tuple  # ((lambda, size), ...)
    u: np.ndarray | None = None
    source: str = "declared"

    @classmethod
    def declared(cls, blocks, u=None):
        blocks = tuple((complex(lam), int(size)) for lam, size in blocks)
        if not blocks:
            raise DomainError("spectrum must contain at least one block")
        if any(size < 1 for _, size in blocks):
            raise DomainError("Jordan block sizes must be >= 1")
        if u is not None:
            u = require_square(u, "U")
            if u.shape[0] != sum(size for _, size in blocks):
                raise DimensionError("U size must match the sum of block sizes")
        return cls(blocks=blocks, u=u, source="declared")

    @classmethod
    def from_matrix(cls, a, tol=JORDAN_TOL):
        """Eigen-decompose a diagonalizable A (size-1 blocks).

        Raises :class:`DomainError` when A is numerically defective; in
        that case the Jordan structure must be declared by the caller.
        """
        a = require_square(a, "A")
        w, v = np.linalg.eig(a)
        res = frob(a @ v - v * w)
        if np.linalg.cond(v) > 1.0 / max(tol, 1e-15) or res > tol * (1.0 + frob(a)):
            raise DomainError(
                "A appears defective or severely non-normal; declare its "
                "Jordan structure explicitly"
            )
        blocks = tuple((complex(lam), 1) for lam in w)
        return cls(blocks=blocks, u=v, source="computed")

    @property
    def n(self):
        return sum(size for _, size in self.blocks)


def jordan_matrix(blocks):
    """Assemble J = diag{lambda_i I + K_i} from block data."""
    n = sum(size for _, size in blocks)
    j = np.zeros((n, n), dtype=np.complex128)
    pos = 0
    for lam, size in blocks:
        j[pos : pos + size, pos : pos + size] = lam * np.eye(size) + np.diag(
            np.ones(size - 1), 1
        )
        pos += size
    return j


def jordan_residual(a, spec):
    """|| A - U J U^{-1} || for a declared spectrum with U present."""
    if spec.u is None:
        raise DomainError("spectrum has no similarity matrix U")
    j = jordan_matrix(spec.blocks)
    return frob(a - spec.u @ j @ np.linalg.inv(spec.u))


@dataclass(frozen=True)
class GrowthExponents:
    """Generic growth data: ||psi(., t) g|| ~ C e^{tau t} |t|^r."""

    tau_plus: float
    tau_minus: float
    r_plus: int
    r_minus: int


def growth_exponents(spec):
    """Exponents from the Jordan data.

    tau+ / tau- are the extreme imaginary parts; r is the maximum of
    (n_i - 1) over the blocks attaining the extreme. Declared spectra are
    compared exactly; computed ones within the clustering tolerance.
    """
    if not spec.blocks:
        raise DomainError("spectrum must contain at least one block")
    ims = np.array([lam.imag for lam, _ in spec.blocks])
    sizes = np.array([size for _, size in spec.blocks])
    tie = 0.0 if spec.source == "declared" else CLUSTER_TOL * (1.0 + np.abs(ims).max())
    tau_plus = float(ims.max())
    tau_minus = float(ims.min())
    r_plus = int((sizes[ims >= tau_plus - tie] - 1).max())
    r_minus = int((sizes[ims <= tau_minus + tie] - 1).max())
    return GrowthExponents(
        tau_plus=tau_plus, tau_minus=tau_minus, r_plus=r_plus, r_minus=r_minus
    )


def exp_profile(spec, t):
    """e^{-i t A} assembled block by block from the Jordan structure.

    Each block contributes e^{-i lambda t} times the terminating series
    sum_k (-i t K)^k / k!. The similarity U must be available (declare
    U = I when A is the Jordan matrix itself).
    """
    if spec.u is None:
        raise DomainError(
            "spectrum has no similarity matrix U; declare one (U = I when "
            "A is the Jordan matrix itself)"
        )
    t = float(t)
    n = spec.n
    d = np.zeros((n, n), dtype=np.complex128)
    pos = 0
    for lam, size in spec.blocks:
        phase = np.exp(-1j * lam * t)
        coeff = 1.0 + 0.0j
        for k in range(size):
            idx = np.arange(size - k)
            d[pos + idx, pos + idx + k] = phase * coeff
            coeff *= -1j * t / (k + 1)
        pos += size
    if spec.u is None:
        return d
    return spec.u @ d @ np.linalg.inv(spec.u)


def fit_times(tau, num=24, t_max_cap=1e4):
    """Log-spaced fit window per the growth rate.

    For tau = 0 the window is [1e2, 1e4] (polynomial-order estimation
    needs long times); for tau != 0 it is shortened so the squared norms
    stay within the e^{+-700} floating-point range.
    """
    if num < 20:
        raise DomainError("need at least 20 samples for the fit")
    if tau == 0.0:
        t_max = t_max_cap
    else:
        t_max = min(t_max_cap, 300.0 / abs(tau))
    t_min = t_max / 100.0
    return np.geomspace(t_min, t_max, num)


def norm_growth_samples(state, g, ts, spectrum=None):
    """L2-norm samples ||psi(., t) g|| over [0, L] for the fit.

    The squared norm is g* e^{itA*} (int_0^L z2* z2 dx) e^{-itA} g with the
    integral evaluated by the same composite-Simpson rule as the L2
    identity; the quadratic form is factored out of the quadrature by
    linearity. e^{-i t A} comes from the Jordan profile when a spectrum
    is supplied, and from the dense exponential otherwise.
    """
    from .continuous import z_blocks

    _, z2 = z_blocks(state)
    gram = simpson(z2.conj().transpose(0, 2, 1) @ z2, state.dx)
    g = np.asarray(g, dtype=np.complex128).reshape(-1)
    if g.size != state.n:
        raise DimensionError(f"g must have length n={state.n}")
    a = state.triple.a
    out = np.empty(len(ts))
    for i, t in enumerate(ts):
        e = exp_profile(spectrum, t) if spectrum is not None else mat_exp(-1j * t * a)
        v = e @ g
        out[i] = math.sqrt(max(float((v.conj() @ gram @ v).real), 0.0))
    return out


@dataclass(frozen=True)
class FitResult:
    """Least-squares estimates of log||.|| ~ log C + tau t + r log t."""

    tau: float
    r: float
    log_c: float
    residual: float

    @property
    def c(self):
        return math.exp(self.log_c)


def empirical_growth_fit(ts, norms):
    """Fit (tau, r, C) from norm samples on a positive time window.

    Requires at least 20 samples spanning two decades and strictly
    positive norms (the degenerate zero solution is reported as an error,
    not fitted).
    """
    ts = np.asarray(ts, dtype=np.float64)
    norms = np.asarray(norms, dtype=np.float64)
    if ts.ndim != 1 or ts.shape != norms.shape:
        raise DimensionError("ts and norms must be 1-D arrays of equal length")
    if ts.size < 20:
        raise FitError(f"need at least 20 samples, got {ts.size}")
    if np.any(ts <= 0.0):
        raise FitError("fit window must be strictly positive in t")
    if ts.max() < 100.0 * ts.min() * (1.0 - 1e-9):
        raise FitError("fit window must span at least two decades")
    if np.any(norms <= 0.0) or not np.all(np.isfinite(norms)):
        raise FitError("norm samples must be finite and positive")
    target = np.log(norms)
    design = np.column_stack([np.ones_like(ts), ts, np.log(ts)])
    coeff, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coeff - target) ** 2)))
    return FitResult(
        tau=float(coeff[1]), r=float(coeff[2]), log_c=float(coeff[0]), residual=resid
    )
