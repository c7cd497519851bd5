"""Exception hierarchy and warning categories shared across the package."""


class GbdtError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(GbdtError, ValueError):
    """Input arrays have incompatible or non-matrix shapes."""


class DomainError(GbdtError, ValueError):
    """Input values outside the mathematical domain (NaN/Inf, bad grids...)."""


class HermitianError(GbdtError, ValueError):
    """A matrix required to be Hermitian deviates beyond tolerance."""


class NotPositiveDefiniteError(GbdtError, ValueError):
    """A matrix required to be positive definite is not.

    Carries ``min_eig``, an estimate of the smallest eigenvalue of the
    offending matrix.
    """

    def __init__(self, message, min_eig=None):
        super().__init__(message)
        self.min_eig = min_eig


class SpectralGuardError(GbdtError, ValueError):
    """A spectral parameter lies too close to the spectrum of A."""


class AccuracyError(GbdtError, RuntimeError):
    """An integration step was too coarse to meet the identity tolerance.

    Carries ``suggested_step``, a step size expected to pass.
    """

    def __init__(self, message, suggested_step=None):
        super().__init__(message)
        self.suggested_step = suggested_step


class ConditionError(GbdtError, ValueError):
    """A named precondition of the transformation is violated.

    ``condition`` is the short condition code used in diagnostics and by
    the CLI, e.g. ``"(bt2)"``, ``"(A-2)"`` or ``"(J0)"``; see README for
    the dictionary of condition codes.
    """

    def __init__(self, condition, detail):
        super().__init__(f"{condition} violated: {detail}")
        self.condition = condition
        self.detail = detail


class ConsistencyError(GbdtError, RuntimeError):
    """An internal invariant that cannot fail on valid inputs failed."""


class FitError(GbdtError, ValueError):
    """Growth-fit input is unusable (nonpositive norms, short span...)."""


class ConditioningWarning(UserWarning):
    """A check passed but the margin is within rounding noise."""
