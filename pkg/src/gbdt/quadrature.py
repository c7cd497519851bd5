"""Composite-Simpson quadrature on uniform grids, for array-valued samples."""

import numpy as np

from .errors import DomainError

#: Relative spacing deviation accepted as "uniform".
UNIFORM_TOL = 1e-9


def require_uniform(xs, name="grid"):
    """Validate a strictly increasing uniform grid; return its spacing."""
    x = np.asarray(xs, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise DomainError(f"{name}: need a 1-D grid with at least 2 samples")
    steps = np.diff(x)
    if np.any(steps <= 0.0):
        raise DomainError(f"{name}: samples must be strictly increasing")
    dx = float(steps[0])
    if np.max(np.abs(steps - dx)) > UNIFORM_TOL * max(dx, 1.0):
        raise DomainError(f"{name}: samples must be uniformly spaced")
    return dx


def cumulative_simpson(y, dx):
    """Cumulative integral of uniformly sampled values, 4th order.

    Each pair of intervals is integrated by the parabola through its three
    samples, split into per-interval increments, so the running integral is
    available at every node. A trailing odd interval uses the parabola
    through the last three samples.

    Parameters
    ----------
    y : array, shape (N, ...)
        Samples along the leading axis; trailing axes ride along.
    dx : float
        Grid spacing.

    Returns
    -------
    array, shape (N, ...)
        Running integral; entry 0 is zero.
    """
    y = np.asarray(y)
    n = y.shape[0]
    out = np.zeros_like(y, dtype=np.result_type(y.dtype, np.float64))
    if n == 1:
        return out
    if n == 2:
        out[1] = 0.5 * dx * (y[0] + y[1])
        return out

    inc = np.empty_like(out[:-1])
    # Interval starting at even j: first half of the parabola (j, j+1, j+2).
    f0, f1, f2 = y[0:-2:2], y[1:-1:2], y[2::2]
    inc[0:-1:2] = (dx / 12.0) * (5.0 * f0 + 8.0 * f1 - f2)
    # Interval starting at odd j: second half of the parabola (j-1, j, j+1).
    g0, g1, g2 = y[0:-2:2], y[1:-1:2], y[2::2]
    inc[1::2] = (dx / 12.0) * (-g0 + 8.0 * g1 + 5.0 * g2)
    if n % 2 == 0:
        # Odd interval count: close with the parabola through the last three.
        inc[-1] = (dx / 12.0) * (-y[-3] + 8.0 * y[-2] + 5.0 * y[-1])
    np.cumsum(inc, axis=0, out=out[1:])
    return out


def simpson(y, dx):
    """Definite integral over the whole grid (see cumulative_simpson)."""
    return cumulative_simpson(y, dx)[-1]
