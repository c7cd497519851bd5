"""Numba-jitted inner loops for the continuous-variable evolution.

Kept separate so the jit cache warms once per process; everything here is
reachable only through :mod:`gbdt.continuous`.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _u_at(x, ug, uv):
    """Piecewise-linear interpolation of tabulated potential samples."""
    m = ug.shape[0]
    if x <= ug[0]:
        return uv[0].copy()
    if x >= ug[m - 1]:
        return uv[m - 1].copy()
    hi = np.searchsorted(ug, x)
    lo = hi - 1
    w = (x - ug[lo]) / (ug[hi] - ug[lo])
    return (1.0 - w) * uv[lo] + w * uv[hi]


@njit(cache=True)
def _rhs(a, has_u, ug, uv, x, phi1, phi2):
    """Derivatives of (Phi1, Phi2, S):
    Phi1' = A Phi2 - Phi2 u,  Phi2' = -Phi1,  S' = Phi2 Phi2*.
    """
    d1 = a @ phi2
    if has_u:
        d1 = d1 - phi2 @ _u_at(x, ug, uv)
    d2 = -phi1
    ds = phi2 @ np.conj(phi2.T)
    return d1, d2, ds


@njit(cache=True)
def rk4_sweep(a, phi1_0, phi2_0, s0, xs, substep, has_u, ug, uv):
    """Classical fixed-step RK4 sweep storing the state at every grid node.

    Each grid interval is covered by ceil(|dx| / substep) equal RK4
    steps, so the nodes are hit exactly. Negative spans (single-interval
    backward refinement) are supported.
    """
    nsamp = xs.shape[0]
    n = a.shape[0]
    h = phi1_0.shape[1]
    out1 = np.empty((nsamp, n, h), dtype=np.complex128)
    out2 = np.empty((nsamp, n, h), dtype=np.complex128)
    outs = np.empty((nsamp, n, n), dtype=np.complex128)
    p1 = phi1_0.copy()
    p2 = phi2_0.copy()
    s = s0.copy()
    out1[0] = p1
    out2[0] = p2
    outs[0] = s
    for jseg in range(nsamp - 1):
        x0 = xs[jseg]
        span = xs[jseg + 1] - x0
        m = int(np.ceil(abs(span) / substep - 1e-12))
        if m < 1:
            m = 1
        dt = span / m
        for i in range(m):
            x = x0 + i * dt
            k11, k12, k1s = _rhs(a, has_u, ug, uv, x, p1, p2)
            k21, k22, k2s = _rhs(
                a, has_u, ug, uv, x + 0.5 * dt,
                p1 + (0.5 * dt) * k11, p2 + (0.5 * dt) * k12,
            )
            k31, k32, k3s = _rhs(
                a, has_u, ug, uv, x + 0.5 * dt,
                p1 + (0.5 * dt) * k21, p2 + (0.5 * dt) * k22,
            )
            k41, k42, k4s = _rhs(
                a, has_u, ug, uv, x + dt,
                p1 + dt * k31, p2 + dt * k32,
            )
            p1 = p1 + (dt / 6.0) * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
            p2 = p2 + (dt / 6.0) * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
            s = s + (dt / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        out1[jseg + 1] = p1
        out2[jseg + 1] = p2
        outs[jseg + 1] = s
    return out1, out2, outs


@njit(cache=True)
def propagate_powers(step, w0, nsamp):
    """out[k] = step^k @ w0 for k = 0..nsamp-1 (sequential products)."""
    m, h = w0.shape
    out = np.empty((nsamp, m, h), dtype=np.complex128)
    w = w0.copy()
    out[0] = w
    for k in range(1, nsamp):
        w = step @ w
        out[k] = w
    return out
