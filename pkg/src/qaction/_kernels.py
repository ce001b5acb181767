"""Compiled inner loops for the 2-D Hamiltonian flow (quartic family).

States are (x, y, px, py) with xdot = px/m, pdot = -grad V. Status codes:
0 ok, 1 too few crossings, 2 overflow.
"""

import numpy as np
from numba import njit

OVERFLOW_LIMIT = 1e12


@njit(cache=True)
def _accel(x, y, m, v2, v22, v4):
    fx = -(2.0 * v2 * x + 2.0 * v22 * x * y * y + 4.0 * v4 * x * x * x)
    fy = -(2.0 * v2 * y + 2.0 * v22 * x * x * y + 4.0 * v4 * y * y * y)
    return fx, fy


@njit(cache=True)
def _rk4_step(x, y, px, py, dt, m, v2, v22, v4):
    fx1, fy1 = _accel(x, y, m, v2, v22, v4)
    k1x, k1y, k1px, k1py = px / m, py / m, fx1, fy1

    x2, y2 = x + 0.5 * dt * k1x, y + 0.5 * dt * k1y
    px2, py2 = px + 0.5 * dt * k1px, py + 0.5 * dt * k1py
    fx2, fy2 = _accel(x2, y2, m, v2, v22, v4)
    k2x, k2y, k2px, k2py = px2 / m, py2 / m, fx2, fy2

    x3, y3 = x + 0.5 * dt * k2x, y + 0.5 * dt * k2y
    px3, py3 = px + 0.5 * dt * k2px, py + 0.5 * dt * k2py
    fx3, fy3 = _accel(x3, y3, m, v2, v22, v4)
    k3x, k3y, k3px, k3py = px3 / m, py3 / m, fx3, fy3

    x4, y4 = x + dt * k3x, y + dt * k3y
    px4, py4 = px + dt * k3px, py + dt * k3py
    fx4, fy4 = _accel(x4, y4, m, v2, v22, v4)
    k4x, k4y, k4px, k4py = px4 / m, py4 / m, fx4, fy4

    c = dt / 6.0
    return (x + c * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            y + c * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
            px + c * (k1px + 2.0 * k2px + 2.0 * k3px + k4px),
            py + c * (k1py + 2.0 * k2py + 2.0 * k3py + k4py))


@njit(cache=True)
def _in_range(x, y, px, py):
    return (abs(x) <= OVERFLOW_LIMIT and abs(y) <= OVERFLOW_LIMIT
            and abs(px) <= OVERFLOW_LIMIT and abs(py) <= OVERFLOW_LIMIT)


@njit(cache=True)
def integrate_series(state0, dt, n_steps, m, v2, v22, v4):
    """Record the full RK4 time series; returns (series, status)."""
    out = np.empty((n_steps + 1, 4))
    x, y, px, py = state0[0], state0[1], state0[2], state0[3]
    out[0, 0], out[0, 1], out[0, 2], out[0, 3] = x, y, px, py
    for i in range(n_steps):
        x, y, px, py = _rk4_step(x, y, px, py, dt, m, v2, v22, v4)
        if not _in_range(x, y, px, py):
            return out[: i + 1], 2
        out[i + 1, 0], out[i + 1, 1], out[i + 1, 2], out[i + 1, 3] = x, y, px, py
    return out, 0


@njit(cache=True)
def _henon_refine(x, y, px, py, m, v2, v22, v4):
    """One RK4 step with y as the independent variable, of size -y: lands
    the state exactly on the section plane y = 0."""
    dy = -y

    # derivatives with respect to y: d(x,px,py)/dy = (px/py, m fx/py, m fy/py)
    fx1, fy1 = _accel(x, y, m, v2, v22, v4)
    k1x, k1px, k1py = px / py, m * fx1 / py, m * fy1 / py

    xa, ya = x + 0.5 * dy * k1x, y + 0.5 * dy
    pxa, pya = px + 0.5 * dy * k1px, py + 0.5 * dy * k1py
    fx2, fy2 = _accel(xa, ya, m, v2, v22, v4)
    k2x, k2px, k2py = pxa / pya, m * fx2 / pya, m * fy2 / pya

    xb, yb = x + 0.5 * dy * k2x, y + 0.5 * dy
    pxb, pyb = px + 0.5 * dy * k2px, py + 0.5 * dy * k2py
    fx3, fy3 = _accel(xb, yb, m, v2, v22, v4)
    k3x, k3px, k3py = pxb / pyb, m * fx3 / pyb, m * fy3 / pyb

    xc, yc = x + dy * k3x, y + dy
    pxc, pyc = px + dy * k3px, py + dy * k3py
    fx4, fy4 = _accel(xc, yc, m, v2, v22, v4)
    k4x, k4px, k4py = pxc / pyc, m * fx4 / pyc, m * fy4 / pyc

    c = dy / 6.0
    return (x + c * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            px + c * (k1px + 2.0 * k2px + 2.0 * k3px + k4px),
            py + c * (k1py + 2.0 * k2py + 2.0 * k3py + k4py))


@njit(cache=True)
def poincare_crossings(state0, dt, max_steps, n_crossings, e_target,
                       m, v0, v2, v22, v4):
    """Upward (py > 0) crossings of y = 0, Henon-refined onto the plane.

    Returns (crossings[n, 2] of (x, px), n_found, max_energy_error, status).
    """
    out = np.empty((n_crossings, 2))
    x, y, px, py = state0[0], state0[1], state0[2], state0[3]
    found = 0
    max_err = 0.0
    for _ in range(max_steps):
        y_old = y
        x, y, px, py = _rk4_step(x, y, px, py, dt, m, v2, v22, v4)
        if not _in_range(x, y, px, py):
            return out[:found], found, max_err, 2
        if y_old < 0.0 and y >= 0.0 and py > 0.0 and abs(py) > 1e-12:
            xr, pxr, pyr = _henon_refine(x, y, px, py, m, v2, v22, v4)
            out[found, 0] = xr
            out[found, 1] = pxr
            e = (pxr * pxr + pyr * pyr) / (2.0 * m) + (
                v0 + v2 * xr * xr + v4 * xr**4)
            err = abs(e - e_target) / max(abs(e_target), 1.0)
            if err > max_err:
                max_err = err
            found += 1
            if found == n_crossings:
                return out, found, max_err, 0
    return out[:found], found, max_err, (0 if found >= 2 else 1)


@njit(cache=True)
def lyapunov_history(state0, d0, dt, renorm_steps, n_epochs, m, v2, v22, v4):
    """Benettin two-trajectory estimate: running lambda per renormalization
    epoch. Returns (history, status)."""
    hist = np.empty(n_epochs)
    x, y, px, py = state0[0], state0[1], state0[2], state0[3]
    x2, y2, px2, py2 = x + d0, y, px, py
    acc = 0.0
    for e in range(n_epochs):
        for _ in range(renorm_steps):
            x, y, px, py = _rk4_step(x, y, px, py, dt, m, v2, v22, v4)
            x2, y2, px2, py2 = _rk4_step(x2, y2, px2, py2, dt, m, v2, v22, v4)
        if not _in_range(x, y, px, py) or not _in_range(x2, y2, px2, py2):
            return hist[:e], 2
        dx, dy_, dpx, dpy = x2 - x, y2 - y, px2 - px, py2 - py
        d = np.sqrt(dx * dx + dy_ * dy_ + dpx * dpx + dpy * dpy)
        if d <= 0.0:
            d = 1e-300
        acc += np.log(d / d0)
        hist[e] = acc / ((e + 1) * renorm_steps * dt)
        scale = d0 / d
        x2, y2, px2, py2 = x + dx * scale, y + dy_ * scale, px + dpx * scale, py + dpy * scale
    return hist, 0
