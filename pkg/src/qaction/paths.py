"""Euclidean boundary-value problem: the minimizing trajectory between fixed
endpoints and the discretized action along it.

The discrete action on N uniform slices of width h_t = T/N is

    S = sum_k  m |x_{k+1} - x_k|^2 / (2 h_t)  +  h_t (V(x_k) + V(x_{k+1})) / 2,

whose stationarity condition is the discrete Euler-Lagrange system
(m/h_t^2)(x_{k+1} - 2 x_k + x_{k-1}) = grad V(x_k) (motion in the inverted
potential). Solved by damped Newton with a (block-)tridiagonal Jacobian;
minimality is certified by Cholesky positivity of the second-variation
operator, and failure of that test is reported as ConjugatePoint.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cholesky_banded, solve_banded

from .errors import ConjugatePoint, NoConvergence
from .model import ActionSpec

# Residual tolerance: relative part plus the float64 noise floor of the
# second-difference operator (scale m/h_t^2).
GRAD_TOL = 1e-10
_NOISE_C = 100.0


@dataclass
class TrajectoryBV:
    """Discretized path with fixed endpoints at uniform times k T / N."""

    action: ActionSpec
    duration: float
    times: np.ndarray
    positions: np.ndarray  # (N+1,) in 1-D, (N+1, 2) in 2-D

    @property
    def n_slices(self) -> int:
        return len(self.times) - 1

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            if self.positions.ndim == 1:
                writer.writerow(["t", "x"])
                for t, x in zip(self.times, self.positions):
                    writer.writerow([repr(float(t)), repr(float(x))])
            else:
                writer.writerow(["t", "x", "y"])
                for t, (x, y) in zip(self.times, self.positions):
                    writer.writerow([repr(float(t)), repr(float(x)), repr(float(y))])


def _pot_value(action, pos):
    if pos.ndim == 1:
        return action.potential.value(pos)
    return action.potential.value(pos[:, 0], pos[:, 1])


def _pot_grad(action, pos):
    if pos.ndim == 1:
        return action.potential.gradient(pos)
    gx, gy = action.potential.gradient(pos[:, 0], pos[:, 1])
    return np.stack([gx, gy], axis=1)


def euclidean_action(action: ActionSpec, trajectory: TrajectoryBV) -> float:
    """Trapezoidal Euclidean action of a trajectory (second order in 1/N)."""
    return _action_value(action, trajectory.positions,
                         trajectory.duration / trajectory.n_slices)


def _action_value(action, pos, ht):
    d = np.diff(pos, axis=0)
    kinetic = 0.5 * action.mass * np.sum(d * d) / ht
    V = _pot_value(action, pos)
    potential = ht * (np.sum(V) - 0.5 * (V[0] + V[-1]))
    return float(kinetic + potential)


def _residual(action, pos, ht):
    """Discrete Euler-Lagrange residual on interior slices."""
    second = (pos[2:] - 2.0 * pos[1:-1] + pos[:-2]) * (action.mass / ht**2)
    return second - _pot_grad(action, pos[1:-1])


def _residual_tol(action, pos, ht):
    grad_scale = np.abs(_pot_grad(action, pos)).max()
    floor = _NOISE_C * np.finfo(float).eps * (action.mass / ht**2) * max(1.0, np.abs(pos).max())
    return max(GRAD_TOL * max(1.0, grad_scale), floor)


def _newton_band(action, pos, ht):
    """Banded Jacobian of the residual w.r.t. interior positions."""
    n_int = pos.shape[0] - 2
    m_h2 = action.mass / ht**2
    if pos.ndim == 1:
        ab = np.zeros((3, n_int))
        ab[0, 1:] = m_h2
        ab[1] = -2.0 * m_h2 - action.potential.curvature(pos[1:-1])
        ab[2, :-1] = m_h2
        return (1, 1), ab
    # 2-D: interleave (x_k, y_k); bandwidth 2 with 2x2 diagonal blocks
    vxx, vxy, vyy = action.potential.hessian(pos[1:-1, 0], pos[1:-1, 1])
    size = 2 * n_int
    ab = np.zeros((5, size))
    ab[2, 0::2] = -2.0 * m_h2 - vxx
    ab[2, 1::2] = -2.0 * m_h2 - vyy
    ab[1, 1::2] = -vxy          # (x_k, y_k) entry
    ab[3, 0:-1:2] = -vxy        # (y_k, x_k) entry
    ab[0, 2:] = m_h2            # coupling to slice k+1
    ab[4, :-2] = m_h2
    return (2, 2), ab


def _second_variation_band(action, pos, ht):
    """Upper banded storage of the action Hessian (for cholesky_banded)."""
    n_int = pos.shape[0] - 2
    m_h = action.mass / ht
    if pos.ndim == 1:
        ab = np.zeros((2, n_int))
        ab[1] = 2.0 * m_h + ht * action.potential.curvature(pos[1:-1])
        ab[0, 1:] = -m_h
        return ab
    vxx, vxy, vyy = action.potential.hessian(pos[1:-1, 0], pos[1:-1, 1])
    size = 2 * n_int
    ab = np.zeros((3, size))
    ab[2, 0::2] = 2.0 * m_h + ht * vxx
    ab[2, 1::2] = 2.0 * m_h + ht * vyy
    ab[1, 1::2] = ht * vxy
    ab[0, 2:] = -m_h
    return ab


def _is_minimum(action, pos, ht) -> bool:
    try:
        cholesky_banded(_second_variation_band(action, pos, ht))
        return True
    except LinAlgError:
        return False


def _newton(action, pos, ht, T, max_iter):
    """Damped Newton from a given initial path; returns (path, action, ok)."""
    S = _action_value(action, pos, ht)
    F = _residual(action, pos, ht)
    res = np.abs(F).max() if F.size else 0.0
    for _ in range(max_iter):
        if res <= _residual_tol(action, pos, ht):
            return pos, S, True
        bands, ab = _newton_band(action, pos, ht)
        step = solve_banded(bands, ab, -F.reshape(-1))
        step = step.reshape(F.shape)
        lam, accepted = 1.0, False
        while lam >= 1e-6:
            cand = pos.copy()
            cand[1:-1] += lam * step
            S_new = _action_value(action, cand, ht)
            F_new = _residual(action, cand, ht)
            res_new = np.abs(F_new).max()
            # accept on action non-increase (up to roundoff) or residual halving
            if S_new <= S + 1e-12 * max(1.0, abs(S)) or res_new < 0.5 * res:
                pos, S, F, res = cand, S_new, F_new, res_new
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            break
        if np.abs(lam * step).max() < 1e-13 * max(1.0, np.abs(pos).max()):
            break
    ok = res <= _residual_tol(action, pos, ht)
    return pos, S, ok


def _straight_line(x_in, x_fi, N):
    x_in = np.atleast_1d(np.asarray(x_in, dtype=float))
    x_fi = np.atleast_1d(np.asarray(x_fi, dtype=float))
    frac = np.linspace(0.0, 1.0, N + 1)
    pos = x_in[None, :] + frac[:, None] * (x_fi - x_in)[None, :]
    pos[0] = x_in
    pos[-1] = x_fi  # endpoints exact, not reconstructed
    return pos[:, 0] if len(x_in) == 1 else pos


def _bump_guesses(action, x_in, x_fi, N):
    """Sine bumps toward the potential wells, for double-well branch search."""
    pot = action.potential
    guesses = []
    if getattr(pot, "v2", 0.0) < 0 and getattr(pot, "v4", 0.0) > 0:
        base = _straight_line(x_in, x_fi, N)
        bump = np.sin(np.pi * np.linspace(0.0, 1.0, N + 1))
        if base.ndim == 1:
            x_m = math.sqrt(-pot.v2 / (2.0 * pot.v4))
            for amp in (0.9 * x_m, -0.9 * x_m):
                guesses.append(base + amp * bump)
        else:
            for direction in ((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)):
                guesses.append(base + 0.9 * bump[:, None] * np.asarray(direction))
    return guesses


def solve_euclidean_path(action: ActionSpec, x_in, x_fi, T: float, N: int = 400,
                         initial_guess=None, multistart: bool = True,
                         max_iter: int = 40) -> TrajectoryBV:
    """Minimizing Euclidean trajectory from (x_in, 0) to (x_fi, T).

    Newton starts from the straight line (or `initial_guess`); for
    double-well potentials additional bumped starts are tried and the
    lowest-action solution with a positive-definite second variation wins.
    Raises ConjugatePoint when every converged branch fails the positivity
    test, NoConvergence when Newton stalls everywhere.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if N < 50:
        raise ValueError("N must be at least 50")
    ht = T / N
    starts = []
    if initial_guess is not None:
        guess = np.asarray(initial_guess, dtype=float).copy()
        guess[0] = np.atleast_1d(np.asarray(x_in, dtype=float)) if guess.ndim == 2 else float(np.asarray(x_in))
        guess[-1] = np.atleast_1d(np.asarray(x_fi, dtype=float)) if guess.ndim == 2 else float(np.asarray(x_fi))
        starts.append(guess)
    starts.append(_straight_line(x_in, x_fi, N))
    if multistart:
        starts.extend(_bump_guesses(action, x_in, x_fi, N))

    best = None
    saddle_seen = False
    for guess in starts:
        pos, S, ok = _newton(action, guess, ht, T, max_iter)
        if not ok:
            continue
        if not _is_minimum(action, pos, ht):
            saddle_seen = True
            continue
        if best is None or S < best[1]:
            best = (pos, S)
    if best is None:
        if saddle_seen:
            raise ConjugatePoint(
                f"no positive-definite solution for {x_in} -> {x_fi}, T = {T}")
        raise NoConvergence(f"Newton stalled for {x_in} -> {x_fi}, T = {T}")
    times = np.linspace(0.0, T, N + 1)
    return TrajectoryBV(action=action, duration=T, times=times, positions=best[0])


def path_energy_residual(action: ActionSpec, trajectory: TrajectoryBV) -> float:
    """Drift of the Euclidean conserved quantity E = (m/2) xdot^2 - V along
    the path: max_k |E_k - mean| / max(1, |mean|) over interior slices."""
    pos = trajectory.positions
    ht = trajectory.duration / trajectory.n_slices
    vel = (pos[2:] - pos[:-2]) / (2.0 * ht)
    if pos.ndim == 1:
        kin = 0.5 * action.mass * vel**2
    else:
        kin = 0.5 * action.mass * np.sum(vel * vel, axis=1)
    E = kin - _pot_value(action, pos[1:-1])
    mean = float(np.mean(E))
    return float(np.abs(E - mean).max() / max(1.0, abs(mean)))


def el_residual(action: ActionSpec, trajectory: TrajectoryBV) -> float:
    """Max-norm of the discrete Euler-Lagrange residual (diagnostic)."""
    ht = trajectory.duration / trajectory.n_slices
    return float(np.abs(_residual(action, trajectory.positions, ht)).max())


def is_local_minimum(action: ActionSpec, trajectory: TrajectoryBV) -> bool:
    """Positive definiteness of the discrete second variation."""
    ht = trajectory.duration / trajectory.n_slices
    return _is_minimum(action, trajectory.positions, ht)
