"""Hamiltonian flow of a 2-D action: RK4 integration, Poincare sections with
Henon's exact plane landing, and largest-Lyapunov estimates.

The section plane is fixed at y = 0 with crossing direction ydot > 0,
recording (x, px); for the x<->y symmetric quartic family this is the
conventional choice. RK4 is deliberately non-symplectic (fixed-step,
classic coefficients); energy drift is monitored and flagged instead of
silently accepted.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import EmptyShell, Overflow, TooFewCrossings
from .model import ActionSpec, Potential2D

DEFAULT_TIME_CAP = 5e4
CHAOS_THRESHOLD = 0.01
ENERGY_DRIFT_FLAG = 1e-6


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    px: float
    py: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.px, self.py)):
            raise ValueError("phase-state components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.px, self.py])

    @classmethod
    def from_array(cls, arr) -> "PhaseState":
        return cls(*(float(v) for v in arr))

    def reversed_momenta(self) -> "PhaseState":
        return PhaseState(self.x, self.y, -self.px, -self.py)


def _coeffs(action: ActionSpec):
    pot = action.potential
    if not isinstance(pot, Potential2D):
        raise ValueError("dynamics requires a 2-D action")
    return action.mass, pot.v0, pot.v2, pot.v22, pot.v4


def energy_of_state(action: ActionSpec, s: PhaseState) -> float:
    m, _v0, _v2, _v22, _v4 = _coeffs(action)
    kinetic = (s.px**2 + s.py**2) / (2.0 * m)
    return kinetic + float(action.potential.value(s.x, s.y))


def sample_energy_shell(action: ActionSpec, E: float, n: int, seed: int):
    """Deterministic states on the section plane (y = 0) at energy E.

    x and px are drawn uniformly over the allowed region and py > 0 closes
    the energy constraint, so every sample starts exactly on the section
    with upward crossing direction.
    """
    m, v0, v2, v22, v4 = _coeffs(action)
    if n < 1:
        raise ValueError("n must be at least 1")
    v_floor = v0 if v2 >= 0 else v0 - v2**2 / (4.0 * v4)
    if E <= v_floor:
        raise EmptyShell(f"E = {E} does not exceed min V = {v_floor}")
    if v4 > 0:
        x2 = (-v2 + math.sqrt(v2**2 + 4.0 * v4 * (E - v0))) / (2.0 * v4)
        x_bound = math.sqrt(x2)
    elif v2 > 0:
        x_bound = math.sqrt((E - v0) / v2)
    else:
        x_bound = 1.0
    rng = np.random.default_rng(seed)
    states = []
    attempts = 0
    while len(states) < n:
        attempts += 1
        if attempts > 1000 * n:
            raise EmptyShell(f"could not draw {n} states at E = {E}")
        x = float(rng.uniform(-x_bound, x_bound))
        gap = E - float(action.potential.value(x, 0.0))
        if gap <= 0.0:
            continue
        p_max = math.sqrt(2.0 * m * gap)
        px = float(rng.uniform(-p_max, p_max))
        py_sq = 2.0 * m * gap - px * px
        if py_sq <= 1e-14:
            continue
        states.append(PhaseState(x, 0.0, px, math.sqrt(py_sq)))
    return states


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 4) columns x, y, px, py

    def final_state(self) -> PhaseState:
        return PhaseState.from_array(self.states[-1])

    def __len__(self) -> int:
        return len(self.times)


def integrate_rk4(action: ActionSpec, s0: PhaseState, dt: float, t_max: float) -> Trajectory:
    """Classic fixed-step fourth-order Runge-Kutta flow, full time series.

    A shorter remainder step is appended when dt does not divide t_max, so
    the series always ends exactly at t_max."""
    if dt <= 0 or t_max < dt:
        raise ValueError("need dt > 0 and t_max >= dt")
    m, _v0, v2, v22, v4 = _coeffs(action)
    n_full = int(math.floor(t_max / dt + 1e-12))
    remainder = t_max - n_full * dt
    series, status = _kernels.integrate_series(s0.as_array(), dt, n_full, m, v2, v22, v4)
    if status == 2:
        raise Overflow(f"trajectory exceeded {_kernels.OVERFLOW_LIMIT:g}")
    times = dt * np.arange(len(series))
    if remainder > 1e-12 * max(1.0, t_max):
        tail, status = _kernels.integrate_series(series[-1], remainder, 1, m, v2, v22, v4)
        if status == 2:
            raise Overflow(f"trajectory exceeded {_kernels.OVERFLOW_LIMIT:g}")
        series = np.vstack([series, tail[-1:]])
        times = np.append(times, t_max)
    return Trajectory(times=times, states=series)


@dataclass
class PoincareSectionData:
    """Upward crossings of y = 0 per initial condition at fixed energy."""

    energy: float
    plane: dict
    crossings: list          # one (k_i, 2) array of (x, px) per trajectory
    settings: dict = field(default_factory=dict)

    def all_points(self) -> np.ndarray:
        if not self.crossings:
            return np.empty((0, 2))
        return np.vstack(self.crossings)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["traj_id", "crossing_idx", "x", "px"])
            for tid, arr in enumerate(self.crossings):
                for idx, (x, px) in enumerate(arr):
                    writer.writerow([tid, idx, repr(float(x)), repr(float(px))])

    def save_metadata(self, path, extra: dict | None = None):
        meta = {"E": self.energy, "plane": self.plane, **self.settings}
        if extra:
            meta.update(extra)
        with open(path, "w") as fh:
            json.dump(meta, fh, sort_keys=True, indent=1)


def poincare_section(action: ActionSpec, initial_states, E: float, dt: float = 1e-3,
                     n_crossings: int = 300, t_cap: float = DEFAULT_TIME_CAP) -> PoincareSectionData:
    """Sections via sign-change detection plus Henon's refinement step (one
    RK4 step of size -y in the y-parametrized system, landing exactly on
    y = 0). Integration continues from the unrefined state."""
    m, v0, v2, v22, v4 = _coeffs(action)
    for s in initial_states:
        if abs(energy_of_state(action, s) - E) > 1e-9 * max(1.0, abs(E)):
            raise ValueError(f"initial state {s} is not on the E = {E} shell")
    max_steps = int(round(t_cap / dt))
    crossings = []
    max_err = 0.0
    for s in initial_states:
        arr, found, err, status = _kernels.poincare_crossings(
            s.as_array(), dt, max_steps, n_crossings, E, m, v0, v2, v22, v4)
        if status == 2:
            raise Overflow("trajectory exceeded the overflow limit")
        if found < 2:
            raise TooFewCrossings(
                f"only {found} crossings within t_cap = {t_cap} for state {s}")
        crossings.append(arr.copy())
        max_err = max(max_err, err)
    settings = {
        "dt": dt,
        "n_crossings": n_crossings,
        "t_cap": t_cap,
        "max_energy_error": max_err,
        "energy_flagged": bool(max_err > ENERGY_DRIFT_FLAG),
    }
    plane = {"coordinate": "y", "value": 0.0, "direction": "+1"}
    return PoincareSectionData(energy=E, plane=plane, crossings=crossings, settings=settings)


@dataclass
class LyapunovEstimate:
    lambda_max: float
    history: np.ndarray
    settings: dict = field(default_factory=dict)

    @property
    def last_quartile_spread(self) -> float:
        tail = self.history[3 * len(self.history) // 4:]
        if tail.size == 0:
            return float("nan")
        return float(tail.max() - tail.min())


def lyapunov_max(action: ActionSpec, s0: PhaseState, dt: float = 1e-3,
                 t_max: float = 2000.0, renorm_interval: float = 1.0,
                 d0: float = 1e-8) -> LyapunovEstimate:
    """Largest Lyapunov exponent by two-trajectory renormalization: a
    companion offset by d0 in x is rescaled back to distance d0 every
    renorm_interval, accumulating the log stretch factors."""
    m, _v0, v2, v22, v4 = _coeffs(action)
    renorm_steps = int(round(renorm_interval / dt))
    n_epochs = int(round(t_max / renorm_interval))
    if renorm_steps < 1 or n_epochs < 2:
        raise ValueError("t_max must cover at least two renormalization epochs")
    hist, status = _kernels.lyapunov_history(
        s0.as_array(), d0, dt, renorm_steps, n_epochs, m, v2, v22, v4)
    if status == 2:
        raise Overflow("trajectory exceeded the overflow limit")
    settings = {"dt": dt, "t_max": t_max, "renorm_interval": renorm_interval, "d0": d0}
    return LyapunovEstimate(lambda_max=float(hist[-1]), history=hist, settings=settings)


def classify_chaos(action: ActionSpec, states, dt: float = 1e-3, t_max: float = 2000.0,
                   renorm_interval: float = 1.0, threshold: float = CHAOS_THRESHOLD):
    """Lyapunov estimate per initial state plus the boolean chaos verdicts
    (lambda_max > threshold)."""
    estimates = [lyapunov_max(action, s, dt=dt, t_max=t_max,
                              renorm_interval=renorm_interval) for s in states]
    verdicts = [e.lambda_max > threshold for e in estimates]
    return estimates, verdicts


def lyapunov_to_csv(estimates, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["traj_id", "lambda_max"])
        for tid, est in enumerate(estimates):
            writer.writerow([tid, repr(float(est.lambda_max))])
