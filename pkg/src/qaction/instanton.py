"""Instantons of a double-well action: zero-energy Euclidean kinks connecting
the degenerate minima.

Along the kink the conserved Euclidean energy vanishes, so

    xdot = sqrt((2/m) (V(x) - V(x_m))),

and the profile is recovered by inverting the quadrature
t(x) = integral of dx / xdot from the center x(0) = 0. For the quartic
family V - V(x_m) = v4 (x^2 - x_m^2)^2 exactly, giving the closed form
x(t) = x_m tanh(omega t) with omega = x_m sqrt(2 v4 / m); the numerical
quadrature stays the implementation and the closed form serves as oracle.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import NoDoubleWell
from .model import ActionSpec, Potential1D


@dataclass
class InstantonProfile:
    """Kink centered at t = 0 (x(0) = 0, antisymmetric in t)."""

    action: ActionSpec
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    asymptote: float      # x_m
    rate: float           # omega = x_m sqrt(2 v4 / m)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "x"])
            for t, x in zip(self.times, self.positions):
                writer.writerow([repr(float(t)), repr(float(x))])

    def sidecar(self, T: float | None = None, tau: float | None = None) -> dict:
        return {
            "x_m": self.asymptote,
            "omega_inst": self.rate,
            "S_inst": instanton_action(self),
            "T": T,
            "tau": tau,
        }

    def save_sidecar(self, path, T=None, tau=None):
        with open(path, "w") as fh:
            json.dump(self.sidecar(T=T, tau=tau), fh, sort_keys=True, indent=1)


def _require_double_well(action: ActionSpec) -> Potential1D:
    pot = action.potential
    if not isinstance(pot, Potential1D):
        raise NoDoubleWell("instantons are defined for 1-D actions")
    if not (pot.v2 < 0 and pot.v4 > 0):
        raise NoDoubleWell(
            f"potential (v2={pot.v2}, v4={pot.v4}) has no degenerate double minima")
    return pot


def instanton_rate(action: ActionSpec) -> float:
    pot = _require_double_well(action)
    x_m = math.sqrt(-pot.v2 / (2.0 * pot.v4))
    return x_m * math.sqrt(2.0 * pot.v4 / action.mass)


def default_time_grid(action: ActionSpec, points: int = 801) -> np.ndarray:
    """Uniform grid on [-8, 8] in units of 1/omega (tanh is within 1e-7 of
    its asymptote at |omega t| = 8)."""
    omega = instanton_rate(action)
    return np.linspace(-8.0 / omega, 8.0 / omega, points)


def find_instanton(action: ActionSpec, t_grid=None) -> InstantonProfile:
    """Zero-energy kink by adaptive quadrature of dt = dx / xdot.

    The positive-time half is obtained by bracketed root finding on the
    monotone map t(x) and mirrored by antisymmetry.
    """
    pot = _require_double_well(action)
    m = action.mass
    x_m = math.sqrt(-pot.v2 / (2.0 * pot.v4))
    if t_grid is None:
        t_grid = default_time_grid(action)
    t_grid = np.asarray(t_grid, dtype=float)

    def speed(x):
        # V(x) - V(x_m) = v4 (x^2 - x_m^2)^2 exactly for this family; the
        # factored form avoids the catastrophic cancellation near x_m
        gap = pot.v4 * (x * x - x_m * x_m) ** 2
        return math.sqrt(2.0 * gap / m)

    def time_of(x):
        if x <= 0.0:
            return 0.0
        # full_output silences the roundoff warning at the near-singular
        # endpoint; accuracy there is already beyond the 1e-12 request
        out = quad(lambda y: 1.0 / speed(y), 0.0, x,
                   limit=200, epsabs=0.0, epsrel=1e-12, full_output=1)
        return out[0]

    x_top = x_m * (1.0 - 1e-13)
    t_top = time_of(x_top)
    # solve the monotone half-profile once on the unique |t| values
    t_abs_all = np.round(np.abs(t_grid), 12)
    unique_t = np.unique(t_abs_all)
    half: dict[float, float] = {}
    lo = 0.0
    for t_abs in unique_t:
        if t_abs == 0.0:
            x = 0.0
        elif t_abs >= t_top:
            x = x_top
        else:
            if time_of(lo) - t_abs > 0.0:  # guard roundoff on reused bracket
                lo = 0.0
            x = brentq(lambda xx: time_of(xx) - t_abs, lo, x_top,
                       xtol=1e-15, rtol=8.9e-16, maxiter=200)
            lo = x  # |t| ascending, so x is monotone
        half[float(t_abs)] = x
    positions = np.empty_like(t_grid)
    velocities = np.empty_like(t_grid)
    for idx, t in enumerate(t_grid):
        x = half[float(t_abs_all[idx])]
        positions[idx] = math.copysign(x, t) if t != 0.0 else 0.0
        velocities[idx] = speed(x)
    omega = x_m * math.sqrt(2.0 * pot.v4 / m)
    return InstantonProfile(action=action, times=t_grid, positions=positions,
                            velocities=velocities, asymptote=x_m, rate=omega)


def instanton_action(profile: InstantonProfile) -> float:
    """Kink action relative to the vacuum path: integral of m xdot^2 dt,
    which for the quartic family equals sqrt(2 m v4) (4/3) x_m^3."""
    pot = profile.action.potential
    m = profile.action.mass
    return math.sqrt(2.0 * m * pot.v4) * (4.0 / 3.0) * profile.asymptote**3


def instanton_action_quadrature(profile: InstantonProfile) -> float:
    """Independent evaluation as the momentum integral over position,
    S = integral of sqrt(2 m (V - V_min)) dx across the well separation."""
    pot = profile.action.potential
    m = profile.action.mass
    x_m = profile.asymptote

    def momentum(x):
        gap = pot.v4 * (x * x - x_m * x_m) ** 2
        return math.sqrt(2.0 * m * gap)

    val, _err = quad(momentum, -x_m, x_m, limit=200, epsabs=0.0, epsrel=1e-10)
    return val


def quantum_instanton(flow, T_select: float, t_grid=None) -> InstantonProfile:
    """Instanton of the fitted quantum action at the selected duration.

    Raises MissingEntry when T_select is absent from the flow and
    NoDoubleWell when the fitted quadratic coefficient is nonnegative
    (a legitimate outcome: the renormalized potential lost its wells).
    """
    entry = flow.entry_at(T_select)
    return find_instanton(entry.quantum_action, t_grid=t_grid)
