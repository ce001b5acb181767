"""Unit conventions, polynomial potentials, action specifications, and the
Euclidean time <-> temperature mapping.

All quantities are dimensionless with hbar = k_B = 1. Potentials are the two
symmetric polynomial families used throughout:

    1-D:  V(x)    = v0 + v2 x^2 + v4 x^4
    2-D:  V(x, y) = v0 + v2 (x^2 + y^2) + v22 x^2 y^2 + v4 (x^4 + y^4)

Both are even under parity and (in 2-D) invariant under x <-> y, so gradients
stay analytic and an action is a finite coefficient vector.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveTime, Unbounded


@dataclass(frozen=True)
class Conventions:
    """Action and temperature scales; fixed to 1 except in tests."""

    hbar: float = 1.0
    k_boltzmann: float = 1.0


CONVENTIONS = Conventions()


@dataclass(frozen=True)
class Potential1D:
    v0: float = 0.0
    v2: float = 0.0
    v4: float = 0.0

    def __post_init__(self):
        if self.v4 < 0:
            raise Unbounded(f"v4 = {self.v4} < 0: potential unbounded below")
        if self.v4 == 0 and self.v2 < 0:
            raise Unbounded("v4 = 0 with v2 < 0: potential unbounded below")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        x2 = x * x
        return self.v0 + self.v2 * x2 + self.v4 * x2 * x2

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return 2.0 * self.v2 * x + 4.0 * self.v4 * x**3

    def curvature(self, x):
        """Second derivative V''(x)."""
        x = np.asarray(x, dtype=float)
        return 2.0 * self.v2 + 12.0 * self.v4 * x * x

    def minima(self):
        """Positions of the potential minima.

        Double well (v2 < 0, v4 > 0): returns [-x_m, +x_m] with
        x_m = sqrt(-v2 / (2 v4)); otherwise the single minimum at 0.
        """
        if self.v4 == 0 and self.v2 == 0:
            raise Unbounded("flat potential has no isolated minimum")
        if self.v2 < 0 and self.v4 > 0:
            x_m = math.sqrt(-self.v2 / (2.0 * self.v4))
            return [-x_m, x_m]
        return [0.0]


@dataclass(frozen=True)
class Potential2D:
    v0: float = 0.0
    v2: float = 0.0
    v22: float = 0.0
    v4: float = 0.0

    def __post_init__(self):
        if self.v22 < 0:
            raise Unbounded(f"v22 = {self.v22} < 0: potential unbounded below")
        if self.v4 < 0:
            raise Unbounded(f"v4 = {self.v4} < 0: potential unbounded below")
        if self.v4 == 0 and self.v2 < 0:
            raise Unbounded("v4 = 0 with v2 < 0: potential unbounded below")

    def value(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x2, y2 = x * x, y * y
        return (
            self.v0
            + self.v2 * (x2 + y2)
            + self.v22 * x2 * y2
            + self.v4 * (x2 * x2 + y2 * y2)
        )

    def gradient(self, x, y):
        """Returns (dV/dx, dV/dy), each shaped like the inputs."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        gx = 2.0 * self.v2 * x + 2.0 * self.v22 * x * y * y + 4.0 * self.v4 * x**3
        gy = 2.0 * self.v2 * y + 2.0 * self.v22 * x * x * y + 4.0 * self.v4 * y**3
        return gx, gy

    def hessian(self, x, y):
        """Returns (Vxx, Vxy, Vyy), each shaped like the inputs."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        vxx = 2.0 * self.v2 + 2.0 * self.v22 * y * y + 12.0 * self.v4 * x * x
        vyy = 2.0 * self.v2 + 2.0 * self.v22 * x * x + 12.0 * self.v4 * y * y
        vxy = 4.0 * self.v22 * x * y
        return vxx, vxy, vyy


def evaluate_potential(potential, point):
    """Polynomial value of a 1-D or 2-D potential at a point; exact arithmetic."""
    if isinstance(potential, Potential1D):
        return float(potential.value(point))
    x, y = point
    return float(potential.value(x, y))


def potential_gradient(potential, point):
    """Analytic gradient at a point: a float in 1-D, a (2,) array in 2-D."""
    if isinstance(potential, Potential1D):
        return float(potential.gradient(point))
    x, y = point
    gx, gy = potential.gradient(x, y)
    return np.array([float(gx), float(gy)])


def potential_minima_1d(potential: Potential1D):
    return potential.minima()


@dataclass(frozen=True)
class ActionSpec:
    """Mass plus potential, tagged classical or quantum."""

    mass: float
    potential: Potential1D | Potential2D
    kind: str = "classical"

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.kind not in ("classical", "quantum"):
            raise ValueError(f"kind must be 'classical' or 'quantum', got {self.kind!r}")

    @property
    def dim(self) -> int:
        return 1 if isinstance(self.potential, Potential1D) else 2

    def to_json(self) -> dict:
        p = self.potential
        if self.dim == 1:
            coeff = {"v0": p.v0, "v2": p.v2, "v4": p.v4}
        else:
            coeff = {"v0": p.v0, "v2": p.v2, "v22": p.v22, "v4": p.v4}
        return {"kind": self.kind, "mass": self.mass, "dim": self.dim, "coefficients": coeff}

    @classmethod
    def from_json(cls, obj: dict) -> "ActionSpec":
        known = {"kind", "mass", "dim", "coefficients"}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown action keys: {sorted(unknown)}")
        dim = obj["dim"]
        coeff = dict(obj["coefficients"])
        if dim == 1:
            allowed = {"v0", "v2", "v4"}
        elif dim == 2:
            allowed = {"v0", "v2", "v22", "v4"}
        else:
            raise ValueError(f"dim must be 1 or 2, got {dim}")
        bad = set(coeff) - allowed
        if bad:
            raise ValueError(f"unknown coefficients: {sorted(bad)}")
        for key in allowed:
            coeff.setdefault(key, 0.0)
        pot = Potential1D(**coeff) if dim == 1 else Potential2D(**coeff)
        return cls(mass=obj["mass"], potential=pot, kind=obj.get("kind", "classical"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "ActionSpec":
        return cls.from_json(json.loads(text))


@dataclass(frozen=True)
class TemperaturePoint:
    """Euclidean duration T with its inverse temperature beta = T/hbar and
    temperature tau = 1/(k_B beta)."""

    transition_time: float
    beta: float
    tau: float
    conventions: Conventions = field(default=CONVENTIONS, compare=False)

    def __post_init__(self):
        if self.transition_time <= 0:
            raise NonPositiveTime(f"T must be positive, got {self.transition_time}")


def temperature_of_time(T: float, conventions: Conventions = CONVENTIONS) -> TemperaturePoint:
    if T <= 0:
        raise NonPositiveTime(f"T must be positive, got {T}")
    beta = T / conventions.hbar
    tau = 1.0 / (conventions.k_boltzmann * beta)
    return TemperaturePoint(transition_time=T, beta=beta, tau=tau, conventions=conventions)
