"""Global fit of a renormalized ("quantum") action to an amplitude table.

At fixed duration T the model is  G_i = Z exp(-S[path_i]),  so in the log
domain each boundary pair contributes a residual

    r_i = ln G_i + S(theta)[path_i] - ln Z,

with the path solved by the Euclidean boundary-value solver at the current
parameters theta = (m, v2, v4) or (m, v2, v22, v4). ln Z is profiled out
analytically as the weighted mean of ln G_i + S_i, and the remaining
nonlinear least-squares problem runs under scipy's trust-region solver with
numerically differenced gradients. The constant v0 is degenerate with ln Z
at fixed T; by default v0 = 0 and log_z carries the combination, optionally
v0 is anchored through the ground-state energy of the classical action.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from .errors import (ConjugatePoint, MissingEntry, NoConvergence, NotConverged,
                     PathFailure, Unbounded)
from .model import (ActionSpec, Potential1D, Potential2D, TemperaturePoint,
                    temperature_of_time)
from .paths import solve_euclidean_path, euclidean_action
from .propagator import SpatialGrid, amplitude_table, default_grid, ground_state_projection

log = logging.getLogger(__name__)

_PENALTY = 1e3


def default_boundary_1d() -> np.ndarray:
    """21 points, -3..3 in steps of 0.3."""
    return np.round(np.arange(-3.0, 3.0001, 0.3), 10)


def default_boundary_2d() -> np.ndarray:
    """Symmetric 5x5 subset of [-2, 2]^2."""
    axis = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    return np.array([(x, y) for x in axis for y in axis])


@dataclass
class FitConfig:
    boundary_set: np.ndarray | None = None
    max_iterations: int = 100
    gradient_tolerance: float = 1e-9
    n_slices: int | None = None          # default max(400, 400 T)
    dedup_symmetric: bool = True
    down_weight_log_above: float | None = None
    anchor_v0: bool = False
    anchor_e0: float | None = None       # supply E0 directly, else computed
    m_min: float = 1e-3

    def slices_for(self, T: float) -> int:
        if self.n_slices is not None:
            return self.n_slices
        return max(400, int(round(400.0 * T)))


@dataclass
class QuantumActionFit:
    temperature: TemperaturePoint
    quantum_action: ActionSpec
    log_z: float
    residual_rms: float
    residual_max: float
    n_points: int
    diagnostics: dict = field(default_factory=dict)

    def parameters(self) -> dict:
        p = self.quantum_action.potential
        out = {"m": self.quantum_action.mass, "v0": p.v0, "v2": p.v2, "v4": p.v4}
        if isinstance(p, Potential2D):
            out["v22"] = p.v22
        return out

    def to_json(self) -> dict:
        return {
            "T": self.temperature.transition_time,
            "tau": self.temperature.tau,
            "quantum_action": self.quantum_action.to_json(),
            "log_z": self.log_z,
            "residual_rms": self.residual_rms,
            "residual_max": self.residual_max,
            "n_points": self.n_points,
            "diagnostics": self.diagnostics,
        }


def _theta_of(action: ActionSpec) -> np.ndarray:
    p = action.potential
    if action.dim == 1:
        return np.array([action.mass, p.v2, p.v4])
    return np.array([action.mass, p.v2, p.v22, p.v4])


def _action_of(theta, dim: int, v0: float = 0.0) -> ActionSpec:
    if dim == 1:
        m, v2, v4 = theta
        pot = Potential1D(v0=v0, v2=float(v2), v4=float(v4))
    else:
        m, v2, v22, v4 = theta
        pot = Potential2D(v0=v0, v2=float(v2), v22=float(v22), v4=float(v4))
    return ActionSpec(mass=float(m), potential=pot, kind="quantum")


def _bounds(dim: int, m_min: float):
    if dim == 1:
        return [m_min, -np.inf, 0.0], [np.inf, np.inf, np.inf]
    return [m_min, -np.inf, 0.0, 0.0], [np.inf] * 4


def _canonical_key_1d(a, b):
    a, b = round(a, 9), round(b, 9)
    images = [(a, b), (b, a), (round(-a, 9), round(-b, 9)), (round(-b, 9), round(-a, 9))]
    return min(images)


def _sym_images_2d(p):
    x, y = p
    base = [(x, y), (-x, y), (x, -y), (-x, -y)]
    return base + [(py, px) for px, py in base]


def _canonical_key_2d(a, b):
    images = []
    for ia, ib in zip(_sym_images_2d(a), _sym_images_2d(b)):
        images.append((round(ia[0], 9), round(ia[1], 9), round(ib[0], 9), round(ib[1], 9)))
        images.append((round(ib[0], 9), round(ib[1], 9), round(ia[0], 9), round(ia[1], 9)))
    return min(images)


def _collect_pairs(table, dedup: bool):
    """Representative pairs with multiplicities and log-amplitudes."""
    dim = table.dim
    groups = {}
    order = []
    for a, b, g in table.entries():
        if dedup:
            key = _canonical_key_1d(a[0], b[0]) if dim == 1 else _canonical_key_2d(a, b)
        else:
            key = (a, b)
        if key not in groups:
            groups[key] = [a, b, g, 0]
            order.append(key)
        groups[key][3] += 1
    pairs = [(groups[k][0], groups[k][1]) for k in order]
    ln_g = np.array([math.log(groups[k][2]) for k in order])
    mult = np.array([groups[k][3] for k in order], dtype=float)
    return pairs, ln_g, mult


def fit_quantum_action(table, ansatz: ActionSpec, config: FitConfig | None = None) -> QuantumActionFit:
    """Fit parameters and normalization to one amplitude table.

    `ansatz` supplies the parameter family (via its dimension) and the
    starting point. Boundary pairs equivalent under the potential's
    symmetries are merged with multiplicity weights, which leaves the
    optimum unchanged while cutting the number of path solves.
    """
    config = config or FitConfig()
    dim = table.dim
    n_free = 3 if dim == 1 else 4
    if len(table) < n_free + 2:
        raise ValueError(f"table has {len(table)} entries; need at least {n_free + 2}")
    T = table.duration
    N = config.slices_for(T)
    pairs, ln_g, mult = _collect_pairs(table, config.dedup_symmetric)
    weights = mult.copy()
    if config.down_weight_log_above is not None:
        cut = config.down_weight_log_above
        scale = np.minimum(1.0, (cut / np.abs(ln_g)) ** 2)
        weights = weights * np.where(np.abs(ln_g) > cut, scale, 1.0)
    sqrt_w = np.sqrt(weights)
    w_total = float(np.sum(weights))

    path_cache: dict[int, np.ndarray] = {}
    last_good = {"theta": None}

    def actions_at(theta):
        action = _action_of(theta, dim)
        S = np.empty(len(pairs))
        for i, (a, b) in enumerate(pairs):
            x_in = a[0] if dim == 1 else a
            x_fi = b[0] if dim == 1 else b
            guess = path_cache.get(i)
            try:
                traj = solve_euclidean_path(
                    action, x_in, x_fi, T, N,
                    initial_guess=guess, multistart=(guess is None))
            except (ConjugatePoint, NoConvergence):
                if guess is None:
                    raise
                traj = solve_euclidean_path(action, x_in, x_fi, T, N, multistart=True)
            path_cache[i] = traj.positions
            S[i] = euclidean_action(action, traj)
        return S

    def residuals(theta):
        try:
            S = actions_at(theta)
        except (ConjugatePoint, NoConvergence, Unbounded) as exc:
            log.debug("rejected iterate %s: %s", theta, exc)
            ref = last_good["theta"]
            drift = 0.0 if ref is None else float(np.linalg.norm(theta - ref))
            return np.full(len(pairs), _PENALTY * (1.0 + drift))
        last_good["theta"] = np.array(theta)
        ell = ln_g + S
        ln_z = float(np.sum(weights * ell) / w_total)
        return sqrt_w * (ell - ln_z)

    theta0 = _theta_of(ansatz)
    lb, ub = _bounds(dim, config.m_min)
    theta0 = np.clip(theta0, lb, ub)
    result = least_squares(
        residuals, theta0, bounds=(lb, ub), method="trf",
        xtol=1e-12, ftol=1e-12, gtol=config.gradient_tolerance,
        max_nfev=config.max_iterations * (n_free + 1))
    if last_good["theta"] is None:
        raise PathFailure("every optimizer iterate failed its path solves")
    if result.status == 0:
        raise NotConverged(f"optimizer hit the evaluation cap ({result.nfev} evals)")

    theta = result.x
    try:
        S = actions_at(theta)
    except (ConjugatePoint, NoConvergence, Unbounded) as exc:
        raise PathFailure(f"path solves fail at the fitted parameters: {exc}") from exc
    ell = ln_g + S
    ln_z = float(np.sum(weights * ell) / w_total)
    resid = ell - ln_z
    # rms over the full table: multiplicity-weighted mean of squares
    rms = math.sqrt(float(np.sum(mult * resid**2) / np.sum(mult)))

    v0 = 0.0
    log_z = ln_z
    e0 = None
    if config.anchor_v0:
        e0 = config.anchor_e0
        if e0 is None:
            raise ValueError("anchor_v0 requires anchor_e0 (ground-state energy)")
        v0 = _anchored_v0(theta, dim, e0)
        log_z = ln_z + v0 * T
    quantum = _action_of(theta, dim, v0=v0)
    diag = {
        "optimality": float(result.optimality),
        "nfev": int(result.nfev),
        "status": int(result.status),
        "n_dedup_pairs": len(pairs),
        "anchor_e0": e0,
    }
    return QuantumActionFit(
        temperature=temperature_of_time(T),
        quantum_action=quantum,
        log_z=log_z,
        residual_rms=rms,
        residual_max=float(np.abs(resid).max()),
        n_points=len(table),
        diagnostics=diag,
    )


def _anchored_v0(theta, dim: int, e0: float) -> float:
    """v0 such that the fitted action's well depth plus harmonic zero point
    reproduces the true ground-state energy (exact in the harmonic case)."""
    if dim == 1:
        m, v2, v4 = theta
    else:
        m, v2, _v22, v4 = theta
    if v2 < 0 and v4 > 0:
        xm2 = -v2 / (2.0 * v4)
        poly_min = v2 * xm2 + v4 * xm2 * xm2
        curv = -4.0 * v2            # V''(x_m) for the quartic family
    else:
        poly_min = 0.0
        curv = max(2.0 * v2, 0.0)
    omega = math.sqrt(curv / m) if curv > 0 else 0.0
    zero_point = 0.5 * omega * (1 if dim == 1 else 2)
    return e0 - zero_point - poly_min


@dataclass
class ParameterFlow:
    """Quantum-action fits ordered by increasing T, plus failed entries."""

    entries: list
    failures: list = field(default_factory=list)

    def __post_init__(self):
        times = [f.temperature.transition_time for f in self.entries]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("flow entries must be strictly increasing in T")

    def times(self):
        return [f.temperature.transition_time for f in self.entries]

    def entry_at(self, T: float) -> QuantumActionFit:
        for f in self.entries:
            if abs(f.temperature.transition_time - T) <= 1e-9 * max(1.0, abs(T)):
                return f
        raise MissingEntry(f"no flow entry at T = {T}")

    def to_csv(self, path):
        if not self.entries:
            raise ValueError("empty flow")
        dim = self.entries[0].quantum_action.dim
        header = ["T", "tau", "m", "v0", "v2"] + (["v22"] if dim == 2 else []) + \
                 ["v4", "log_z", "residual_rms"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for f in self.entries:
                p = f.parameters()
                row = [f.temperature.transition_time, f.temperature.tau,
                       p["m"], p["v0"], p["v2"]]
                if dim == 2:
                    row.append(p["v22"])
                row += [p["v4"], f.log_z, f.residual_rms]
                writer.writerow([repr(float(v)) for v in row])

    def to_json(self) -> dict:
        return {
            "entries": [f.to_json() for f in self.entries],
            "failures": [{"T": t, "error": msg} for t, msg in self.failures],
        }

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, sort_keys=True, indent=1)


def parameter_flow(classical: ActionSpec, T_list, config: FitConfig | None = None,
                   grid: SpatialGrid | None = None, dt: float = 1e-3,
                   richardson_tol: float | None = 1e-5, on_table=None) -> ParameterFlow:
    """Scan the quantum-action fit over ascending durations.

    Each fit warm-starts from the previous duration's parameters; the first
    starts from the classical parameters. Failed durations are recorded in
    `failures` instead of aborting the scan. `on_table(T, table)` is invoked
    with each freshly built amplitude table (persistence hook).
    """
    T_list = [float(t) for t in T_list]
    if any(t <= 0 for t in T_list) or any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be ascending and positive")
    config = config or FitConfig()
    grid = grid or default_grid(classical.dim)
    boundary = config.boundary_set
    if boundary is None:
        boundary = default_boundary_1d() if classical.dim == 1 else default_boundary_2d()
    if config.anchor_v0 and config.anchor_e0 is None:
        e0, _ = ground_state_projection(classical, grid, dt=dt)
        config = replace(config, anchor_e0=e0)

    entries, failures = [], []
    start = replace(classical, kind="quantum")
    for T in T_list:
        try:
            table = amplitude_table(classical, grid, T, boundary, dt,
                                    richardson_tol=richardson_tol)
            if on_table is not None:
                on_table(T, table)
            fit = fit_quantum_action(table, start, config)
        except Exception as exc:  # noqa: BLE001 - per-entry failures are data
            log.warning("flow entry T=%s failed: %s", T, exc)
            failures.append((T, f"{type(exc).__name__}: {exc}"))
            continue
        entries.append(fit)
        start = fit.quantum_action
        log.info("flow T=%s fitted: %s rms=%.3g", T, fit.parameters(), fit.residual_rms)
    return ParameterFlow(entries=entries, failures=failures)


def flow_convergence(flow: ParameterFlow, tol: float, param_floor: float = 1e-3) -> float:
    """Smallest T after which every parameter's successive relative change
    stays below `tol`. Parameters smaller than `param_floor` in magnitude on
    both sides of a step are treated as unchanged."""
    if len(flow.entries) < 3:
        raise ValueError("flow_convergence needs at least 3 entries")
    changes = []
    for prev, cur in zip(flow.entries, flow.entries[1:]):
        p, q = prev.parameters(), cur.parameters()
        step = 0.0
        for key in ("m", "v2", "v22", "v4"):
            if key not in p:
                continue
            a, b = p[key], q[key]
            if max(abs(a), abs(b)) < param_floor:
                continue
            step = max(step, abs(b - a) / max(abs(a), param_floor))
        changes.append(step)
    for j in range(len(changes)):
        if all(c <= tol for c in changes[j:]):
            return flow.entries[j].temperature.transition_time
    raise NotConverged(f"no entry after which changes stay below {tol}: {changes}")
