"""Experiment pipeline: configuration parsing, stage execution, persistence,
and the run manifest.

Experiments (selected by the CLI subcommand or the config's experiment tag):

  flow      amplitude tables per T -> parameter flow -> CSV/JSON + SVG lines
  instanton flow plus classical and per-T quantum kink profiles
  poincare  sections and Lyapunov classification for the classical action and
            for the quantum action at each requested temperature
  full      flow + instanton (1-D actions) or flow + poincare (2-D actions)

All files land inside the configured output directory; the manifest (written
last) lists every artifact with its sha256, so reruns with identical config
and seed are byte-reproducible for the deterministic stages.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import ks_2samp

from . import __version__, svgplot
from .dynamics import (classify_chaos, lyapunov_to_csv, poincare_section,
                       sample_energy_shell)
from .errors import ConfigError, NoDoubleWell
from .fitting import (FitConfig, ParameterFlow, fit_quantum_action,
                      parameter_flow)
from .instanton import find_instanton, instanton_action, quantum_instanton
from .model import ActionSpec, temperature_of_time
from .propagator import SpatialGrid, amplitude_table, default_grid

_EXPERIMENTS = ("flow", "instanton", "poincare", "full")

_DEFAULTS = {
    "experiment": "full",
    "times": [0.5, 1.0, 2.0, 3.0, 4.0],
    "grid": {"half_extent": None, "points_per_axis": None},
    "evolution": {"dt": 1e-3, "richardson_tol": 1e-5},
    "fit": {
        "boundary": None,
        "max_iterations": 100,
        "gradient_tolerance": 1e-9,
        "n_slices": None,
        "down_weight_log_above": None,
        "anchor_v0": False,
    },
    "dynamics": {
        "energies": [5.0, 10.0, 20.0],
        "n_initial": 24,
        "dt": 1e-3,
        "n_crossings": 300,
        "time_cap": 5e4,
        "lyapunov_t_max": 2000.0,
        "renorm_interval": 1.0,
        "chaos_threshold": 0.01,
        "taus": [0.25],
    },
    "output_dir": "qaction_out",
    "seed": 1,
}


@dataclass
class RunConfig:
    experiment: str
    action: ActionSpec
    times: list
    grid: SpatialGrid
    evolution: dict
    fit: dict
    dynamics: dict
    output_dir: str
    seed: int

    def fit_config(self) -> FitConfig:
        boundary = self.fit["boundary"]
        if boundary is not None:
            boundary = np.asarray(boundary, dtype=float)
        return FitConfig(
            boundary_set=boundary,
            max_iterations=self.fit["max_iterations"],
            gradient_tolerance=self.fit["gradient_tolerance"],
            n_slices=self.fit["n_slices"],
            down_weight_log_above=self.fit["down_weight_log_above"],
            anchor_v0=self.fit["anchor_v0"],
        )

    def echo(self) -> dict:
        return {
            "experiment": self.experiment,
            "action": self.action.to_json(),
            "times": list(self.times),
            "grid": self.grid.to_json(),
            "evolution": self.evolution,
            "fit": self.fit,
            "dynamics": self.dynamics,
            "output_dir": self.output_dir,
            "seed": self.seed,
        }


def _check_keys(obj: dict, allowed, path: str):
    unknown = set(obj) - set(allowed)
    if unknown:
        key = sorted(unknown)[0]
        where = f"{path}.{key}" if path else key
        raise ConfigError(f"unknown key {where!r}")


def _merge_section(raw: dict, section: str) -> dict:
    defaults = _DEFAULTS[section]
    given = raw.get(section, {})
    if not isinstance(given, dict):
        raise ConfigError(f"{section} must be an object")
    _check_keys(given, defaults, section)
    merged = dict(defaults)
    merged.update(given)
    return merged


def parse_config_dict(raw: dict) -> RunConfig:
    """Strict parse: unknown keys anywhere are errors; omitted optional
    settings take documented defaults (echoed into the manifest)."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    top_allowed = ["experiment", "action", "times", "grid", "evolution",
                   "fit", "dynamics", "output_dir", "seed"]
    _check_keys(raw, top_allowed, "")
    if "action" not in raw:
        raise ConfigError("missing required key 'action'")
    try:
        action = ActionSpec.from_json(raw["action"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"action: missing key {exc}") from exc
    except Exception as exc:
        raise ConfigError(f"action: {exc}") from exc

    experiment = raw.get("experiment", _DEFAULTS["experiment"])
    if experiment not in _EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {_EXPERIMENTS}, got {experiment!r}")

    times = [float(t) for t in raw.get("times", _DEFAULTS["times"])]
    if any(t <= 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError("times must be ascending and positive")

    grid_cfg = _merge_section(raw, "grid")
    default = default_grid(action.dim)
    try:
        grid = SpatialGrid(
            dim=action.dim,
            half_extent=grid_cfg["half_extent"] or default.half_extent,
            points_per_axis=grid_cfg["points_per_axis"] or default.points_per_axis,
        )
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc

    evolution = _merge_section(raw, "evolution")
    if evolution["dt"] <= 0:
        raise ConfigError("evolution.dt must be positive")
    fit = _merge_section(raw, "fit")
    dynamics = _merge_section(raw, "dynamics")
    if any(e <= 0 for e in dynamics["energies"]):
        raise ConfigError("dynamics.energies must be positive")
    if dynamics["n_initial"] < 1:
        raise ConfigError("dynamics.n_initial must be at least 1")
    for tau in dynamics["taus"]:
        if tau <= 0:
            raise ConfigError("dynamics.taus must be positive temperatures")

    seed = int(raw.get("seed", _DEFAULTS["seed"]))
    output_dir = raw.get("output_dir", _DEFAULTS["output_dir"])
    return RunConfig(experiment=experiment, action=action, times=times, grid=grid,
                     evolution=evolution, fit=fit, dynamics=dynamics,
                     output_dir=output_dir, seed=seed)


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return parse_config_dict(raw)


@dataclass
class RunManifest:
    config: dict
    files: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    version: str = __version__
    failed: bool = False
    error: dict | None = None

    def to_json(self) -> dict:
        out = {
            "config": self.config,
            "files": self.files,
            "timings": self.timings,
            "version": self.version,
            "failed": self.failed,
        }
        if self.error:
            out["error"] = self.error
        return out


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def _fmt_tag(value: float) -> str:
    return f"{value:g}".replace(".", "p").replace("-", "m")


class _Run:
    def __init__(self, config: RunConfig, out_dir: Path):
        self.config = config
        self.out = out_dir
        self.produced: list[Path] = []
        self.flow: ParameterFlow | None = None

    def path(self, name: str) -> Path:
        p = self.out / name
        self.produced.append(p)
        return p

    # ---- flow -------------------------------------------------------------
    def run_flow(self) -> ParameterFlow:
        cfg = self.config

        def save_table(T, table):
            table.to_csv(self.path(f"table_T{_fmt_tag(T)}.csv"))

        flow = parameter_flow(
            cfg.action, cfg.times, cfg.fit_config(), grid=cfg.grid,
            dt=cfg.evolution["dt"], richardson_tol=cfg.evolution["richardson_tol"],
            on_table=save_table)
        flow.to_csv(self.path("flow.csv"))
        flow.save_json(self.path("flow.json"))
        if flow.entries:
            times = flow.times()
            params = [f.parameters() for f in flow.entries]
            svgplot.line_svg(
                self.path("flow_mass_v0.svg"),
                [{"x": times, "y": [p["m"] for p in params], "label": "m"},
                 {"x": times, "y": [p["v0"] for p in params], "label": "v0"}],
                title="action parameters vs T", xlabel="T", ylabel="value")
            series = [{"x": times, "y": [p["v2"] for p in params], "label": "v2"},
                      {"x": times, "y": [p["v4"] for p in params], "label": "v4"}]
            if cfg.action.dim == 2:
                series.append({"x": times, "y": [p["v22"] for p in params], "label": "v22"})
            svgplot.line_svg(self.path("flow_potential.svg"), series,
                             title="potential coefficients vs T", xlabel="T", ylabel="value")
        self.flow = flow
        return flow

    # ---- instanton --------------------------------------------------------
    def run_instanton(self):
        cfg = self.config
        if cfg.action.dim != 1:
            raise ConfigError("instanton experiment requires a 1-D action")
        flow = self.flow or self.run_flow()
        summary = {"classical": None, "quantum": [], "no_double_well": []}
        curves = []
        classical_profile = find_instanton(cfg.action)
        classical_profile.to_csv(self.path("instanton_classical.csv"))
        classical_profile.save_sidecar(self.path("instanton_classical.json"),
                                       T=0.0, tau=None)
        summary["classical"] = {
            "x_m": classical_profile.asymptote,
            "omega_inst": classical_profile.rate,
            "S_inst": instanton_action(classical_profile),
        }
        curves.append({"x": classical_profile.times, "y": classical_profile.positions,
                       "label": "classical (T=0)"})
        for entry in flow.entries:
            T = entry.temperature.transition_time
            tag = _fmt_tag(T)
            try:
                profile = quantum_instanton(flow, T)
            except NoDoubleWell as exc:
                summary["no_double_well"].append({"T": T, "reason": str(exc)})
                continue
            profile.to_csv(self.path(f"instanton_T{tag}.csv"))
            profile.save_sidecar(self.path(f"instanton_T{tag}.json"),
                                 T=T, tau=entry.temperature.tau)
            summary["quantum"].append({
                "T": T, "tau": entry.temperature.tau,
                "x_m": profile.asymptote, "omega_inst": profile.rate,
                "S_inst": instanton_action(profile),
            })
            curves.append({"x": profile.times, "y": profile.positions,
                           "label": f"quantum T={T:g}"})
        with open(self.path("instanton_summary.json"), "w") as fh:
            json.dump(summary, fh, sort_keys=True, indent=1)
        svgplot.line_svg(self.path("instantons.svg"), curves,
                         title="kink profiles", xlabel="t", ylabel="x(t)")
        return summary

    # ---- poincare ---------------------------------------------------------
    def _section_bundle(self, action: ActionSpec, label: str, E: float, seed: int,
                        tau: float | None):
        dyn = self.config.dynamics
        states = sample_energy_shell(action, E, dyn["n_initial"], seed)
        section = poincare_section(action, states, E, dt=dyn["dt"],
                                   n_crossings=dyn["n_crossings"], t_cap=dyn["time_cap"])
        estimates, verdicts = classify_chaos(
            action, states, dt=dyn["dt"], t_max=dyn["lyapunov_t_max"],
            renorm_interval=dyn["renorm_interval"], threshold=dyn["chaos_threshold"])
        tag = f"{label}_E{_fmt_tag(E)}"
        section.to_csv(self.path(f"poincare_{tag}.csv"))
        section.save_metadata(self.path(f"poincare_{tag}.json"), extra={
            "action_kind": action.kind,
            "T": None if tau is None else 1.0 / tau,
            "tau": tau,
            "threshold": dyn["chaos_threshold"],
            "seed": seed,
        })
        title = f"{label} section, E={E:g}" + ("" if tau is None else f", tau={tau:g}")
        groups = [{"x": arr[:, 0], "y": arr[:, 1]} for arr in section.crossings]
        svgplot.scatter_svg(self.path(f"poincare_{tag}.svg"), groups,
                            title=title, xlabel="x", ylabel="px")
        lyapunov_to_csv(estimates, self.path(f"lyapunov_{tag}.csv"))
        fraction = sum(verdicts) / len(verdicts)
        return section, fraction

    def run_poincare(self):
        cfg = self.config
        if cfg.action.dim != 2:
            raise ConfigError("poincare experiment requires a 2-D action")
        dyn = cfg.dynamics
        summary = {"threshold": dyn["chaos_threshold"], "seed": cfg.seed,
                   "classical": {}, "quantum": {}, "ks": {}}
        classical_sections = {}
        for i, E in enumerate(dyn["energies"]):
            seed = cfg.seed + 1000 * i
            section, fraction = self._section_bundle(cfg.action, "classical", E, seed, None)
            classical_sections[E] = section
            summary["classical"][f"{E:g}"] = {"chaotic_fraction": fraction}

        fit_cfg = cfg.fit_config()
        for tau in dyn["taus"]:
            T = 1.0 / tau
            boundary = fit_cfg.boundary_set
            if boundary is None:
                from .fitting import default_boundary_2d
                boundary = default_boundary_2d()
            table = amplitude_table(cfg.action, cfg.grid, T, boundary,
                                    cfg.evolution["dt"],
                                    richardson_tol=cfg.evolution["richardson_tol"])
            table.to_csv(self.path(f"table_tau{_fmt_tag(tau)}.csv"))
            fit = fit_quantum_action(table, cfg.action, fit_cfg)
            with open(self.path(f"quantum_fit_tau{_fmt_tag(tau)}.json"), "w") as fh:
                json.dump(fit.to_json(), fh, sort_keys=True, indent=1)
            quantum = fit.quantum_action
            summary["quantum"][f"{tau:g}"] = {"fit": fit.parameters(), "per_energy": {}}
            for i, E in enumerate(dyn["energies"]):
                seed = cfg.seed + 1000 * i + 7
                section, fraction = self._section_bundle(
                    quantum, f"quantum_tau{_fmt_tag(tau)}", E, seed, tau)
                summary["quantum"][f"{tau:g}"]["per_energy"][f"{E:g}"] = {
                    "chaotic_fraction": fraction}
                ref = classical_sections[E].all_points()
                qua = section.all_points()
                ks_x = ks_2samp(ref[:, 0], qua[:, 0])
                ks_px = ks_2samp(ref[:, 1], qua[:, 1])
                summary["ks"][f"tau{tau:g}_E{E:g}"] = {
                    "x": {"statistic": float(ks_x.statistic), "pvalue": float(ks_x.pvalue)},
                    "px": {"statistic": float(ks_px.statistic), "pvalue": float(ks_px.pvalue)},
                }
        with open(self.path("chaos_summary.json"), "w") as fh:
            json.dump(summary, fh, sort_keys=True, indent=1)
        return summary


def run_pipeline(config: RunConfig, out_dir=None) -> RunManifest:
    """Execute the configured experiment; write artifacts and the manifest.

    Module errors propagate after partial progress and the failure marker
    are recorded in the manifest.
    """
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    run = _Run(config, out)
    manifest = RunManifest(config=config.echo())
    stages: list[str]
    if config.experiment == "flow":
        stages = ["flow"]
    elif config.experiment == "instanton":
        stages = ["flow", "instanton"]
    elif config.experiment == "poincare":
        stages = ["poincare"]
    else:  # full
        stages = ["flow", "instanton"] if config.action.dim == 1 else ["flow", "poincare"]
    error = None
    for stage in stages:
        start = time.perf_counter()
        try:
            if stage == "flow":
                run.run_flow()
            elif stage == "instanton":
                run.run_instanton()
            else:
                run.run_poincare()
        except Exception as exc:  # record, then propagate
            manifest.failed = True
            manifest.error = {"stage": stage, "type": type(exc).__name__,
                              "message": str(exc)}
            error = exc
        manifest.timings[stage] = time.perf_counter() - start
        if error is not None:
            break
    manifest.files = [
        {"path": str(p.relative_to(out)), "sha256": _sha256(p)}
        for p in sorted(set(run.produced)) if p.exists()
    ]
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest.to_json(), fh, sort_keys=True, indent=1)
    if error is not None:
        raise error
    return manifest
