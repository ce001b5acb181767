import json

import pytest

from qaction import ConfigError
from qaction.cli import main
from qaction.pipeline import parse_config, parse_config_dict, run_pipeline

DW_ACTION = {
    "kind": "classical", "mass": 1.0, "dim": 1,
    "coefficients": {"v0": 0.5, "v2": -1.0, "v4": 0.5},
}
PE_ACTION = {
    "kind": "classical", "mass": 1.0, "dim": 2,
    "coefficients": {"v0": 0.0, "v2": 0.5, "v22": 0.05, "v4": 0.0},
}


def tiny_flow_config(out):
    return {
        "experiment": "flow",
        "action": DW_ACTION,
        "times": [0.5, 1.0],
        "grid": {"points_per_axis": 64},
        "evolution": {"dt": 2e-3, "richardson_tol": None},
        "fit": {"boundary": [-1.2, -0.8, -0.4, 0.0, 0.4, 0.8, 1.2], "n_slices": 200},
        "output_dir": str(out),
        "seed": 7,
    }


def tiny_poincare_config(out):
    return {
        "experiment": "poincare",
        "action": PE_ACTION,
        "grid": {"points_per_axis": 64},
        "evolution": {"dt": 2e-3, "richardson_tol": None},
        "fit": {"n_slices": 200},
        "dynamics": {
            "energies": [5.0],
            "n_initial": 3,
            "n_crossings": 20,
            "lyapunov_t_max": 50.0,
            "taus": [1.0],
        },
        "output_dir": str(out),
        "seed": 11,
    }


def test_parse_minimal_config_fills_defaults():
    cfg = parse_config_dict({"action": DW_ACTION})
    assert cfg.experiment == "full"
    assert cfg.times == [0.5, 1.0, 2.0, 3.0, 4.0]
    assert cfg.grid.points_per_axis == 256
    assert cfg.evolution["dt"] == 1e-3
    assert cfg.dynamics["n_initial"] == 24
    assert cfg.seed == 1


def test_parse_rejects_unknown_top_key():
    with pytest.raises(ConfigError, match="vv2"):
        parse_config_dict({"action": DW_ACTION, "vv2": 1.0})


def test_parse_rejects_unknown_coefficient():
    bad = dict(DW_ACTION)
    bad["coefficients"] = dict(DW_ACTION["coefficients"], vv2=1.0)
    with pytest.raises(ConfigError, match="vv2"):
        parse_config_dict({"action": bad})


def test_parse_rejects_unbounded_potential():
    bad = dict(DW_ACTION)
    bad["coefficients"] = {"v0": 0.0, "v2": -1.0, "v4": -0.5}
    with pytest.raises(ConfigError, match="unbounded"):
        parse_config_dict({"action": bad})


def test_parse_rejects_nested_unknown_key():
    with pytest.raises(ConfigError, match="dynamics.n_initail"):
        parse_config_dict({"action": DW_ACTION, "dynamics": {"n_initail": 5}})


def test_parse_rejects_bad_times():
    with pytest.raises(ConfigError):
        parse_config_dict({"action": DW_ACTION, "times": [1.0, 0.5]})
    with pytest.raises(ConfigError):
        parse_config_dict({"action": DW_ACTION, "times": [-1.0, 0.5]})


def test_parse_rejects_bad_experiment():
    with pytest.raises(ConfigError, match="experiment"):
        parse_config_dict({"action": DW_ACTION, "experiment": "fly"})


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "none.json")


def test_shipped_configs_parse():
    from pathlib import Path
    root = Path(__file__).resolve().parents[1] / "configs"
    for name in ("double_well.json", "pullen_edmonds.json"):
        cfg = parse_config(root / name)
        assert cfg.action.mass == 1.0


@pytest.fixture(scope="module")
def flow_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("flow_run")
    cfg = parse_config_dict(tiny_flow_config(out))
    manifest = run_pipeline(cfg, out_dir=out)
    return out, manifest


def test_flow_pipeline_outputs(flow_run):
    out, manifest = flow_run
    names = {f["path"] for f in manifest.files}
    assert "flow.csv" in names
    assert "flow.json" in names
    assert "flow_mass_v0.svg" in names
    assert "flow_potential.svg" in names
    assert {"table_T0p5.csv", "table_T1.csv"} <= names
    assert not manifest.failed
    assert "flow" in manifest.timings
    lines = (out / "flow.csv").read_text().strip().splitlines()
    assert len(lines) == 3
    header = lines[0].split(",")
    v2_col = header.index("v2")
    for line in lines[1:]:
        assert float(line.split(",")[v2_col]) < 0.0


def test_manifest_hashes_match_files(flow_run):
    import hashlib
    out, manifest = flow_run
    for entry in manifest.files:
        digest = hashlib.sha256((out / entry["path"]).read_bytes()).hexdigest()
        assert digest == entry["sha256"]
    data = json.loads((out / "manifest.json").read_text())
    assert data["failed"] is False
    assert data["config"]["seed"] == 7


def test_rerun_reproduces_hashes(flow_run, tmp_path):
    out, manifest = flow_run
    cfg = parse_config_dict(tiny_flow_config(tmp_path / "again"))
    second = run_pipeline(cfg, out_dir=tmp_path / "again")
    first_hashes = {f["path"]: f["sha256"] for f in manifest.files}
    second_hashes = {f["path"]: f["sha256"] for f in second.files}
    assert first_hashes == second_hashes


def test_every_svg_has_a_csv(flow_run):
    out, manifest = flow_run
    names = {f["path"] for f in manifest.files}
    for name in names:
        if name.endswith(".svg"):
            assert any(other.endswith(".csv") for other in names)


def test_poincare_pipeline(tmp_path):
    out = tmp_path / "pe"
    cfg = parse_config_dict(tiny_poincare_config(out))
    manifest = run_pipeline(cfg, out_dir=out)
    names = {f["path"] for f in manifest.files}
    assert "poincare_classical_E5.csv" in names
    assert "poincare_classical_E5.svg" in names
    assert "lyapunov_classical_E5.csv" in names
    assert "poincare_quantum_tau1_E5.csv" in names
    assert "quantum_fit_tau1.json" in names
    assert "chaos_summary.json" in names
    summary = json.loads((out / "chaos_summary.json").read_text())
    assert "5" in summary["classical"]
    assert "tau1_E5" in summary["ks"]
    meta = json.loads((out / "poincare_quantum_tau1_E5.json").read_text())
    assert meta["tau"] == 1.0
    assert meta["action_kind"] == "quantum"
    assert meta["max_energy_error"] < 1e-6


def test_full_routing_1d(tmp_path):
    cfg_dict = tiny_flow_config(tmp_path / "full")
    cfg_dict["experiment"] = "full"
    cfg = parse_config_dict(cfg_dict)
    manifest = run_pipeline(cfg, out_dir=tmp_path / "full")
    assert set(manifest.timings) == {"flow", "instanton"}
    names = {f["path"] for f in manifest.files}
    assert "instanton_classical.csv" in names
    assert "instantons.svg" in names
    assert "instanton_summary.json" in names


def test_instanton_requires_1d(tmp_path):
    cfg_dict = tiny_poincare_config(tmp_path / "bad")
    cfg_dict["experiment"] = "instanton"
    cfg = parse_config_dict(cfg_dict)
    with pytest.raises(ConfigError):
        run_pipeline(cfg, out_dir=tmp_path / "bad")
    manifest = json.loads((tmp_path / "bad" / "manifest.json").read_text())
    assert manifest["failed"] is True
    assert manifest["error"]["stage"] == "instanton"


def test_cli_success(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(tiny_flow_config(tmp_path / "cli_out")))
    code = main(["flow", "--config", str(cfg_path), "--out", str(tmp_path / "cli_out"),
                 "--seed", "9"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ok"] is True
    manifest = json.loads((tmp_path / "cli_out" / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 9


def test_cli_failure_emits_error_json(tmp_path, capsys):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps({"action": DW_ACTION, "bogus": 1}))
    code = main(["flow", "--config", str(cfg_path), "--out", str(tmp_path / "x")])
    assert code != 0
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "ConfigError"
    assert "bogus" in err["error"]["message"]
