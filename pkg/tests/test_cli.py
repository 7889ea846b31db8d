import json

import pytest
import yaml

from rips_euler.cli import OUTPUT_ROOT_ENV, main

UNIFORM1 = {"kind": "uniform-cube", "dimension": 1}


def write_cfg(tmp_path, cfg, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def run(tmp_path, command, cfg, *extra, out="out"):
    path = write_cfg(tmp_path, cfg)
    dest = tmp_path / out
    code = main([command, path, "--out", str(dest), *extra])
    return code, dest


def test_euler_curve_two_point_fixture(tmp_path):
    (tmp_path / "pts.csv").write_text("x0\n0.0\n2.0\n")
    cfg = {"density": UNIFORM1, "scaling": {"n": 1}, "grid": {"t_max": 3.0}, "input": {"points": "pts.csv"}}
    code, out = run(tmp_path, "euler-curve", cfg)
    assert code == 0
    assert (out / "curve.csv").read_text() == "t,chi\n0.0,2\n1.0,1\n"
    man = json.loads((out / "manifest.json").read_text())
    assert set(man["artifacts"]) == {"curve.csv", "curve.json", "config.yaml"}
    assert list(man["inputs"].values())[0]
    for key in ("config_hash", "seeds", "versions", "wall_time_s", "backend"):
        assert key in man


def test_limit_mean_anchor(tmp_path):
    cfg = {"density": UNIFORM1, "grid": {"t": [0.5]}, "series": {"epsilon": 1e-6}}
    code, out = run(tmp_path, "limit-mean", cfg)
    assert code == 0
    data = json.loads((out / "limit_mean.json").read_text())
    (val,) = data["values"]
    assert val == pytest.approx(0.36788, abs=1e-5)
    trunc = data["truncation"]
    assert trunc["tail_bound"] <= 1e-6 and trunc["k_max"] >= 1


@pytest.mark.parametrize("bad", [
    {"density": UNIFORM1, "scaling": {"n": -5}},
    {"density": UNIFORM1, "scaling": {"n": 10}, "colour": "red"},
    {"density": {"kind": "uniform-cube"}, "scaling": {"n": 10}},
    {"scaling": {"n": 10}},
])
def test_malformed_config_exit_2_no_artifacts(tmp_path, bad):
    code, out = run(tmp_path, "sample", bad)
    assert code == 2
    assert not out.exists()


def test_missing_section_and_small_fclt_rejected(tmp_path):
    code, out = run(tmp_path, "euler-curve", {"density": UNIFORM1, "scaling": {"n": 10}})
    assert code == 2 and not out.exists()
    cfg = {"density": UNIFORM1, "grid": {"t": [0.5]}, "campaign": {"n_values": [100], "replications": 20}}
    code, out = run(tmp_path, "fclt", cfg)
    assert code == 2 and not out.exists()


def test_overrides_beat_file_and_are_recorded(tmp_path):
    cfg = {"density": UNIFORM1, "grid": {"t": [0.25, 0.5]},
           "campaign": {"n_values": [200], "replications": 5}, "seeds": {"base": 1}}
    code, out = run(tmp_path, "slln", cfg, "--seed", "7", "--reps", "6", "--jobs", "1")
    assert code in (0, 3)
    man = json.loads((out / "manifest.json").read_text())
    eff = man["effective_config"]
    assert eff["seeds"]["base"] == 7 and eff["campaign"]["replications"] == 6
    assert man["seeds"]["base"] == 7
    assert yaml.safe_load((out / "config.yaml").read_text()) == eff


def test_clique_budget_guard_exit_4(tmp_path):
    cfg = {"density": UNIFORM1, "scaling": {"n": 200}, "grid": {"t_max": 5.0}, "clique_budget": 50}
    code, out = run(tmp_path, "euler-curve", cfg)
    assert code == 4
    assert (out / "manifest.json").exists()


def test_series_cap_guard_exit_4(tmp_path):
    cfg = {"density": UNIFORM1, "grid": {"t": [200.0]}}
    code, _ = run(tmp_path, "limit-mean", cfg)
    assert code == 4


def test_gate_failure_exit_3(tmp_path):
    # a vertex-only curve cannot match the full limit once edges appear
    cfg = {"density": UNIFORM1, "grid": {"t": [0.5, 1.0]}, "dim_cap": 0,
           "campaign": {"n_values": [300.0, 600.0], "replications": 10, "require_exact": False}}
    code, out = run(tmp_path, "slln", cfg)
    assert code == 3
    assert json.loads((out / "report.json").read_text())["passed"] is False


def test_env_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path / "root"))
    path = write_cfg(tmp_path, {"density": UNIFORM1, "scaling": {"n": 20}, "seeds": {"base": 3}})
    assert main(["sample", path]) == 0
    (run_dir,) = (tmp_path / "root").iterdir()
    assert run_dir.name.startswith("sample-")
    assert (run_dir / "points.csv").read_text().startswith("x0\n")


def test_identical_runs_byte_identical(tmp_path):
    cfg = {"density": UNIFORM1, "grid": {"t": [0.25, 0.5]},
           "campaign": {"n_values": [300], "replications": 8}}
    _, a = run(tmp_path, "moments", cfg, out="a")
    _, b = run(tmp_path, "moments", cfg, out="b")
    for name in ("report.json", "comparison.csv", "config.yaml"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ma, mb = (json.loads((d / "manifest.json").read_text()) for d in (a, b))
    assert ma["artifacts"] == mb["artifacts"] and ma["config_hash"] == mb["config_hash"]


def test_psi_and_covariance_commands(tmp_path):
    cfg = {"density": UNIFORM1, "grid": {"t": [0.25, 0.5]}, "psi": {"j": 1, "k1": 1, "k2": 1},
           "series": {"epsilon": 1e-3}}
    code, out = run(tmp_path, "psi", cfg, out="psi")
    assert code == 0
    lines = (out / "psi.csv").read_text().splitlines()
    assert len(lines) == 1 + 4
    code, out = run(tmp_path, "gp-sample", {**cfg, "gp": {"paths": 3}}, out="gp")
    assert code == 0
    assert len((out / "gp_paths.csv").read_text().splitlines()) == 4
