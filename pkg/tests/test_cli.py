"""Command-line entry point: config validation, outputs, exit codes."""
import json
from pathlib import Path

import pytest

from attractorlab.cli import load_config, main
from attractorlab.errors import ConfigInvalid

TOY = {
    "model": {"kind": "toy_contraction", "truncation": 4},
    "seed": 5,
    "ensemble_size": 3,
    "horizon": 10.0,
    "dt": 0.02,
    "radius": 1.0,
    "omega": {"t_transient": 8.0, "t_max": 10.0, "sample_stride": 10, "cluster_tol": 1e-3},
    "library": {"size": 2, "t_back": 10.0, "horizon": 8.0},
}


def _write_cfg(tmp_path, payload, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


def _run(tmp_path, sub, payload, **extra):
    cfg = dict(payload)
    out = tmp_path / "out"
    cfg["output_dir"] = str(out)
    argv = [sub, "--config", _write_cfg(tmp_path, cfg)]
    for k, v in extra.items():
        argv += [f"--{k}", str(v)]
    return main(argv), out


FIVE = ("trajectories.csv", "ledger.csv", "sets.json", "reports.json", "manifest.json")


def test_simulate_writes_all_outputs(tmp_path):
    code, out = _run(tmp_path, "simulate", TOY)
    assert code == 0
    for f in FIVE:
        assert (out / f).exists(), f
    header = (out / "trajectories.csv").read_text().splitlines()[0]
    assert header == "time,member,c0,c1,c2,c3"
    led = (out / "ledger.csv").read_text().splitlines()
    assert led[0] == "member,time,energy,enstrophy,work"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["artifact"] == "attractorlab"
    assert manifest["subcommand"] == "simulate"
    assert manifest["seed"] == 5
    assert manifest["outputs"] == sorted(FIVE)
    assert json.loads((out / "sets.json").read_text()) == {}


def test_omega_subcommand_reports_origin(tmp_path):
    code, out = _run(tmp_path, "omega", TOY)
    assert code == 0
    sets = json.loads((out / "sets.json").read_text())
    pts = sets["omega"]["points"]
    assert len(pts) == 1
    assert max(abs(v) for v in pts[0]) < 1e-3


def test_attractor_subcommand_attaches_attraction(tmp_path):
    code, out = _run(tmp_path, "attractor", TOY)
    assert code == 0
    sets = json.loads((out / "sets.json").read_text())
    assert sets["attractor"]["attraction"]["t_entry"] is not None
    reports = json.loads((out / "reports.json").read_text())
    assert reports["checks"][0]["name"] == "attracting"
    assert reports["checks"][0]["status"] == "pass"


def test_seed_and_out_overrides(tmp_path):
    cfg = dict(TOY)
    cfg["output_dir"] = str(tmp_path / "ignored")
    path = _write_cfg(tmp_path, cfg)
    dest = tmp_path / "elsewhere"
    code = main(["simulate", "--config", path, "--seed", "99", "--out", str(dest)])
    assert code == 0
    manifest = json.loads((dest / "manifest.json").read_text())
    assert manifest["seed"] == 99
    assert not (tmp_path / "ignored").exists()


def test_rerun_is_byte_identical(tmp_path):
    payload = dict(TOY)
    payload["checks"] = [{"name": "energy"}, {"name": "point_convergence"}]
    code1, out = _run(tmp_path, "verify", payload)
    first = {f: (out / f).read_bytes() for f in FIVE}
    code2, out = _run(tmp_path, "verify", payload)
    assert code1 == code2 == 0
    for f in FIVE:
        assert (out / f).read_bytes() == first[f], f


def test_verify_failure_exit_code(tmp_path):
    payload = dict(TOY)
    payload["checks"] = [{"name": "tracking", "eps_ladder": [1e-15]}]
    code, out = _run(tmp_path, "verify", payload)
    assert code == 2
    reports = json.loads((out / "reports.json").read_text())
    assert reports["checks"][0]["status"] == "fail"


def test_verify_hypothesis_fail_exit_code(tmp_path):
    # single-member sequence cannot certify weak convergence
    payload = dict(TOY)
    payload["checks"] = [{"name": "point_convergence", "n_seq": 1, "t_star": 4.0}]
    code, out = _run(tmp_path, "verify", payload)
    assert code == 3
    reports = json.loads((out / "reports.json").read_text())
    assert reports["checks"][0]["status"] == "hypothesis_fail"


def test_fail_beats_hypothesis_fail(tmp_path):
    payload = dict(TOY)
    payload["checks"] = [
        {"name": "point_convergence", "n_seq": 1, "t_star": 4.0},
        {"name": "tracking", "eps_ladder": [1e-15]},
    ]
    code, _ = _run(tmp_path, "verify", payload)
    assert code == 2


def test_runtime_error_recorded_and_exit_one(tmp_path):
    # omega window beyond the integrated horizon is a runtime error, not a crash
    payload = dict(TOY)
    payload["omega"] = dict(TOY["omega"], t_max=100.0, t_transient=50.0)
    code, out = _run(tmp_path, "omega", payload)
    assert code == 1
    reports = json.loads((out / "reports.json").read_text())
    assert reports["error"]["type"] == "HorizonTooShort"
    for f in FIVE:
        assert (out / f).exists(), f


def test_absorbing_check_on_forced_model(tmp_path):
    payload = {
        "model": {
            "kind": "galerkin_nse_2d",
            "truncation": 2,
            "forcing": [{"mode": [1, 0], "amplitude": 0.1}],
        },
        "seed": 1,
        "ensemble_size": 2,
        "horizon": 4.0,
        "dt": 0.02,
        "checks": [{"name": "absorbing", "n_samples": 8, "horizon": 4.0}],
    }
    code, out = _run(tmp_path, "verify", payload)
    assert code == 0
    rep = json.loads((out / "reports.json").read_text())["checks"][0]
    assert rep["status"] == "pass"
    assert 0.0 < rep["worst_entry_time"] < 4.0


def test_config_error_messages(tmp_path, capsys):
    bad = dict(TOY)
    bad["modle"] = 1
    assert main(["simulate", "--config", _write_cfg(tmp_path, bad, "a.json")]) == 1
    assert "modle" in capsys.readouterr().err
    bad2 = {"model": {"kind": "toy_contraction", "truncation": 4, "forcng": []},
            "horizon": 1.0, "dt": 0.1}
    assert main(["simulate", "--config", _write_cfg(tmp_path, bad2, "b.json")]) == 1
    assert "model.forcng" in capsys.readouterr().err
    bad3 = dict(TOY)
    bad3["checks"] = [{"name": "nonsense"}]
    assert main(["verify", "--config", _write_cfg(tmp_path, bad3, "c.json")]) == 1
    assert "checks[0].name" in capsys.readouterr().err
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 1
    assert "not found" in capsys.readouterr().err


def test_load_config_requires_core_fields(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"horizon": 1.0, "dt": 0.1}))
    with pytest.raises(ConfigInvalid, match="model"):
        load_config(p)
    p.write_text(json.dumps({"model": {"kind": "toy_contraction", "truncation": 2}, "dt": 0.1}))
    with pytest.raises(ConfigInvalid, match="horizon"):
        load_config(p)
    p.write_text(json.dumps({"model": {"kind": "sand", "truncation": 2}, "horizon": 1.0, "dt": 0.1}))
    with pytest.raises(ConfigInvalid, match="model.kind"):
        load_config(p)
