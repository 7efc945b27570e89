import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from fraclab.cli import dumps, main, run_command
from fraclab.config import ConfigError, RunConfig, load_config, with_overrides

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL_SIM = {
    "manifold": {"n": 2, "warping": {"kind": "flat"}, "r_max": 20.0, "nodes": 128, "core_spacing": 0.05},
    "weight": {"alpha": 1.0, "N": "auto"},
    "nonlinearity": {"p": 1.25},
    "simulation": {"dt": 0.02, "t_end": 1.0, "rho": 1.0, "mass": 1.0},
}


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(path)


def run(tmp_path, command, cfg, sub="out"):
    out = tmp_path / sub
    code = main([command, "--config", cfg, "--out", str(out)])
    report = json.loads((out / "report.json").read_text())
    assert report["exit_code"] == code
    return code, report, out


def test_check_manifold_flat_passes(tmp_path):
    cfg = write(tmp_path, {"manifold": {"n": 2, "r_max": 20.0, "nodes": 256}})
    code, rep, _ = run(tmp_path, "check-manifold", cfg)
    assert code == 0 and rep["status"] == "pass" and rep["violation"] is None
    assert rep["result"]["assumptions"]["passes"]


def test_check_manifold_hyperbolic_fails(tmp_path):
    code, rep, _ = run(tmp_path, "check-manifold", str(CONFIGS / "hyperbolic.json"))
    assert code == 1 and rep["status"] == "violation"
    names = [v["invariant"] for v in rep["violations"]]
    assert "volume_growth" in names
    assert all(v["module"] == "manifold" for v in rep["violations"])


def test_malformed_json_exits_2(tmp_path, capsys):
    cfg = write(tmp_path, "{not json")
    code, rep, _ = run(tmp_path, "check-manifold", cfg)
    assert code == 2 and rep["status"] == "error"
    assert "malformed" in capsys.readouterr().err


def test_unknown_keys_exit_2(tmp_path):
    for bad in ({"manifold": {"n": 2, "radius": 3}}, {"extras": {}}, {"simulation": {"dt": -1}}):
        code, rep, _ = run(tmp_path, "check-manifold", write(tmp_path, bad))
        assert code == 2 and rep["error"]["type"] == "ConfigError"


def test_missing_config_exits_2(tmp_path):
    code, rep, _ = run(tmp_path, "lifespan", str(tmp_path / "absent.json"))
    assert code == 2


def test_domain_error_exits_2(tmp_path):
    cfg = write(tmp_path, {"manifold": {"n": 1, "warping": {"kind": "hyperbolic"}}})
    code, rep, _ = run(tmp_path, "check-manifold", cfg)
    assert code == 2 and rep["error"]["module"] == "manifold"


def test_lifespan_command(tmp_path, capsys):
    code, rep, _ = run(tmp_path, "lifespan", str(CONFIGS / "lifespan.json"))
    assert code == 0
    res = rep["result"]
    assert res["lifespan"]["t_star"] == pytest.approx(5.0)
    assert res["t_ode"] == pytest.approx(5.0, rel=1e-2)
    assert "t_star=5" in capsys.readouterr().out


def test_lifespan_supercritical_exits_2(tmp_path):
    cfg = write(tmp_path, {"manifold": {"n": 2}, "nonlinearity": {"p": 1.6}})
    code, rep, _ = run(tmp_path, "lifespan", cfg)
    assert code == 2 and rep["error"]["type"] == "SupercriticalError"


def test_sweep_respects_thread_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("FRACLAB_THREADS", "2")
    code, rep, _ = run(tmp_path, "sweep", str(CONFIGS / "sweep_lifespan.json"))
    assert code == 0 and rep["workers"] == 2 and len(rep["runs"]) == 9
    ps = sorted({r["overrides"]["nonlinearity.p"] for r in rep["runs"]})
    assert ps == [1.1, 1.25, 1.4]
    monkeypatch.setenv("FRACLAB_THREADS", "1")
    code, rep1, _ = run(tmp_path, "sweep", str(CONFIGS / "sweep_lifespan.json"), "serial")
    assert rep1["workers"] == 1 and rep1["runs"] == rep["runs"]
    monkeypatch.setenv("FRACLAB_THREADS", "zero")
    code, _, _ = run(tmp_path, "sweep", str(CONFIGS / "sweep_lifespan.json"), "bad")
    assert code == 2


def test_sweep_reports_first_violation(tmp_path, monkeypatch):
    monkeypatch.setenv("FRACLAB_THREADS", "1")
    cfg = write(tmp_path, {"manifold": {"n": 2, "r_max": 10.0, "nodes": 256},
                           "sweep": {"command": "check-manifold",
                                     "grid": {"manifold.warping.kind": ["flat", "hyperbolic"]}}})
    code, rep, _ = run(tmp_path, "sweep", cfg)
    assert code == 1
    v = rep["violation"]
    assert v["module"] == "manifold" and v["overrides"] == {"manifold.warping.kind": "hyperbolic"}


def test_simulate_writes_series_and_is_deterministic(tmp_path):
    cfg = write(tmp_path, SMALL_SIM)
    code, rep, out = run(tmp_path, "simulate", cfg, "a")
    assert code == 0
    lines = (out / "series.csv").read_text().splitlines()
    assert lines[0] == "t,phi,l2,linf" and len(lines) == len(rep["result"]["blowup"]["series"]) + 1
    blow = rep["result"]["blowup"]
    assert blow["N_trace"] and blow["N"] == blow["N_trace"][-1][0]
    run(tmp_path, "simulate", cfg, "b")
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_simulate_precondition_exits_2(tmp_path):
    data = json.loads(json.dumps(SMALL_SIM))
    data["simulation"].pop("mass")
    data["simulation"]["amplitude"] = 0.0
    code, rep, _ = run(tmp_path, "simulate", write(tmp_path, data))
    assert code == 2 and rep["error"]["type"] == "PreconditionError"


def test_verify_weight_violation_is_named(tmp_path):
    data = json.loads((CONFIGS / "gold_line.json").read_text())
    data["weight"]["gold_tol"] = 1e-12
    code, rep, out = run(tmp_path, "verify-weight", write(tmp_path, data))
    assert code == 1
    assert rep["violation"] == rep["violations"][0]
    assert rep["violation"]["invariant"] == "gold_identity" and rep["violation"]["module"] == "weight"
    assert (out / "ratios.csv").read_text().startswith("t,r,ratio\n")


def test_verify_weight_reports_norm_exponent(tmp_path):
    code, rep, _ = run(tmp_path, "verify-weight", str(CONFIGS / "gold_line.json"))
    assert code == 0
    sc = rep["result"]["h_norm_scaling"]
    assert sc["predicted_exponent"] == pytest.approx(0.5)
    assert sc["reference_exponent"] == -1.0 and sc["matches_reference"] is False


def test_verify_lemmas_default_and_gated(tmp_path):
    code, rep, _ = run(tmp_path, "verify-lemmas", str(CONFIGS / "logblend.json"))
    assert code == 0 and len(rep["result"]["fits"]) == 3
    code, rep, _ = run(tmp_path, "verify-lemmas", str(CONFIGS / "hyperbolic.json"), "hyp")
    assert code == 1 and rep["violation"]["module"] == "manifold"


def test_every_violation_names_invariant_and_module(tmp_path):
    for cmd, cfg in (("check-manifold", CONFIGS / "hyperbolic.json"),
                     ("verify-lemmas", CONFIGS / "hyperbolic.json")):
        code, rep, _ = run(tmp_path, cmd, str(cfg), cmd)
        assert code == 1
        for v in rep["violations"]:
            assert v["invariant"] and v["module"]


def test_console_entry_point_exit_codes(tmp_path):
    env = dict(os.environ)
    ok = subprocess.run([sys.executable, "-m", "fraclab", "lifespan", "--config", str(CONFIGS / "lifespan.json"),
                         "--out", str(tmp_path / "ok")], capture_output=True, text=True, env=env)
    assert ok.returncode == 0
    bad = subprocess.run([sys.executable, "-m", "fraclab", "lifespan", "--config", write(tmp_path, "[")],
                         capture_output=True, text=True, env=env, cwd=tmp_path)
    assert bad.returncode == 2
    usage = subprocess.run([sys.executable, "-m", "fraclab", "fly", "--config", "x"], capture_output=True)
    assert usage.returncode == 2


def test_config_round_trip_and_overrides():
    cfg = load_config(CONFIGS / "blowup_flat2d.json")
    again = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    raw = {"manifold": {"n": 2}}
    new = with_overrides(raw, {"manifold.warping.kind": "log-blend", "nonlinearity.p": 1.1})
    assert new == {"manifold": {"n": 2, "warping": {"kind": "log-blend"}}, "nonlinearity": {"p": 1.1}}
    assert raw == {"manifold": {"n": 2}}


def test_config_rejections():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"simulation": {"mass": 1.0, "amplitude": 1.0}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"sweep": {"command": "sweep"}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"sweep": {"grid": {"p": [1.1]}}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict([])
    assert RunConfig.from_dict({}).simulation.mass == 1.0


def test_run_command_direct():
    code, rep, files = run_command("lifespan", {"lifespan": {"N": 4.0, "phi0": 2.0}})
    assert code == 0 and rep["result"]["lifespan"]["phi0"] == 2.0
    text = dumps(rep)
    assert "NaN" not in text and "Infinity" not in text
