import json
import os
import subprocess
import sys

import numpy as np
import pytest

from frontcontrol import io as fio
from frontcontrol.cli import RunConfig, main, parse_config
from frontcontrol.errors import ConfigError
from frontcontrol.fronttrack import ControlPair, Profile


def write_cfg(tmp_path, doc, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


SIM = {"model": {"name": "gas"}, "interval": [0, 1], "nu": 0.01, "horizon": 2.0, "seed": 5,
       "initial": {"random": {"pieces": 8, "tv": 0.2}}, "sample_times": [0.5, 1.0]}


def test_config_round_trip():
    cfg = parse_config(json.dumps(SIM))
    again = parse_config(cfg.dumps())
    assert again == cfg and again.digest() == cfg.digest()
    assert parse_config("") == RunConfig()


@pytest.mark.parametrize("doc", [
    {"bogus": 1},
    {"model": {"name": "gas", "colour": "red"}},
    {"options": {"rhoo": 0.1}},
    {"nu": -1},
    {"nu": True},
    {"interval": [1, 0]},
    {"seed": -3},
    {"seed": 2**64},
    {"initial": {"breakpoints": [0, 1]}},
    {"initial": {"random": {"pieces": 3, "wiggle": 1}}},
    {"options": {"gamma": 3.5}},
    {"options": {"cycles": 1.5}},
])
def test_strict_config(doc):
    with pytest.raises(ConfigError):
        parse_config(json.dumps(doc))


def test_invalid_json():
    with pytest.raises(ConfigError):
        parse_config("{not json")


def test_simulate_outputs_and_determinism(tmp_path):
    cfg = write_cfg(tmp_path, SIM)
    outs = [str(tmp_path / "o1"), str(tmp_path / "o2")]
    for o in outs:
        assert main(["simulate", "--config", cfg, "--out", o]) == 0
    for f in ("events.csv", "segments.csv", "traces.csv", "snapshots.csv", "final.csv"):
        assert open(os.path.join(outs[0], f), "rb").read() == open(os.path.join(outs[1], f), "rb").read()
    man = json.load(open(os.path.join(outs[0], "manifest.json")))
    assert man["status"] == 0 and man["seed"] == 5 and man["schema"] == "frontcontrol/manifest/1"
    assert "events.csv" in man["files"]
    assert open(os.path.join(outs[0], "events.csv")).readline().startswith("# schema: frontcontrol/events/")
    # a different seed changes the random initial data
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o3"), "--seed", "6"]) == 0
    assert open(os.path.join(outs[0], "final.csv")).read() != open(tmp_path / "o3" / "final.csv").read()


def test_profile_and_controls_files(tmp_path, temple):
    p = Profile([0, 0.5, 1], [[-2.0, 2.0], [-2.1, 1.9]])
    fio.write_profile(tmp_path / "phi.csv", p, temple.state_names)
    ctrl = ControlPair([(1.0, [-2.0, 1.8]), (1.0, None)], [(2.0, [-2.2, 2.0])])
    fio.write_controls(tmp_path / "ctrl.csv", ctrl, temple.state_names)
    back = fio.read_controls(tmp_path / "ctrl.csv")
    assert back.side("a")[1][1] is None and np.array_equal(back.side("b")[0][1], [-2.2, 2.0])
    assert np.array_equal(fio.read_profile(tmp_path / "phi.csv").states, p.states)
    cfg = write_cfg(tmp_path, {"initial": {"file": "phi.csv"}, "controls": {"file": "ctrl.csv"},
                               "horizon": 3.0, "nu": 0.05})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    events = fio.read_csv(tmp_path / "o" / "events.csv", "events")[1]
    assert any(r[3] == "control-change" for r in events)


def test_schema_mismatch(tmp_path):
    fio.write_csv(tmp_path / "x.csv", "events", ["a"], [[1]])
    with pytest.raises(ConfigError):
        fio.read_profile(tmp_path / "x.csv")


def test_riemann_subcommand(tmp_path):
    cfg = write_cfg(tmp_path, {"nu": 0.25, "options": {"left": [-2, 1], "right": [-2, 2]}})
    assert main(["riemann", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    cols, rows = fio.read_csv(tmp_path / "o" / "fan.csv", "fan")
    assert cols[:3] == ["family", "kind", "speed"] and len(rows) == 4


def test_attain_check_subcommand(tmp_path):
    cfg = write_cfg(tmp_path, {"nu": 0.01, "options": {"rho": 0.125},
                               "initial": {"breakpoints": [0, 1], "start": [[-2, 2]], "end": [[-2, 2.05]]}})
    assert main(["attain-check", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rep = json.load(open(tmp_path / "o" / "report.json"))
    assert rep["ok"] and rep["ratios"][1] == pytest.approx(0.05, rel=0.15)   # staircase overshoot ~ cell / h
    steep = write_cfg(tmp_path, {"nu": 0.01, "options": {"rho": 0.125},
                                 "initial": {"breakpoints": [0, 1], "start": [[-2, 2]], "end": [[-2, 2.5]]}}, "s.json")
    assert main(["attain-check", "--config", steep, "--out", str(tmp_path / "s")]) == 0
    assert not json.load(open(tmp_path / "s" / "report.json"))["ok"]


def test_validate_model_exit_codes(tmp_path):
    assert main(["validate-model", "--config", write_cfg(tmp_path, {"model": {"name": "gas"}}),
                 "--out", str(tmp_path / "g")]) == 0
    assert main(["validate-model", "--config", write_cfg(tmp_path, {"model": {"name": "psystem"}}, "p.json"),
                 "--out", str(tmp_path / "p")]) == 3
    rep = json.load(open(tmp_path / "p" / "report.json"))
    assert rep["schema"] == "frontcontrol/hypotheses/1"


def test_config_error_exit(tmp_path):
    assert main(["simulate", "--config", write_cfg(tmp_path, {"bogus": 1}), "--out", str(tmp_path / "o")]) == 2
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 2
    # no initial profile: config error raised inside the run
    assert main(["simulate", "--out", str(tmp_path / "o2")]) == 2
    assert json.load(open(tmp_path / "o2" / "manifest.json"))["status"] == 2


def test_numerical_abort_exit(tmp_path):
    cfg = write_cfg(tmp_path, {"nu": 0.001, "horizon": 1.0, "options": {"front_cap": 10},
                               "initial": {"breakpoints": [0, 0.5, 1], "states": [[-2, 1.5], [-2, 2.5]]}})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 4


def test_steer_and_stabilize_subcommands(tmp_path):
    steer = {"nu": 0.05, "initial": {"breakpoints": [0, 0.5, 1], "states": [[-2, 2], [-2.1, 2.1]]},
             "options": {"tau": 20.0, "target": {"breakpoints": [0, 1], "start": [[-2, 2]], "end": [[-2, 2.05]]}}}
    assert main(["steer", "--config", write_cfg(tmp_path, steer), "--out", str(tmp_path / "s")]) == 0
    m = json.load(open(tmp_path / "s" / "metrics.json"))
    assert m["l1_error_discrete"] < 1e-12
    stab = {"model": {"name": "gas"}, "nu": 0.001, "initial": {"random": {"pieces": 6, "tv": 0.05}},
            "options": {"u_star": [1.0, 0.05], "cycles": 1}}
    assert main(["stabilize", "--config", write_cfg(tmp_path, stab, "b.json"), "--out", str(tmp_path / "b")]) == 0
    m = json.load(open(tmp_path / "b" / "metrics.json"))
    assert m["tv"][-1] == 0.0


def test_counterexample_subcommand(tmp_path):
    doc = {"model": {"name": "gas"}, "nu": 1e-6, "horizon": 0.5,
           "options": {"N": 6, "amplitude": 0.01, "n_samples": 3}}
    assert main(["counterexample", "--config", write_cfg(tmp_path, doc), "--out", str(tmp_path / "c")]) == 0
    for f in ("census.csv", "tags.csv", "segments.csv", "events.csv", "metrics.json", "manifest.json"):
        assert (tmp_path / "c" / f).exists()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "frontcontrol", "validate-model", "--out", str(tmp_path / "o")],
                       capture_output=True, text=True)
    assert r.returncode == 0
    r = subprocess.run([sys.executable, "-m", "frontcontrol", "nope"], capture_output=True, text=True)
    assert r.returncode == 2
