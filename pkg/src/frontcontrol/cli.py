"""Command-line entry point: ``frontcontrol <subcommand> --config run.json --out dir``.

Exit codes: 0 success, 2 configuration error, 3 model hypothesis failure,
4 numerical abort (front cap, out-of-box state, incomplete washout...).
"""
from __future__ import annotations

import argparse
from dataclasses import asdict, dataclass, field
import hashlib
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from . import io as fio
from .errors import (ConfigError, DegeneracyError, DomainError, HypothesisError, NumericalAbort)
from .fronttrack import ControlPair, FrontTracker, Profile
from .models import make_model, validate_model

EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_ABORT = 0, 2, 3, 4

SUBCOMMANDS = ("riemann", "simulate", "attain-check", "steer", "stabilize", "counterexample", "validate-model")

_TOP = {"model", "interval", "initial", "controls", "nu", "horizon", "sample_times", "seed", "out", "options"}
_MODEL = {"name", "params", "box"}
_OPTIONS = {"rho", "h", "eps_jump", "tau", "u_star", "cycles", "N", "gamma", "K", "amplitude", "target",
            "left", "right", "n_samples", "front_cap", "lemma_k", "delta"}
_PROFILE_FORMS = ({"breakpoints", "states"}, {"file"}, {"random"}, {"breakpoints", "start", "end"})


@dataclass
class RunConfig:
    model: dict = field(default_factory=lambda: {"name": "temple2", "params": {}, "box": None})
    interval: list = field(default_factory=lambda: [0.0, 1.0])
    initial: dict | None = None
    controls: object = "absorbing"
    nu: float = 0.05
    horizon: float | None = None
    sample_times: list = field(default_factory=list)
    seed: int = 0
    out: str | None = None
    options: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def digest(self):
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(obj) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(extra)}")


def _num(x, where, positive=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{where} must be a number")
    x = float(x)
    if not np.isfinite(x) or (positive and x <= 0):
        raise ConfigError(f"{where} must be {'positive' if positive else 'finite'}")
    return x


def _profile_spec(spec, where):
    if spec is None:
        return None
    if not isinstance(spec, dict) or set(spec) not in _PROFILE_FORMS:
        raise ConfigError(f"{where} must have keys {[sorted(f) for f in _PROFILE_FORMS]}")
    if "random" in spec:
        _check_keys(spec["random"], {"pieces", "tv"}, f"{where}.random")
    return spec


def parse_config(text):
    """Strict JSON parsing; unknown keys are rejected at every level."""
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    _check_keys(raw, _TOP, "config")
    cfg = RunConfig()
    if "model" in raw:
        _check_keys(raw["model"], _MODEL, "model")
        m = {"name": "temple2", "params": {}, "box": None}
        m.update(raw["model"])
        if not isinstance(m["params"], dict):
            raise ConfigError("model.params must be an object")
        cfg.model = m
    if "interval" in raw:
        iv = raw["interval"]
        if not (isinstance(iv, list) and len(iv) == 2):
            raise ConfigError("interval must be [a, b]")
        a, b = (_num(v, "interval") for v in iv)
        if not a < b:
            raise ConfigError("interval needs a < b")
        cfg.interval = [a, b]
    cfg.initial = _profile_spec(raw.get("initial"), "initial")
    if "controls" in raw:
        c = raw["controls"]
        if c != "absorbing":
            _check_keys(c, {"file", "alpha", "beta"}, "controls")
        cfg.controls = c
    if "nu" in raw:
        cfg.nu = _num(raw["nu"], "nu", positive=True)
    if raw.get("horizon") is not None:
        cfg.horizon = _num(raw["horizon"], "horizon", positive=True)
    if "sample_times" in raw:
        cfg.sample_times = [_num(t, "sample_times") for t in raw["sample_times"]]
    if "seed" in raw:
        s = raw["seed"]
        if isinstance(s, bool) or not isinstance(s, int) or s < 0 or s >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        cfg.seed = s
    if raw.get("out") is not None:
        cfg.out = str(raw["out"])
    if "options" in raw:
        _check_keys(raw["options"], _OPTIONS, "options")
        opts = dict(raw["options"])
        if "gamma" in opts and not 1.0 < _num(opts["gamma"], "gamma") < 3.0:
            raise ConfigError("options.gamma must lie in (1, 3)")
        for k in ("rho", "h", "eps_jump", "tau", "amplitude", "K", "delta"):
            if k in opts:
                _num(opts[k], f"options.{k}", positive=k != "eps_jump")
        for k in ("cycles", "N", "n_samples", "front_cap"):
            if k in opts and (not isinstance(opts[k], int) or opts[k] < 0):
                raise ConfigError(f"options.{k} must be a nonnegative integer")
        if "target" in opts:
            _profile_spec(opts["target"], "options.target")
        cfg.options = opts
    return cfg


# -- building blocks from the config -------------------------------------------

def build_model(cfg):
    params = dict(cfg.model.get("params") or {})
    if cfg.model.get("box") is not None:
        params["box"] = tuple(tuple(map(float, r)) for r in cfg.model["box"])
    try:
        return make_model(cfg.model["name"], **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _resolve(path, base):
    return path if os.path.isabs(path) else os.path.join(base, path)


def random_profile(model, a, b, pieces, tv, rng):
    """Seeded piecewise-constant profile with the given variation in Riemann coordinates."""
    centre = model.to_riemann(model.box.mean(axis=1))
    d = rng.uniform(-1.0, 1.0, (pieces - 1, model.n))
    d *= tv / np.abs(d).sum()
    w = np.vstack([np.zeros(model.n), np.cumsum(d, axis=0)])
    w += centre - w.mean(axis=0)
    xs = np.sort(rng.uniform(a, b, pieces - 1))
    return Profile(np.r_[a, xs, b], np.array([model.from_riemann(v) for v in w]))


def build_profile(spec, model, cfg, base_dir, rng):
    a, b = cfg.interval
    if spec is None:
        raise ConfigError("an initial profile is required for this subcommand")
    if "file" in spec:
        return fio.read_profile(_resolve(spec["file"], base_dir))
    if "random" in spec:
        r = spec["random"]
        return random_profile(model, a, b, int(r.get("pieces", 8)), float(r.get("tv", 0.1)), rng)
    if "start" in spec:
        from .steer import PiecewiseAffine
        return PiecewiseAffine(spec["breakpoints"], spec["start"], spec["end"])
    try:
        return Profile(spec["breakpoints"], spec["states"])
    except ValueError as exc:
        raise ConfigError(f"bad profile: {exc}") from None


def build_controls(cfg, base_dir):
    c = cfg.controls
    if c == "absorbing":
        return ControlPair.absorbing()
    if "file" in c:
        return fio.read_controls(_resolve(c["file"], base_dir))
    return ControlPair(c.get("alpha", []), c.get("beta", []))


# -- subcommands -----------------------------------------------------------------

def _metrics_traj(traj):
    return {"events": len(traj.events), "t_end": traj.t_end, "fronts_total": len(traj.fronts),
            "injected": traj.injected, "conservation": traj.conservation}


def cmd_riemann(cfg, model, out, ctx):
    from .riemann import fan_rows, solve_riemann
    o = cfg.options
    if "left" not in o or "right" not in o:
        raise ConfigError("riemann needs options.left and options.right")
    fan = solve_riemann(model, o["left"], o["right"], cfg.nu)
    names = list(model.state_names)
    fio.write_csv(os.path.join(out, "fan.csv"), "fan",
                  ["family", "kind", "speed", "strength", *[f"left_{s}" for s in names],
                   *[f"right_{s}" for s in names]], fan_rows(model, fan))
    return {"waves": len(fan)}


def cmd_simulate(cfg, model, out, ctx):
    phi = build_profile(cfg.initial, model, cfg, ctx["base"], ctx["rng"])
    ctrl = build_controls(cfg, ctx["base"])
    horizon = cfg.horizon if cfg.horizon is not None else 1.0
    eng = FrontTracker(model, phi, ctrl, nu=cfg.nu, front_cap=cfg.options.get("front_cap", 10**6),
                       track_conservation=model.conservative)
    traj = eng.run_until(horizon, sample_times=cfg.sample_times)
    names = list(model.state_names)
    fio.write_events(os.path.join(out, "events.csv"), traj)
    fio.write_segments(os.path.join(out, "segments.csv"), traj)
    fio.write_traces(os.path.join(out, "traces.csv"), traj, names)
    rows = []
    for t in sorted(traj.snapshots):
        rows += [[t, *r] for r in fio.profile_rows(traj.snapshots[t])]
    fio.write_csv(os.path.join(out, "snapshots.csv"), "snapshots", ["t", "x0", "x1", *names], rows)
    fio.write_profile(os.path.join(out, "final.csv"), eng.profile(), names)
    return _metrics_traj(traj)


def cmd_attain_check(cfg, model, out, ctx):
    from .oleinik import check_membership
    psi = build_profile(cfg.initial, model, cfg, ctx["base"], ctx["rng"])
    o = cfg.options
    if "rho" not in o:
        raise ConfigError("attain-check needs options.rho")
    if not isinstance(psi, Profile):
        psi = psi.fine()
    ok, rep = check_membership(model, psi, o["rho"], h=o.get("h"), eps_jump=o.get("eps_jump"), nu=cfg.nu)
    fio.write_json(os.path.join(out, "report.json"), "oleinik", rep.to_dict())
    return {"member": ok, "ratios": rep.ratios.tolist()}


def cmd_steer(cfg, model, out, ctx):
    from .steer import horizon, steer_to_target
    phi = build_profile(cfg.initial, model, cfg, ctx["base"], ctx["rng"])
    o = cfg.options
    if "target" not in o:
        raise ConfigError("steer needs options.target")
    psi = build_profile(o["target"], model, cfg, ctx["base"], ctx["rng"])
    tau = o.get("tau", 1.05 * horizon(model, *cfg.interval))
    try:
        plan = steer_to_target(model, phi, psi, tau, cfg.nu, rho=o.get("rho"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    names = list(model.state_names)
    fio.write_controls(os.path.join(out, "controls.csv"), plan.controls, names)
    fio.write_profile(os.path.join(out, "achieved.csv"), plan.achieved, names)
    m = plan.metrics()
    fio.write_json(os.path.join(out, "metrics.json"), "steer", m)
    return m


def cmd_stabilize(cfg, model, out, ctx):
    from .stabilize import stabilize
    phi = build_profile(cfg.initial, model, cfg, ctx["base"], ctx["rng"])
    o = cfg.options
    if "u_star" not in o:
        raise ConfigError("stabilize needs options.u_star")
    traj, rep = stabilize(model, phi, o["u_star"], int(o.get("cycles", 3)), cfg.nu, delta=o.get("delta"))
    fio.write_csv(os.path.join(out, "decay.csv"), "decay", ["t", "tv", "sup_distance"], rep.decay)
    fio.write_events(os.path.join(out, "events.csv"), traj)
    d = rep.to_dict()
    fio.write_json(os.path.join(out, "metrics.json"), "stabilize", d)
    return {"tv": rep.tv, "dist": rep.dist}


def cmd_counterexample(cfg, model, out, ctx):
    from .counterexample import persistence_experiment
    o = cfg.options
    m = model if cfg.model["name"] in ("gas", "psystem") and "gamma" not in o else None
    rep, traj = persistence_experiment(
        gamma=o.get("gamma", 2.0), K=o.get("K", 1.0), N=o.get("N", 64), horizon=cfg.horizon,
        amplitude=o.get("amplitude", 0.002), nu=cfg.nu, seed=cfg.seed, a=cfg.interval[0], b=cfg.interval[1],
        n_samples=o.get("n_samples", 25), lemma_k=o.get("lemma_k"), model=m,
        front_cap=o.get("front_cap", 10**6))
    n = traj.model.n
    fio.write_csv(os.path.join(out, "census.csv"), "census",
                  ["t", *[f"count_{i + 1}" for i in range(n)], *[f"strength_{i + 1}" for i in range(n)]],
                  rep.census.rows())
    fio.write_csv(os.path.join(out, "tags.csv"), "tags",
                  ["event", "time", "classification", "incoming", "outgoing", "opposite_kind",
                   "opposite_strength"], [t.to_row() for t in rep.tags])
    fio.write_segments(os.path.join(out, "segments.csv"), traj)
    fio.write_events(os.path.join(out, "events.csv"), traj)
    s = rep.summary()
    fio.write_json(os.path.join(out, "metrics.json"), "counterexample", s)
    return s


def cmd_validate_model(cfg, model, out, ctx):
    rep = validate_model(model)
    fio.write_json(os.path.join(out, "report.json"), "hypotheses", rep.to_dict())
    if not rep.ok:
        raise HypothesisError("; ".join(rep.failures[:3]) or f"wedge-sign checks failed: {rep.h7}")
    return {"ok": rep.ok, "c0": rep.c0}


_DISPATCH = {
    "riemann": cmd_riemann, "simulate": cmd_simulate, "attain-check": cmd_attain_check,
    "steer": cmd_steer, "stabilize": cmd_stabilize, "counterexample": cmd_counterexample,
    "validate-model": cmd_validate_model,
}


def write_manifest(out, sub, cfg, status, summary):
    import scipy
    doc = {
        "subcommand": sub, "status": status, "config_sha256": cfg.digest(), "config": cfg.to_dict(),
        "seed": cfg.seed, "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "versions": {"frontcontrol": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "files": sorted(f for f in os.listdir(out) if f != "manifest.json"),
        "summary": summary,
    }
    fio.write_json(os.path.join(out, "manifest.json"), "manifest", doc)


def run(sub, cfg, base_dir="."):
    """Run one subcommand; returns (exit status, summary dict)."""
    out = cfg.out or "out"
    os.makedirs(out, exist_ok=True)
    ctx = {"base": base_dir, "rng": np.random.default_rng(cfg.seed)}
    status, summary = EXIT_OK, {}
    try:
        model = build_model(cfg)
        summary = _DISPATCH[sub](cfg, model, out, ctx) or {}
    except ConfigError as exc:
        status, summary = EXIT_CONFIG, {"error": str(exc)}
    except (HypothesisError, DegeneracyError) as exc:
        status, summary = EXIT_HYPOTHESIS, {"error": str(exc)}
    except (NumericalAbort, DomainError) as exc:
        status, summary = EXIT_ABORT, {"error": f"{type(exc).__name__}: {exc}"}
    write_manifest(out, sub, cfg, status, summary)
    return status, summary


def main(argv=None):
    ap = argparse.ArgumentParser(prog="frontcontrol", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", help="output directory (overrides config)")
    ap.add_argument("--seed", type=int, help="random seed (overrides config)")
    ap.add_argument("--nu", type=float, help="rarefaction front strength (overrides config)")
    args = ap.parse_args(argv)
    base = "."
    try:
        text = ""
        if args.config:
            with open(args.config) as fh:
                text = fh.read()
            base = os.path.dirname(os.path.abspath(args.config))
        cfg = parse_config(text)
        if args.out is not None:
            cfg.out = args.out
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            cfg.seed = args.seed
        if args.nu is not None:
            if not args.nu > 0:
                raise ConfigError("nu must be positive")
            cfg.nu = args.nu
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status, summary = run(args.subcommand, cfg, base)
    if status:
        print(f"{args.subcommand} failed ({status}): {summary.get('error')}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
