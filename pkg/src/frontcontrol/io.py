"""Headered CSV and JSON writers/readers with round-trip float formatting."""
from __future__ import annotations

import csv
import json
import math

import numpy as np

from .errors import ConfigError
from .fronttrack import ControlPair, Profile

SCHEMA_PREFIX = "# schema: frontcontrol/"
SCHEMA_VERSION = 1


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return "" if x is None else str(x)


def write_csv(path, kind, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"{SCHEMA_PREFIX}{kind}/{SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def read_csv(path, kind=None):
    """Return (columns, rows as lists of strings); checks the schema line."""
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith(SCHEMA_PREFIX):
            raise ConfigError(f"{path}: missing schema header")
        got = first[len(SCHEMA_PREFIX):].rsplit("/", 1)[0]
        if kind is not None and got != kind:
            raise ConfigError(f"{path}: expected schema {kind!r}, found {got!r}")
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_json(path, kind, payload):
    doc = {"schema": f"frontcontrol/{kind}/{SCHEMA_VERSION}", **_jsonable(payload)}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- domain objects -----------------------------------------------------------

def profile_rows(profile):
    return [[x0, x1, *s.tolist()] for x0, x1, s in
            zip(profile.breakpoints[:-1], profile.breakpoints[1:], profile.states)]


def write_profile(path, profile, state_names):
    write_csv(path, "profile", ["x0", "x1", *state_names], profile_rows(profile))


def read_profile(path):
    _, rows = read_csv(path, "profile")
    if not rows:
        raise ConfigError(f"{path}: empty profile")
    vals = np.array([[float(v) for v in r] for r in rows])
    if np.any(vals[1:, 0] != vals[:-1, 1]):
        raise ConfigError(f"{path}: pieces are not contiguous")
    return Profile(np.r_[vals[:, 0], vals[-1, 1]], vals[:, 2:])


def write_controls(path, controls, state_names):
    rows = []
    for side in ("a", "b"):
        for t, v in controls.side(side):
            rows.append([t, side, "absorbing" if v is None else "value",
                         *([""] * len(state_names) if v is None else v.tolist())])
    rows.sort(key=lambda r: (r[0], r[1]))
    write_csv(path, "controls", ["t", "side", "mode", *state_names], rows)


def read_controls(path):
    _, rows = read_csv(path, "controls")
    alpha, beta = [], []
    for r in rows:
        t, side, mode = float(r[0]), r[1], r[2]
        v = None if mode == "absorbing" else [float(x) for x in r[3:]]
        if side not in ("a", "b"):
            raise ConfigError(f"{path}: bad side {side!r}")
        (alpha if side == "a" else beta).append((t, v))
    return ControlPair(alpha, beta)


def event_rows(traj):
    rows = []
    for e in traj.events:
        left = "" if e.left is None else " ".join(fmt(v) for v in e.left)
        right = "" if e.right is None else " ".join(fmt(v) for v in e.right)
        rows.append([e.id, e.time, e.position, e.kind, " ".join(map(str, e.fronts_in)),
                     " ".join(map(str, e.fronts_out)), left, right])
    return rows


def write_events(path, traj):
    write_csv(path, "events", ["id", "time", "position", "kind", "fronts_in", "fronts_out", "left", "right"],
              event_rows(traj))


def write_segments(path, traj):
    rows = sorted(traj.front_segments(), key=lambda r: (r[0], r[1]))
    write_csv(path, "segments", ["t0", "x0", "t1", "x1", "family", "kind"], rows)


def write_traces(path, traj, state_names):
    rows = [[t, "a", *s.tolist()] for t, s in traj.trace_a] + [[t, "b", *s.tolist()] for t, s in traj.trace_b]
    write_csv(path, "traces", ["t", "side", *state_names], rows)
