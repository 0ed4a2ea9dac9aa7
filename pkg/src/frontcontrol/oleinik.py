"""One-sided (Oleinik-type) difference-quotient checks on piecewise-constant profiles.

For an incoming family i > p (waves entering at x = a) the weighted quotient is

    (w_i(y) - w_i(x)) / (y - x) * (x - a),

and for i <= p the mirror weight (b - y) is used.  A profile belongs to
K^rho when every such quotient is at most rho.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fronttrack import sample_profile, total_variation

GRID_CELLS = 1000


@dataclass
class OleinikReport:
    ratios: np.ndarray          # per-family sup of the weighted quotient
    witnesses: list             # (x, y) attaining each ratio
    h: float
    rho: float | None = None
    passed: np.ndarray | None = None
    jump_violations: list = field(default_factory=list)

    @property
    def ok(self):
        return bool(np.all(self.passed)) and not self.jump_violations

    def to_dict(self):
        return {
            "ratios": self.ratios.tolist(),
            "witnesses": [list(map(float, w)) if w is not None else None for w in self.witnesses],
            "h": self.h,
            "rho": self.rho,
            "passed": None if self.passed is None else self.passed.tolist(),
            "jump_violations": self.jump_violations,
            "ok": self.ok if self.passed is not None else None,
        }


def pair_points(profile, grid_cells=GRID_CELLS):
    """Piece midpoints plus a uniform grid; the finite pair set for the sup."""
    grid = np.linspace(profile.a, profile.b, grid_cells + 1)
    return np.union1d(profile.midpoints(), grid)


def _sup_quotient(xs, vals, h, weight_fn, chunk=512):
    """sup over x < y with y - x >= h of (vals[y] - vals[x]) / (y - x) * weight(x, y)."""
    best, arg = -np.inf, None
    n = len(xs)
    for start in range(0, n, chunk):
        xi = xs[start:start + chunk, None]
        vi = vals[start:start + chunk, None]
        dx = xs[None, :] - xi
        valid = dx >= h
        if not valid.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            q = (vals[None, :] - vi) / dx * weight_fn(xi, xs[None, :])
        q = np.where(valid, q, -np.inf)
        k = int(np.argmax(q))
        if q.flat[k] > best:
            best = float(q.flat[k])
            r, c = divmod(k, n)
            arg = (float(xs[start + r]), float(xs[c]))
    return best, arg


def weighted_quotient(model, profile, i, x, y):
    """The weighted quotient for family i (1-based) at a single pair."""
    w = np.array([model.to_riemann(s) for s in profile.value(np.array([x, y]))])[:, i - 1]
    base = (w[1] - w[0]) / (y - x)
    return base * ((x - profile.a) if i > model.p else (profile.b - y))


def oleinik_ratios(model, profile, h=None, grid_cells=GRID_CELLS):
    if h is None:
        h = (profile.b - profile.a) / 1000
    if not 0 < h < profile.b - profile.a:
        raise ValueError("need 0 < h < b - a")
    xs = pair_points(profile, grid_cells)
    W = np.array([model.to_riemann(s) for s in profile.value(xs)])
    a, b = profile.a, profile.b
    ratios, wits = [], []
    for i in range(model.n):
        if i + 1 > model.p:
            wf = lambda x, y: x - a  # noqa: E731
        else:
            wf = lambda x, y: b - y  # noqa: E731
        r, w = _sup_quotient(xs, W[:, i], h, wf)
        ratios.append(r)
        wits.append(w)
    return OleinikReport(np.array(ratios), wits, float(h))


def upward_jumps(model, profile, eps_jump):
    """Jumps increasing some w_i by more than eps_jump: [(x, family, size)]."""
    W = np.array([model.to_riemann(s) for s in profile.states])
    out = []
    for k, d in enumerate(np.diff(W, axis=0)):
        for i in np.nonzero(d > eps_jump)[0]:
            out.append((float(profile.breakpoints[k + 1]), int(i) + 1, float(d[i])))
    return out


def check_membership(model, profile, rho, h=None, eps_jump=None, nu=None):
    """Membership in K^rho at resolution h; also rejects upward jumps above eps_jump."""
    if eps_jump is None:
        eps_jump = 2 * nu if nu is not None else 0.0
    rep = oleinik_ratios(model, profile, h)
    rep.rho = float(rho)
    rep.passed = rep.ratios <= rho
    rep.jump_violations = upward_jumps(model, profile, eps_jump)
    return rep.ok, rep


@dataclass
class Lemma1Report:
    times: list
    k_measured: list            # per time, max over families
    per_family: list
    tv: list
    k: float
    delta: float
    outside_scope: list         # times where TV >= delta

    @property
    def ok(self):
        return all(v <= self.k for v in self.k_measured)

    def stability(self):
        """max/min of the positive measured constants (1.0 when all are <= 0)."""
        pos = [v for v in self.k_measured if v > 0]
        if not pos:
            return 1.0
        if len(pos) < len(self.k_measured):
            return float("inf")
        return max(pos) / min(pos)

    def to_dict(self):
        d = dict(self.__dict__)
        d["ok"] = self.ok
        d["stability"] = self.stability()
        return d


def lemma1_check(traj, times, k, h=None, delta=0.5):
    """Measure sup (w_i(y) - w_i(x)) * t / (y - x) along a trajectory."""
    model = traj.model
    h = (traj.b - traj.a) / 1000 if h is None else h
    ks, per, tvs, outside = [], [], [], []
    for t in times:
        prof = traj.snapshots.get(t) or sample_profile(traj, t)
        xs = pair_points(prof)
        W = np.array([model.to_riemann(s) for s in prof.values_at(xs)]) if hasattr(prof, "values_at") \
            else np.array([model.to_riemann(s) for s in prof.value(xs)])
        fam = []
        for i in range(model.n):
            r, _ = _sup_quotient(xs, W[:, i], h, lambda x, y: t)
            fam.append(r)
        tv = total_variation(model, prof)
        per.append(fam)
        ks.append(max(fam))
        tvs.append(tv)
        if tv >= delta:
            outside.append(t)
    return Lemma1Report(list(times), ks, per, tvs, float(k), float(delta), outside)
