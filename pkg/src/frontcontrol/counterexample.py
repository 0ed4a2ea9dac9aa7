"""Shock persistence for isentropic gas dynamics.

Under the wedge-sign conditions on r_1, r_2 (checked by ``validate_model``),
two shocks of the same family merge into a shock of that family plus a shock
of the other family.  Shocks therefore keep being produced, and the profile
cannot be driven to a constant in finite time.  The p-system has the opposite
sign and emits a rarefaction instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, FrontCapError, HypothesisError, OutOfBoxError
from .fronttrack import COLLISION, HIT_LEFT, HIT_RIGHT, ControlPair, FrontTracker, Profile
from .models import Gas, as_state, speed_bounds, validate_model
from .oleinik import lemma1_check

SAME_SHOCK = "same-family shock-shock"
SAME_MIXED = "shock-rarefaction same family"
SAME_RAREFACTION = "rarefaction-rarefaction same family"
TRANSVERSAL = "transversal"
BOUNDARY = "boundary"


def make_gas(gamma=2.0, K=1.0, **kw):
    if not 1.0 < gamma < 3.0:
        raise ConfigError(f"gamma = {gamma} outside (1, 3)")
    return Gas(gamma=gamma, K=K, **kw)


def shock_state(model, left, family, amplitude):
    """Right state of the admissible family-shock from ``left`` with w-drop ``amplitude``."""
    left = as_state(left)
    i = family
    w0 = model.to_riemann(left)[i - 1]
    s0 = float(left[0])
    direction = -model.s_dir[i - 1]    # shocks run opposite to rarefactions in s

    def F(s):
        u = model.wave_curve_u(i, left, s, True)
        return model.to_riemann([s, u])[i - 1] - (w0 - amplitude)

    hi = s0 * (1 + direction * 0.05)
    for _ in range(8):
        if F(hi) < 0:
            break
        hi = s0 + 2 * (hi - s0)
    else:
        raise OutOfBoxError("shock curve does not reach the requested amplitude")
    s = brentq(F, s0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    right = np.array([s, model.wave_curve_u(i, left, s, True)])
    model.check_state(right)
    return right


def _family_sequence(N, families):
    if families == "alternate":
        return [1 + (k % 2) for k in range(N)]
    if families in (1, 2):
        return [families] * N
    return list(families)


def dense_shock_initial(model, N, amplitude, seed=0, a=0.0, b=1.0, families="alternate",
                        positions=None, base=None):
    """N-jump profile whose jumps are all admissible shocks of the given families.

    Positions are seeded uniform draws unless given; the first state defaults
    to the centre of the box shifted so the profile stays inside it.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    fams = _family_sequence(N, families)
    if base is None:
        lo, hi = model.box[:, 0], model.box[:, 1]
        base = 0.5 * (lo + hi)
        base = base + np.array([0.0, 0.15 * (hi[1] - lo[1])])
    states = [as_state(base)]
    model.check_state(states[0])
    for f in fams:
        states.append(shock_state(model, states[-1], f, amplitude))
    if positions is None:
        rng = np.random.default_rng(seed)
        xs = np.sort(rng.uniform(a, b, N))
        while N > 1 and np.min(np.diff(xs)) <= 0:
            xs = np.sort(rng.uniform(a, b, N))
    else:
        xs = np.asarray(positions, dtype=float)
    return Profile(np.r_[a, xs, b], np.array(states))


def colliding_shocks(model, family, amplitude, a=0.0, b=1.0, x_left=None, t_collide=None,
                     amplitude_right=None):
    """Two shocks of one family placed to meet inside ]a, b[."""
    L = b - a
    x_left = a + 0.3 * L if x_left is None else x_left
    amp_r = amplitude if amplitude_right is None else amplitude_right
    prof = dense_shock_initial(model, 2, amplitude, families=family, positions=[x_left, x_left + 0.1 * L],
                               a=a, b=b)
    s0, s1, s2 = prof.states
    s2 = shock_state(model, s1, family, amp_r)
    sl = model.shock_speed(family, s0, s1)
    sr = model.shock_speed(family, s1, s2)
    if sl <= sr:
        raise ValueError("shocks do not approach each other")
    if t_collide is None:
        # meet at a third of the remaining crossing time
        t_collide = 0.3 * L / max(abs(sl), abs(sr))
    x_right = x_left + (sl - sr) * t_collide
    xc = x_left + sl * t_collide
    if not (a < xc < b and x_right < b):
        raise ValueError("collision point outside the interval")
    return Profile(np.array([a, x_left, x_right, b]), np.array([s0, s1, s2])), (t_collide, xc)


@dataclass
class InteractionTag:
    event: int
    time: float
    incoming: tuple             # ((family, kind), ...)
    outgoing: tuple
    classification: str
    opposite_family: int | None = None
    opposite_kind: str | None = None
    opposite_strength: float = 0.0     # signed w-jump of the other family (< 0 for shocks)

    def to_row(self):
        return [self.event, self.time, self.classification,
                ";".join(f"{f}{k[0]}" for f, k in self.incoming),
                ";".join(f"{f}{k[0]}" for f, k in self.outgoing),
                self.opposite_kind or "", self.opposite_strength]


def classify_interaction(model, event, traj):
    if event.kind in (HIT_LEFT, HIT_RIGHT):
        ins = tuple((traj.fronts[i].family, traj.fronts[i].kind) for i in event.fronts_in)
        outs = tuple((traj.fronts[i].family, traj.fronts[i].kind) for i in event.fronts_out)
        return InteractionTag(event.id, event.time, ins, outs, BOUNDARY)
    if event.kind != COLLISION:
        return None
    fin = [traj.fronts[i] for i in event.fronts_in]
    fout = [traj.fronts[i] for i in event.fronts_out]
    ins = tuple((f.family, f.kind) for f in fin)
    outs = tuple((f.family, f.kind) for f in fout)
    fams = {f.family for f in fin}
    if len(fams) > 1:
        return InteractionTag(event.id, event.time, ins, outs, TRANSVERSAL)
    kinds = {f.kind for f in fin}
    if kinds == {"shock"}:
        cls = SAME_SHOCK
    elif kinds == {"rarefaction"}:
        cls = SAME_RAREFACTION
    else:
        cls = SAME_MIXED
    fam = fams.pop()
    other = 3 - fam if model.n == 2 else None
    tag = InteractionTag(event.id, event.time, ins, outs, cls, other)
    if other is not None:
        # net jump of the other family across the outgoing fan
        d = 0.0
        for f in fout:
            if f.family == other:
                d += model.to_riemann(f.right)[other - 1] - model.to_riemann(f.left)[other - 1]
        tag.opposite_strength = float(d)
        if d < 0:
            tag.opposite_kind = "shock"
        elif d > 0:
            tag.opposite_kind = "rarefaction"
    return tag


def tag_events(model, traj):
    return [t for t in (classify_interaction(model, e, traj) for e in traj.events) if t is not None]


@dataclass
class ShockCensus:
    times: list
    counts: np.ndarray          # (len(times), n)
    strengths: np.ndarray
    threshold: float
    min_spacing: list = field(default_factory=list)

    @property
    def total_counts(self):
        return self.counts.sum(axis=1)

    def rows(self):
        return [[t, *c.tolist(), *s.tolist()] for t, c, s in zip(self.times, self.counts, self.strengths)]


def shock_census(traj, times, threshold=None):
    """Shock fronts with strength above threshold (default 2 nu) alive at each time."""
    model = traj.model
    thr = 2 * traj.nu if threshold is None else threshold
    fronts = list(traj.fronts.values())
    counts = np.zeros((len(times), model.n), dtype=int)
    strengths = np.zeros((len(times), model.n))
    spacing = []
    for k, t in enumerate(times):
        xs = []
        for f in fronts:
            if f.t0 <= t and (f.t_death is None or f.t_death > t) and f.kind == "shock" and f.strength > thr:
                counts[k, f.family - 1] += 1
                strengths[k, f.family - 1] += f.strength
                xs.append(f.x(t))
        xs.sort()
        spacing.append(float(np.min(np.diff(xs))) if len(xs) > 1 else float("nan"))
    return ShockCensus(list(times), counts, strengths, thr, spacing)


@dataclass
class PersistenceReport:
    census: ShockCensus
    tags: list
    lemma1: object
    horizon: float
    events: int
    aborted: str | None = None
    conservation: dict | None = None

    @property
    def same_family_shock_tags(self):
        return [t for t in self.tags if t.classification == SAME_SHOCK]

    @property
    def property_a_fraction(self):
        tags = self.same_family_shock_tags
        if not tags:
            return float("nan")
        return sum(t.opposite_kind == "shock" for t in tags) / len(tags)

    @property
    def unresolved(self):
        """Same-family shock collisions whose emitted wave is lost to round-off."""
        return sum(t.opposite_kind is None for t in self.same_family_shock_tags)

    @property
    def property_a_resolved_fraction(self):
        tags = [t for t in self.same_family_shock_tags if t.opposite_kind is not None]
        if not tags:
            return float("nan")
        return sum(t.opposite_kind == "shock" for t in tags) / len(tags)

    @property
    def persists(self):
        return bool(np.all(self.census.total_counts > 0))

    def summary(self):
        return {
            "horizon": self.horizon, "events": self.events, "aborted": self.aborted,
            "persists": self.persists,
            "final_counts": self.census.counts[-1].tolist(),
            "last_time_with_shocks": max((t for t, c in zip(self.census.times, self.census.total_counts) if c > 0),
                                         default=None),
            "same_family_shock_collisions": len(self.same_family_shock_tags),
            "property_a_fraction": self.property_a_fraction,
            "property_a_resolved_fraction": self.property_a_resolved_fraction,
            "unresolved_emissions": self.unresolved,
            "lemma1_k": self.lemma1.k_measured if self.lemma1 else None,
            "lemma1_stability": self.lemma1.stability() if self.lemma1 else None,
            "conservation_defect": (self.conservation or {}).get("defect"),
        }


def persistence_experiment(gamma=2.0, K=1.0, N=64, horizon=None, amplitude=0.002, nu=1e-9, seed=0,
                           a=0.0, b=1.0, n_samples=25, controls="absorbing", lemma_times=(1.0, 2.0, 3.0, 4.0),
                           lemma_k=None, model=None, profile=None, front_cap=10**6):
    """Dense-shock data evolved under the given boundary policy up to the horizon."""
    model = make_gas(gamma, K) if model is None else model
    rep = validate_model(model)
    if model.name == "gas" and not all(rep.h7.values()):
        raise HypothesisError("wedge-sign hypothesis fails for this gas model")
    if controls != "absorbing" and not isinstance(controls, ControlPair):
        raise ConfigError(f"unknown control policy {controls!r}")
    ctrl = ControlPair.absorbing() if controls == "absorbing" else controls
    if horizon is None:
        horizon = 3 * (b - a) / speed_bounds(model)[0]
    phi = profile if profile is not None else dense_shock_initial(model, N, amplitude, seed=seed, a=a, b=b)
    times = list(np.linspace(0.0, horizon, n_samples))
    eng = FrontTracker(model, phi, ctrl, nu=nu, front_cap=front_cap, track_conservation=True)
    aborted = None
    try:
        traj = eng.run_until(horizon)
    except FrontCapError as exc:
        aborted = str(exc)
        traj = eng.trajectory()
        times = [t for t in times if t <= eng.t]
    census = shock_census(traj, times)
    tags = tag_events(model, traj)
    lt = [t for t in lemma_times if t <= traj.t_end]
    if lemma_k is None:
        lemma_k = np.inf
    lem = lemma1_check(traj, lt, lemma_k) if lt else None
    return PersistenceReport(census, tags, lem, float(horizon), len(traj.events), aborted, traj.conservation), traj


def same_family_contrast(model, family=2, amplitude=0.02, a=0.0, b=1.0, nu=1e-6):
    """Collide two shocks of one family and report the other family's outgoing wave."""
    prof, (tc, xc) = colliding_shocks(model, family, amplitude, a=a, b=b)
    eng = FrontTracker(model, prof, ControlPair.absorbing(), nu=nu)
    traj = eng.run_until(tc * 1.01)
    tags = [t for t in tag_events(model, traj) if t.classification == SAME_SHOCK]
    return tags, traj
