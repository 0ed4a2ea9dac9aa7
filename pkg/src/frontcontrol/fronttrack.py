"""Event-driven front tracking on the strip t >= 0, a <= x <= b.

Fronts live in a doubly linked list ordered by position; only neighbours can
collide, so candidate events are pushed for adjacent pairs and validated
lazily when popped.  Boundary conditions are imposed through boundary Riemann
problems between the control value and the current trace: only the waves
entering the domain are kept.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import heapq
import itertools
import math

import numpy as np

from .errors import FrontCapError
from .models import as_state
from .riemann import RAREFACTION, Wave, solve_riemann

COLLISION = "collision"
HIT_LEFT = "boundary-hit-left"
HIT_RIGHT = "boundary-hit-right"
CONTROL = "control-change"

_KIND_CODE = {COLLISION: 0, HIT_LEFT: 1, HIT_RIGHT: 2, CONTROL: 3}
POS_TOL = 1e-12


# -- profiles ---------------------------------------------------------------

@dataclass
class Profile:
    """Piecewise-constant map on [a, b]: ``states[k]`` on ]x_k, x_{k+1}[."""

    breakpoints: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        self.states = states
        if self.breakpoints.ndim != 1 or len(self.breakpoints) != len(states) + 1:
            raise ValueError("need len(breakpoints) == len(states) + 1")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def a(self):
        return float(self.breakpoints[0])

    @property
    def b(self):
        return float(self.breakpoints[-1])

    @property
    def n_pieces(self):
        return len(self.states)

    @classmethod
    def constant(cls, a, b, state):
        return cls(np.array([a, b], dtype=float), as_state(state)[None, :])

    @classmethod
    def from_jumps(cls, a, b, left_state, xs, right_states):
        """Build from jump positions (nondecreasing) and the state right of each.

        Zero-width pieces are dropped and equal neighbours merged.
        """
        bps = [float(a)]
        sts = [as_state(left_state)]
        for x, s in zip(xs, right_states):
            x = min(max(float(x), a), b)
            if x <= bps[-1]:
                sts[-1] = as_state(s)  # zero-width piece: overwrite
            else:
                bps.append(x)
                sts.append(as_state(s))
        bps.append(float(b))
        if bps[-1] <= bps[-2]:  # last piece collapsed onto b
            bps.pop(-2)
            sts.pop(-1)
        return cls(np.array(bps), np.array(sts)).merged()

    def merged(self):
        keep = [0]
        for k in range(1, len(self.states)):
            if not np.array_equal(self.states[k], self.states[keep[-1]]):
                keep.append(k)
        bps = [self.breakpoints[k] for k in keep] + [self.breakpoints[-1]]
        return Profile(np.array(bps), self.states[keep])

    def value(self, x):
        k = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, self.n_pieces - 1)
        return self.states[k]

    def midpoints(self):
        return 0.5 * (self.breakpoints[:-1] + self.breakpoints[1:])

    def widths(self):
        return np.diff(self.breakpoints)

    def map_states(self, fn):
        return Profile(self.breakpoints.copy(), np.array([fn(s) for s in self.states]))


def total_variation(model, profile, in_riemann=True):
    """Sum of |jump| over breakpoints, in Riemann coordinates or raw states."""
    S = profile.states
    if in_riemann:
        S = np.array([model.to_riemann(s) for s in S])
    return float(np.abs(np.diff(S, axis=0)).sum())


def l1_distance(p1, p2):
    """Exact integral over [a, b] of the l1 norm of p1 - p2."""
    if not (np.isclose(p1.a, p2.a) and np.isclose(p1.b, p2.b)):
        raise ValueError("profiles live on different intervals")
    xs = np.union1d(p1.breakpoints, p2.breakpoints)
    xs = xs[(xs >= p1.a) & (xs <= p1.b)]
    mids = 0.5 * (xs[:-1] + xs[1:])
    diff = np.abs(p1.value(mids) - p2.value(mids)).sum(axis=1)
    return float(np.sum(diff * np.diff(xs)))


def sup_distance(profile, state):
    return float(np.max(np.abs(profile.states - as_state(state))))


def profile_integral(profile):
    return (profile.widths()[:, None] * profile.states).sum(axis=0)


# -- controls ---------------------------------------------------------------

@dataclass
class ControlPair:
    """Piecewise-constant boundary data.

    ``alpha`` and ``beta`` are lists of ``(switch_time, value)``; the value
    holds until the next switch.  ``None`` means absorbing: the control tracks
    the trace, so nothing enters.  Before the first switch the boundary is
    absorbing.
    """

    alpha: list = field(default_factory=list)
    beta: list = field(default_factory=list)

    def __post_init__(self):
        self.alpha = sorted(((float(t), None if v is None else as_state(v)) for t, v in self.alpha),
                            key=lambda e: e[0])
        self.beta = sorted(((float(t), None if v is None else as_state(v)) for t, v in self.beta),
                           key=lambda e: e[0])

    @classmethod
    def absorbing(cls):
        return cls([], [])

    @classmethod
    def constant(cls, alpha, beta):
        return cls([(0.0, alpha)], [(0.0, beta)])

    def side(self, name):
        return self.alpha if name == "a" else self.beta

    def value(self, name, t):
        v = None
        for ts, val in self.side(name):
            if ts <= t:
                v = val
            else:
                break
        return v

    def switch_times(self):
        return sorted({t for t, _ in self.alpha} | {t for t, _ in self.beta})


# -- engine -----------------------------------------------------------------

class Front:
    __slots__ = ("id", "family", "kind", "x0", "t0", "speed", "left", "right", "strength",
                 "born", "died", "t_death", "prev", "next", "alive")

    def __init__(self, fid, wave, x0, t0, born):
        self.id = fid
        self.family = wave.family
        self.kind = wave.kind
        self.speed = wave.speed
        self.left = wave.left
        self.right = wave.right
        self.strength = wave.strength
        self.x0 = x0
        self.t0 = t0
        self.born = born
        self.died = None
        self.t_death = None
        self.prev = None
        self.next = None
        self.alive = True

    def x(self, t):
        return self.x0 + self.speed * (t - self.t0)

    @property
    def is_shock(self):
        return self.kind == "shock"

    def __repr__(self):
        return f"Front({self.id}, fam={self.family}, {self.kind}, x0={self.x0:.6g}, t0={self.t0:.6g}, s={self.speed:.6g})"


@dataclass
class Event:
    id: int
    time: float
    position: float
    kind: str
    fronts_in: tuple
    fronts_out: tuple
    left: np.ndarray | None = None
    right: np.ndarray | None = None


@dataclass
class Trajectory:
    model: object
    a: float
    b: float
    nu: float
    initial: Profile
    events: list
    fronts: dict
    trace_a: list
    trace_b: list
    snapshots: dict
    t_end: float = 0.0
    conservation: dict | None = None
    injected: dict | None = None

    def front_segments(self):
        """(t0, x0, t1, x1, family, kind) per front life segment."""
        out = []
        for f in self.fronts.values():
            t1 = f.t_death if f.t_death is not None else self.t_end
            out.append((f.t0, f.x0, t1, f.x(t1), f.family, f.kind))
        return out

    def collisions(self):
        return [e for e in self.events if e.kind == COLLISION]


def trace_value(trace, t):
    v = trace[0][1]
    for ts, s in trace:
        if ts <= t:
            v = s
        else:
            break
    return v


def sample_profile(traj, t):
    """Profile of the trajectory at time t (state after events at t)."""
    alive = [f for f in traj.fronts.values()
             if f.t0 <= t and (f.t_death is None or f.t_death > t)]
    alive.sort(key=lambda f: (f.x(t), f.speed, f.id))
    return Profile.from_jumps(traj.a, traj.b, trace_value(traj.trace_a, t),
                              [f.x(t) for f in alive], [f.right for f in alive])


def boundary_traces(traj):
    return traj.trace_a, traj.trace_b


class FrontTracker:
    """Deterministic front-tracking engine.

    ``solver(model, uL, uR, nu)`` returns the outgoing fan at collisions and
    defaults to the entropy Riemann solver; boundary fans always use the
    entropy solver with the incoming-speed filter.
    """

    def __init__(self, model, profile, controls=None, nu=0.05, *, solver=None,
                 front_cap=10**6, track_conservation=False):
        self.model = model
        self.nu = float(nu)
        self.a, self.b = profile.a, profile.b
        self.controls = controls if controls is not None else ControlPair.absorbing()
        self.solver = solver or solve_riemann
        self.front_cap = front_cap
        self.t = 0.0
        self.head = self.tail = None
        self.n_alive = 0
        self.heap = []
        self._seq = itertools.count()
        self._ids = itertools.count()
        self.events = []
        self.fronts = {}
        self.injected = {"a": 0, "b": 0}
        for s in profile.states:
            model.check_state(s)
        self.initial = profile
        self.state_a = profile.states[0]
        self.state_b = profile.states[-1]
        self.trace_a = [(0.0, self.state_a)]
        self.trace_b = [(0.0, self.state_b)]
        self.snapshots = {}
        self._cons = None

        # interior fans at t = 0
        prev = None
        for k in range(1, profile.n_pieces):
            x = float(profile.breakpoints[k])
            for w in self.solver(model, profile.states[k - 1], profile.states[k], self.nu):
                f = self._new_front(w, x, 0.0, born=-1)
                self._link_after(prev, f)
                prev = f
        self._refresh_edges()
        f = self.head
        while f is not None:
            self._push_boundary(f)
            self._push_pair(f, f.next)
            f = f.next

        if track_conservation and model.conservative:
            self._cons = {"defect": 0.0, "max_step": 0.0, "intervals": 0,
                          "I": self._integral()}

        # controls: switches at t <= 0 act now, later ones are queued
        for side in ("a", "b"):
            for idx, (ts, _) in enumerate(self.controls.side(side)):
                if ts <= 0.0:
                    self._apply_control(side, idx, record=False)
                else:
                    pos = self.a if side == "a" else self.b
                    heapq.heappush(self.heap, (ts, pos, -1, next(self._seq), CONTROL, side, idx))
        self._check_cap()

    # -- linked list ---------------------------------------------------------
    def _new_front(self, wave, x, t, born):
        f = Front(next(self._ids), wave, x, t, born)
        self.fronts[f.id] = f
        self.n_alive += 1
        return f

    def _link_after(self, prev, f):
        nxt = self.head if prev is None else prev.next
        f.prev, f.next = prev, nxt
        if prev is None:
            self.head = f
        else:
            prev.next = f
        if nxt is None:
            self.tail = f
        else:
            nxt.prev = f

    def _unlink(self, f, t, event_id):
        p, n = f.prev, f.next
        if p is None:
            self.head = n
        else:
            p.next = n
        if n is None:
            self.tail = p
        else:
            n.prev = p
        f.prev = f.next = None
        f.alive = False
        f.t_death = t
        f.died = event_id
        self.n_alive -= 1

    def _refresh_edges(self):
        if self.head is not None:
            self.state_a = self.head.left
            self.state_b = self.tail.right

    def iter_fronts(self):
        f = self.head
        while f is not None:
            yield f
            f = f.next

    # -- candidate events ----------------------------------------------------
    def _push_pair(self, L, R):
        if L is None or R is None:
            return
        ds = L.speed - R.speed
        if ds <= 0:
            return
        t = self.t
        gap = R.x(t) - L.x(t)
        tc = t + gap / ds if gap > 0 else t
        heapq.heappush(self.heap, (tc, L.x(tc), min(L.id, R.id), next(self._seq), COLLISION, L, R))

    def _push_boundary(self, f):
        if f.speed < 0:
            tb = f.t0 + (self.a - f.x0) / f.speed
            heapq.heappush(self.heap, (max(tb, f.t0), self.a, f.id, next(self._seq), HIT_LEFT, f, None))
        elif f.speed > 0:
            tb = f.t0 + (self.b - f.x0) / f.speed
            heapq.heappush(self.heap, (max(tb, f.t0), self.b, f.id, next(self._seq), HIT_RIGHT, f, None))

    def _check_cap(self):
        if self.n_alive > self.front_cap:
            raise FrontCapError(f"{self.n_alive} fronts alive at t={self.t:.6g} (cap {self.front_cap})")

    # -- public event loop ---------------------------------------------------
    def next_event(self, horizon=math.inf):
        """Pop the earliest valid pending event with time <= horizon, or None."""
        while self.heap and self.heap[0][0] <= horizon:
            item = heapq.heappop(self.heap)
            kind, p, q = item[4], item[5], item[6]
            if kind == COLLISION:
                if p.alive and q.alive and p.next is q:
                    return item
            elif kind in (HIT_LEFT, HIT_RIGHT):
                if p.alive:
                    return item
            else:
                return item
        return None

    def resolve_event(self, item):
        t = max(item[0], self.t)
        self._advance(t)
        kind = item[4]
        if kind == COLLISION:
            self._collide(t, item[5], item[6])
        elif kind == HIT_LEFT:
            self._exit_left(t, item[5])
        elif kind == HIT_RIGHT:
            self._exit_right(t, item[5])
        else:
            self._apply_control(item[5], item[6], record=True)
        self._check_cap()
        if self._cons is not None:
            self._close_interval()

    def run_until(self, T, sample_times=()):
        """Process all events with time <= T and return the trajectory so far."""
        pending = sorted(s for s in sample_times if s >= self.t)
        while True:
            item = self.next_event(T)
            if item is None:
                break
            while pending and pending[0] < item[0]:
                self._snapshot(pending.pop(0))
            self.resolve_event(item)
        while pending and pending[0] <= T:
            self._snapshot(pending.pop(0))
        self._advance(T)
        if self._cons is not None:
            self._close_interval()
        return self.trajectory()

    def trajectory(self):
        cons = None
        if self._cons is not None:
            cons = {k: v for k, v in self._cons.items() if k != "I"}
            cons["I"] = self._cons["I"].tolist()
        return Trajectory(self.model, self.a, self.b, self.nu, self.initial, self.events, self.fronts,
                          self.trace_a, self.trace_b, self.snapshots, self.t, cons, dict(self.injected))

    # -- profiles --------------------------------------------------------------
    def profile(self, t=None):
        t = self.t if t is None else t
        fronts = list(self.iter_fronts())
        return Profile.from_jumps(self.a, self.b, self.state_a if fronts else self.state_a,
                                  [f.x(t) for f in fronts], [f.right for f in fronts])

    def _snapshot(self, ts):
        self.snapshots[ts] = self.profile(ts)

    # -- conservation bookkeeping ----------------------------------------------
    def _integral(self):
        total = np.zeros(self.model.n)
        x_prev, s_prev = self.a, self.state_a
        for f in self.iter_fronts():
            x = f.x(self.t)
            total += (x - x_prev) * s_prev
            x_prev, s_prev = x, f.right
        total += (self.b - x_prev) * s_prev
        return total

    def _advance(self, t):
        if t <= self.t:
            return
        if self._cons is not None:
            flux = self.model.flux
            self._cons.setdefault("flux", np.zeros(self.model.n))
            self._cons["flux"] += (flux(self.state_a) - flux(self.state_b)) * (t - self.t)
        self.t = t

    def _close_interval(self):
        c = self._cons
        I = self._integral()
        step = float(np.abs(I - c["I"] - c.get("flux", 0.0)).sum())
        c["defect"] += step
        c["max_step"] = max(c["max_step"], step)
        c["intervals"] += 1
        c["I"] = I
        c["flux"] = np.zeros(self.model.n)

    # -- event handlers -------------------------------------------------------
    def _record(self, kind, position, fin, fout, left=None, right=None):
        ev = Event(len(self.events), self.t, position, kind, tuple(fin), tuple(fout), left, right)
        self.events.append(ev)
        return ev

    def _insert_fan(self, fan, prev, x, t, event_id):
        out = []
        for w in fan:
            f = self._new_front(w, x, t, event_id)
            self._link_after(prev, f)
            prev = f
            out.append(f)
        return out

    def _keep_unsplit(self, fan, families):
        """Rarefaction fronts never split after birth: rejoin the outgoing i-fronts into one."""
        out = []
        for w in fan:
            if (w.kind == RAREFACTION and w.family in families and out and out[-1].family == w.family
                    and out[-1].kind == RAREFACTION):
                prev = out.pop()
                i = w.family
                wl = float(self.model.to_riemann(prev.left)[i - 1])
                wr = float(self.model.to_riemann(w.right)[i - 1])
                mid = self.model.rarefaction_state(i, prev.left, 0.5 * (wl + wr))
                w = Wave(i, RAREFACTION, prev.left, w.right, float(self.model.eigenvalues(mid)[i - 1]), wr - wl)
            out.append(w)
        return out

    def _collide(self, t, L, R):
        x = L.x(t)
        group = [L, R]
        while group[0].prev is not None and abs(group[0].prev.x(t) - x) <= POS_TOL:
            group.insert(0, group[0].prev)
        while group[-1].next is not None and abs(group[-1].next.x(t) - x) <= POS_TOL:
            group.append(group[-1].next)
        uL, uR = group[0].left, group[-1].right
        before = group[0].prev
        after = group[-1].next
        fan = [] if np.array_equal(uL, uR) else self.solver(self.model, uL, uR, self.nu)
        fan = self._keep_unsplit(fan, {f.family for f in group if f.kind == RAREFACTION})
        eid = len(self.events)
        for f in group:
            self._unlink(f, t, eid)
        new = self._insert_fan(fan, before, x, t, eid)
        self._record(COLLISION, x, [f.id for f in group], [f.id for f in new], uL, uR)
        self._refresh_edges()
        if new:
            self._push_pair(before, new[0])
            self._push_pair(new[-1], after)
            for f in new:
                self._push_boundary(f)
        else:
            self._push_pair(before, after)

    def _exit_left(self, t, f):
        eid = len(self.events)
        gone = []
        while self.head is not None:
            g = self.head
            self._unlink(g, t, eid)
            self.state_a = g.right
            gone.append(g)
            if g is f:
                break
        if self.head is None:
            self.state_b = self.state_a
        new = self._inject("a", t, eid)
        self._record(HIT_LEFT, self.a, [g.id for g in gone], [g.id for g in new], gone[0].left, gone[-1].right)
        self.trace_a.append((t, self.state_a))
        if self.head is None:
            self.trace_b.append((t, self.state_b))

    def _exit_right(self, t, f):
        eid = len(self.events)
        gone = []
        while self.tail is not None:
            g = self.tail
            self._unlink(g, t, eid)
            self.state_b = g.left
            gone.append(g)
            if g is f:
                break
        if self.tail is None:
            self.state_a = self.state_b
        new = self._inject("b", t, eid)
        self._record(HIT_RIGHT, self.b, [g.id for g in gone], [g.id for g in new], gone[-1].left, gone[0].right)
        self.trace_b.append((t, self.state_b))
        if self.tail is None:
            self.trace_a.append((t, self.state_a))

    def _inject(self, side, t, eid, value=None, explicit=False):
        """Boundary fan between the active control and the trace; entering waves only."""
        if not explicit:
            value = self.controls.value(side, t)
        if value is None:
            return []
        if side == "a":
            fan = [w for w in solve_riemann(self.model, value, self.state_a, self.nu) if w.speed > 0]
            if not fan:
                return []
            new = self._insert_fan(fan, None, self.a, t, eid)
            old = new[-1].next
            self.state_a = new[0].left
            if old is None:
                self.state_b = new[-1].right
            self._push_pair(new[-1], old)
        else:
            fan = [w for w in solve_riemann(self.model, self.state_b, value, self.nu) if w.speed < 0]
            if not fan:
                return []
            old = self.tail
            new = self._insert_fan(fan, old, self.b, t, eid)
            self.state_b = new[-1].right
            if old is None:
                self.state_a = new[0].left
            self._push_pair(old, new[0])
        for f in new:
            self._push_boundary(f)
        self.injected[side] += len(new)
        return new

    def schedule_control(self, side, t, value):
        """Append a switch (t, value) to one side of the live control; t must not precede
        the engine time or the last switch of that side."""
        lst = self.controls.side(side)
        t = float(t)
        if t < self.t or (lst and t < lst[-1][0]):
            raise ValueError("control switches must be scheduled in time order")
        lst.append((t, None if value is None else as_state(value)))
        pos = self.a if side == "a" else self.b
        heapq.heappush(self.heap, (t, pos, -1, next(self._seq), CONTROL, side, len(lst) - 1))

    def _apply_control(self, side, idx, record):
        eid = len(self.events)
        # the value stored at this switch, so that an impulse (t, v), (t, None) injects once
        new = self._inject(side, self.t, eid, self.controls.side(side)[idx][1], explicit=True)
        if record or new:
            self._record(CONTROL, self.a if side == "a" else self.b, [], [f.id for f in new])
        if new:
            if side == "a":
                self.trace_a.append((self.t, self.state_a))
            else:
                self.trace_b.append((self.t, self.state_b))
