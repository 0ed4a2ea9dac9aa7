"""Boundary controls steering a Temple-class solution onto a prescribed profile.

The plan has three time blocks on [0, tau]:

* [0, T/4]      absorbing boundaries; the initial fronts all leave, the state
                becomes a constant omega'.
* [T/4, 3T/4]   one 1-wave injected at b and one 2-wave at a turn omega' into
                omega.
* [3T/4, tau]   the time reversal of a front-tracking solution started from the
                target at t = tau; its boundary traces become the controls.

Here T = 4 (b - a) / lambda_min.  Only temple2 is supported: the reversal relies
on interactions not changing amplitudes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import HorizonError, WashoutError
from .fronttrack import (COLLISION, HIT_LEFT, HIT_RIGHT, ControlPair, FrontTracker, Profile,
                         l1_distance)
from .models import as_state, speed_bounds, validate_model
from .oleinik import check_membership
from .riemann import RAREFACTION, SHOCK, Wave


def horizon(model, a, b):
    lam_min = speed_bounds(model)[0]
    if lam_min <= 0:
        raise ValueError("lambda_min must be positive")
    return 4.0 * (b - a) / lam_min


def default_rho(model):
    """Half the speed separation; keeps same-family backward fronts apart until they exit."""
    return 0.5 * validate_model(model).c0


# -- targets ----------------------------------------------------------------

@dataclass
class PiecewiseAffine:
    """Profile affine on each ]x_k, x_{k+1}[ with end values ``start[k]``, ``end[k]``."""

    breakpoints: np.ndarray
    start: np.ndarray
    end: np.ndarray

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=float)
        self.start = np.atleast_2d(np.asarray(self.start, dtype=float))
        self.end = np.atleast_2d(np.asarray(self.end, dtype=float))
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def a(self):
        return float(self.breakpoints[0])

    @property
    def b(self):
        return float(self.breakpoints[-1])

    @classmethod
    def from_profile(cls, prof):
        return cls(prof.breakpoints.copy(), prof.states.copy(), prof.states.copy())

    def value(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, len(self.start) - 1)
        x0, x1 = self.breakpoints[k], self.breakpoints[k + 1]
        th = ((x - x0) / (x1 - x0))[:, None]
        return self.start[k] * (1 - th) + self.end[k] * th

    def piece_values(self, x_in, xs):
        """Values at the points xs of the affine piece containing x_in."""
        k = int(np.clip(np.searchsorted(self.breakpoints, x_in, side="right") - 1, 0, len(self.start) - 1))
        x0, x1 = self.breakpoints[k], self.breakpoints[k + 1]
        th = ((np.asarray(xs, dtype=float) - x0) / (x1 - x0))[:, None]
        return self.start[k] * (1 - th) + self.end[k] * th

    def staircase(self, nu):
        """Piecewise-constant approximation with steps of at most nu per piece.

        Piece k gets max(ceil(|increment|/nu), ceil(width/nu)) equal cells valued
        at the cell midpoints, so the L1 error is O(nu).
        """
        xs, sts = [self.a], []
        for k in range(len(self.start)):
            x0, x1 = self.breakpoints[k], self.breakpoints[k + 1]
            d = float(np.max(np.abs(self.end[k] - self.start[k])))
            m = 1 if d == 0 else max(math.ceil(d / nu - 1e-9), math.ceil((x1 - x0) / nu - 1e-9))
            edges = np.linspace(x0, x1, m + 1)
            th = (0.5 * (edges[:-1] + edges[1:]) - x0) / (x1 - x0)
            for t in th:
                sts.append(self.start[k] * (1 - t) + self.end[k] * t)
            xs.extend(edges[1:])
        return Profile(np.array(xs), np.array(sts)).merged()

    def fine(self, cells=4000):
        xs = np.linspace(self.a, self.b, cells + 1)
        return Profile(xs, self.value(0.5 * (xs[:-1] + xs[1:])))


def l1_to_affine(profile, target):
    """Exact integral of |profile - target| (l1 over components)."""
    xs = np.union1d(profile.breakpoints, target.breakpoints)
    total = 0.0
    for x0, x1 in zip(xs[:-1], xs[1:]):
        xm = 0.5 * (x0 + x1)
        c = profile.value(np.array([xm]))[0]
        d0, d1 = c - target.piece_values(xm, (x0, x1))
        for p, q in zip(d0, d1):
            if p * q >= 0:
                total += 0.5 * (abs(p) + abs(q)) * (x1 - x0)
            else:  # sign change inside: two triangles
                total += 0.5 * (p * p + q * q) / (abs(p) + abs(q)) * (x1 - x0)
    return float(total)


def random_target(model, a, b, rng, rho, pieces=5, shock=True):
    """Random piecewise-affine profile inside K^rho for temple2.

    Increasing pieces have slope at most 0.8 rho / (b - a); at most one
    downward jump per family, larger than twice the total increase of that
    family, with flat neighbours.  This keeps every increasing front of the
    reversed solution away from the shock until it exits.
    """
    L = b - a
    xs = np.sort(rng.uniform(a, b, pieces - 1))
    xs = np.concatenate([[a], xs, [b]])
    while np.min(np.diff(xs)) < 0.05 * L:
        xs = np.concatenate([[a], np.sort(rng.uniform(a, b, pieces - 1)), [b]])
    box = model.box
    centre = box.mean(axis=1)
    n = model.n
    shock_at = [int(rng.integers(1, pieces)) if shock else -1 for _ in range(n)]
    start = np.zeros((pieces, n))
    end = np.zeros((pieces, n))
    cur = centre + rng.uniform(-0.2, 0.2, n)
    for k in range(pieces):
        for i in range(n):
            if k == shock_at[i]:
                cur[i] -= rng.uniform(0.25, 0.35)
        start[k] = cur
        for i in range(n):
            flat = k in (shock_at[i] - 1, shock_at[i])
            if flat:
                slope = 0.0
            elif rng.random() < 0.5:
                slope = rng.uniform(0.2, 0.8) * rho / L
            else:
                slope = -rng.uniform(0.0, 0.2) / L
            cur[i] = cur[i] + slope * (xs[k + 1] - xs[k])
        end[k] = cur
    return PiecewiseAffine(xs, start, end)


# -- reversed-time solver ---------------------------------------------------

def reversed_solver(model, uL, uR, nu):
    """Jumps of the time-reversed Temple solution: 2-jump left, then 1-jump.

    Each family jump is one front moving at minus its forward speed.  Forward
    rarefaction and shock fronts both travel at the mean of lambda_i on their
    sides, which for temple2 equals lambda_i at the Riemann-coordinate midpoint.
    """
    uL, uR = as_state(uL), as_state(uR)
    mid = np.array([uL[0], uR[1]])
    fan = []
    for i, left, right in ((2, uL, mid), (1, mid, uR)):
        d = right[i - 1] - left[i - 1]
        if d == 0:
            continue
        model.check_state(right)
        if d < 0:
            speed = model.shock_speed(i, left, right)
            kind = SHOCK
        else:
            m = model.rarefaction_state(i, left, 0.5 * (left[i - 1] + right[i - 1]))
            speed = float(model.eigenvalues(m)[i - 1])
            kind = RAREFACTION
        fan.append(Wave(i, kind, left, right, -float(speed), abs(float(d))))
    return fan


# -- blocks -----------------------------------------------------------------

@dataclass
class BackwardBlock:
    target: Profile             # the discretized target at t = tau
    tau: float
    t_start: float              # 3T/4
    omega: np.ndarray
    alpha: list                 # forward control entries at x = a
    beta: list
    tau_prime: float            # forward time of the earliest boundary entry
    same_family_collisions: int
    collisions: int
    events: int


def backward_block(model, psi_nu, tau, T, nu):
    """Trace the target backward from tau to 3T/4 and read off forward controls."""
    span = tau - 0.75 * T
    if span <= 0:
        raise ValueError("need tau > 3T/4")
    eng = FrontTracker(model, psi_nu, ControlPair.absorbing(), nu=nu, solver=reversed_solver)
    traj = eng.run_until(span)
    if eng.n_alive:
        raise HorizonError(f"{eng.n_alive} backward fronts still inside at t = 3T/4")
    alpha, beta = [], []
    same = cols = 0
    s_last = 0.0
    for ev in traj.events:
        if ev.kind == COLLISION:
            cols += 1
            fams = {traj.fronts[i].family for i in ev.fronts_in}
            if len(fams) == 1:
                same += 1
        elif ev.kind == HIT_LEFT:
            alpha.append((tau - ev.time, ev.left))
            s_last = max(s_last, ev.time)
        elif ev.kind == HIT_RIGHT:
            beta.append((tau - ev.time, ev.right))
            s_last = max(s_last, ev.time)
    omega = eng.state_a.copy()
    return BackwardBlock(psi_nu, tau, 0.75 * T, omega, alpha, beta, tau - s_last, same, cols,
                         len(traj.events))


@dataclass
class Washout:
    omega_prime: np.ndarray
    t_clear: float
    events: int


def forward_washout(model, phi, T, nu):
    eng = FrontTracker(model, phi, ControlPair.absorbing(), nu=nu)
    traj = eng.run_until(0.25 * T)
    if eng.n_alive:
        raise WashoutError(f"{eng.n_alive} fronts still inside at T/4")
    t_clear = max((e.time for e in traj.events), default=0.0)
    return Washout(eng.state_a.copy(), t_clear, len(traj.events))


@dataclass
class Connection:
    t0: float
    omega_prime: np.ndarray
    omega: np.ndarray
    alpha: list
    beta: list
    sweep_bound: float          # every injected front has crossed by t0 + sweep_bound


def connect_states(model, omega_prime, omega, T, a, b):
    """Controls on [T/4, 3T/4]: set both boundaries to omega at T/4.

    The boundary filter keeps the 2-component of the jump at a and the
    1-component at b; upward jumps enter as trains of nu-rarefactions.
    """
    omega_prime, omega = as_state(omega_prime), as_state(omega)
    model.check_state(omega)
    t0 = 0.25 * T
    sweep = (b - a) / speed_bounds(model)[0]
    if np.array_equal(omega_prime, omega):
        return Connection(t0, omega_prime, omega, [], [], 0.0)
    return Connection(t0, omega_prime, omega, [(t0, omega)], [(t0, omega)], 2 * sweep)


@dataclass
class SteerPlan:
    T: float
    tau: float
    nu: float
    washout: Washout
    connection: Connection
    backward: BackwardBlock
    controls: ControlPair
    achieved: Profile
    profile_T4: Profile
    profile_3T4: Profile
    l1_error: float             # against the exact target
    l1_error_discrete: float    # against the staircase target
    membership: object = None
    extra: dict = field(default_factory=dict)

    @property
    def omega(self):
        return self.backward.omega

    @property
    def omega_prime(self):
        return self.washout.omega_prime

    def metrics(self):
        return {
            "T": self.T, "tau": self.tau, "nu": self.nu,
            "tau_prime": self.backward.tau_prime,
            "omega": self.omega.tolist(), "omega_prime": self.omega_prime.tolist(),
            "l1_error": self.l1_error, "l1_error_discrete": self.l1_error_discrete,
            "backward_collisions": self.backward.collisions,
            "backward_same_family_collisions": self.backward.same_family_collisions,
            "washout_clear_time": self.washout.t_clear,
            "n_switches": len(self.controls.switch_times()),
        }


def steer_to_target(model, phi, psi, tau, nu, rho=None, check=True):
    """Build controls driving phi to (an O(nu) approximation of) psi at time tau."""
    if model.name != "temple2":
        raise ValueError("steering is implemented for temple2 only")
    if not isinstance(psi, PiecewiseAffine):
        psi = PiecewiseAffine.from_profile(psi)
    a, b = phi.a, phi.b
    T = horizon(model, a, b)
    if tau <= T:
        raise ValueError(f"tau = {tau} must exceed T = {T}")
    rep = None
    if check:
        rho = default_rho(model) if rho is None else rho
        ok, rep = check_membership(model, psi.fine(), rho, eps_jump=2 * nu)
        if not ok:
            raise ValueError(f"target is not in K^rho for rho = {rho}: ratios {rep.ratios}")
    psi_nu = psi.staircase(nu)
    wash = forward_washout(model, phi, T, nu)
    back = backward_block(model, psi_nu, tau, T, nu)
    conn = connect_states(model, wash.omega_prime, back.omega, T, a, b)
    alpha = [(conn.t0, back.omega)] + back.alpha
    beta = [(conn.t0, back.omega)] + back.beta
    controls = ControlPair(alpha, beta)

    eng = FrontTracker(model, phi, controls, nu=nu)
    traj = eng.run_until(tau, sample_times=[0.25 * T, 0.75 * T])
    achieved = eng.profile()
    return SteerPlan(T, tau, nu, wash, conn, back, controls, achieved,
                     traj.snapshots[0.25 * T], traj.snapshots[0.75 * T],
                     l1_to_affine(achieved, psi), l1_distance(achieved, psi_nu), rep,
                     {"events": len(traj.events)})
