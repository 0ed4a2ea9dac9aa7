"""Hyperbolic model systems u_t + f(u)_x = 0 and their wave geometry.

Every model exposes the same small surface: flux, eigenstructure, a chart to
Riemann coordinates ``w``, an admissible box, and the elementary-wave
decomposition used by the Riemann solvers.  States are plain 1-d numpy arrays
in the model's own variables; for ``burgers`` and ``temple2`` those variables
*are* the Riemann coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import itertools
import math

import numpy as np
from scipy.optimize import brentq

from .errors import DegeneracyError, DomainError, OutOfBoxError

# waves whose Riemann-coordinate jump falls below this are dropped
WAVE_TOL = 1e-13
FD_STEP = 1e-6


def as_state(u):
    if type(u) is np.ndarray and u.dtype == np.float64 and u.ndim == 1:
        return u
    return np.atleast_1d(np.asarray(u, dtype=float))


def wedge(r, s):
    return r[0] * s[1] - r[1] * s[0]


class Model:
    """Base class; subclasses fill in the physics."""

    name = "model"
    n = 1
    p = 0
    conservative = True
    state_names: tuple = ("u",)

    def __init__(self, box):
        box = np.array(box, dtype=float).reshape(self.n, 2)
        if np.any(box[:, 0] >= box[:, 1]):
            raise ValueError(f"degenerate box {box.tolist()}")
        box.flags.writeable = False
        self.box = box
        self._box_list = box.tolist()

    def __repr__(self):
        return f"{type(self).__name__}({self.params()})"

    def params(self) -> dict:
        return {"box": self.box.tolist()}

    # -- physics ---------------------------------------------------------
    def flux(self, u):
        raise NotImplementedError

    def eigenvalues(self, u):
        raise NotImplementedError

    def eigenvectors(self, u):
        """Columns are unit right eigenvectors oriented so that D lambda_i . r_i > 0."""
        raise NotImplementedError

    def to_riemann(self, u):
        raise NotImplementedError

    def from_riemann(self, w):
        raise NotImplementedError

    def jacobian(self, u):
        u = as_state(u)
        J = np.empty((self.n, self.n))
        for j in range(self.n):
            h = FD_STEP * max(1.0, abs(u[j]))
            e = np.zeros(self.n)
            e[j] = h
            J[:, j] = (self.flux(u + e) - self.flux(u - e)) / (2 * h)
        return J

    # -- wave geometry ---------------------------------------------------
    def elementary_waves(self, uL, uR):
        """Return ``[(family, left, right), ...]`` connecting uL to uR, unsplit."""
        raise NotImplementedError

    def rarefaction_state(self, i, u, wi):
        """State on the i-rarefaction curve through ``u`` with w_i = wi."""
        w = self.to_riemann(u).copy()
        w[i - 1] = wi
        return self.from_riemann(w)

    def shock_speed(self, i, uL, uR):
        raise NotImplementedError

    # -- box -------------------------------------------------------------
    def in_box(self, u, slack=1e-12):
        for x, (lo, hi) in zip(as_state(u).tolist(), self._box_list):
            if not (lo - slack <= x <= hi + slack):
                return False
        return True

    def check_state(self, u, slack=1e-12):
        if not self.in_box(u, slack):
            raise DomainError(f"{self.name}: state {as_state(u).tolist()} outside box {self.box.tolist()}")

    def grid(self, k=21):
        axes = [np.linspace(lo, hi, k) for lo, hi in self.box]
        return np.array(list(itertools.product(*axes)))


class Burgers(Model):
    """Inviscid Burgers, f(u) = u^2/2.  Engine sanity model (p = 0)."""

    name = "burgers"

    def __init__(self, box=((1.0, 3.0),)):
        super().__init__(box)

    def flux(self, u):
        u = as_state(u)
        return 0.5 * u * u

    def eigenvalues(self, u):
        return as_state(u).copy()

    def eigenvectors(self, u):
        return np.ones((1, 1))

    def to_riemann(self, u):
        return as_state(u).copy()

    def from_riemann(self, w):
        return as_state(w).copy()

    def elementary_waves(self, uL, uR):
        uL, uR = as_state(uL), as_state(uR)
        if uL[0] == uR[0]:
            return []
        return [(1, uL, uR)]

    def shock_speed(self, i, uL, uR):
        return 0.5 * (float(uL[0]) + float(uR[0]))


class Temple2(Model):
    """Genuinely nonlinear Temple-class 2x2 system written in Riemann coordinates.

    lambda_1 = w1 + w2/4, lambda_2 = w2 + w1/4.  An i-wave changes only w_i, so
    wave curves are coordinate lines and interactions leave amplitudes alone.
    There is no conservative flux; the model lives entirely in ``w``.
    """

    name = "temple2"
    n = 2
    p = 1
    conservative = False
    state_names = ("w1", "w2")

    def __init__(self, box=((-3.0, -1.0), (1.0, 3.0))):
        super().__init__(box)

    def flux(self, u):
        raise NotImplementedError("temple2 has no conservative flux; it is evolved in w")

    def eigenvalues(self, u):
        w1, w2 = as_state(u)
        return np.array([w1 + 0.25 * w2, w2 + 0.25 * w1])

    def eigenvectors(self, u):
        return np.eye(2)

    def jacobian(self, u):
        # quasilinear form w_t + diag(lambda) w_x = 0
        return np.diag(self.eigenvalues(u))

    def to_riemann(self, u):
        return as_state(u).copy()

    def from_riemann(self, w):
        return as_state(w).copy()

    def elementary_waves(self, uL, uR):
        uL, uR = as_state(uL), as_state(uR)
        mid = np.array([uR[0], uL[1]])
        waves = []
        if uL[0] != uR[0]:
            waves.append((1, uL, mid))
        if uL[1] != uR[1]:
            waves.append((2, mid if waves else uL, uR))
        return waves

    def shock_speed(self, i, uL, uR):
        return 0.5 * (self.eigenvalues(uL)[i - 1] + self.eigenvalues(uR)[i - 1])


class _TwoFamily(Model):
    """Shared wave-curve machinery for 2x2 systems in (s, u) variables.

    ``s`` is the density-like first variable and ``u`` the velocity.  Both
    wave curves are graphs u(s); rarefaction branches follow Riemann
    invariants, shock branches the closed-form Hugoniot locus
    (u - u0)^2 = g(s0, s).
    """

    n = 2
    p = 1
    check_h7 = True
    # sign of ds and du along the oriented r_i
    s_dir = (1, 1)
    u_dir = (1, 1)

    def _integral_u(self, i, w_other, s):
        raise NotImplementedError

    def _hugoniot_g(self, s0, s):
        raise NotImplementedError

    def wave_curve_u(self, i, state, s, state_is_left=True):
        """u on the i-wave curve through ``state`` at first coordinate ``s``.

        With ``state_is_left`` the curve collects right states reachable from
        ``state``; otherwise the left states that reach it.
        """
        s0, u0 = float(state[0]), float(state[1])
        step = (s - s0) if state_is_left else (s0 - s)
        if step == 0.0:
            return u0
        if math.copysign(1.0, step) == self.s_dir[i - 1]:
            w = self.to_riemann(state)
            return self._integral_u(i, w[2 - i], s)
        g = self._hugoniot_g(s0, s)
        return u0 + self.u_dir[i - 1] * math.copysign(1.0, s - s0) * math.sqrt(max(g, 0.0))

    def _intersect(self, A, A_left, B, B_left):
        """s where the 1-curve through A meets the 2-curve through B."""
        def F(s):
            return self.wave_curve_u(1, A, s, A_left) - self.wave_curve_u(2, B, s, B_left)

        lo = 0.5 * min(A[0], B[0])
        hi = 2.0 * max(A[0], B[0])
        for _ in range(60):
            flo, fhi = F(lo), F(hi)
            if flo == 0.0:
                return lo
            if fhi == 0.0:
                return hi
            if flo * fhi < 0:
                return brentq(F, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
            lo *= 0.5
            hi *= 2.0
        raise OutOfBoxError(f"{self.name}: wave curves through {A.tolist()} and {B.tolist()} do not meet")

    def _waves_from_middle(self, uL, m, uR):
        wL, wm, wR = self.to_riemann(uL), self.to_riemann(m), self.to_riemann(uR)
        d1 = abs(wm[0] - wL[0])
        d2 = abs(wR[1] - wm[1])
        if d1 <= WAVE_TOL and d2 <= WAVE_TOL:
            return [(1, uL, uR)] if d1 >= d2 else [(2, uL, uR)]
        if d1 <= WAVE_TOL:
            return [(2, uL, uR)]
        if d2 <= WAVE_TOL:
            return [(1, uL, uR)]
        return [(1, uL, m), (2, m, uR)]

    def middle_state(self, uL, uR):
        uL, uR = as_state(uL), as_state(uR)
        s = self._intersect(uL, True, uR, False)
        return np.array([s, self.wave_curve_u(1, uL, s, True)])

    def elementary_waves(self, uL, uR):
        uL, uR = as_state(uL), as_state(uR)
        if np.array_equal(uL, uR):
            return []
        m = self.middle_state(uL, uR)
        return self._waves_from_middle(uL, m, uR)

    def steering_middle(self, u_from, u_to):
        """State m with u_from -> m a 1-wave and u_to -> m a 2-wave (both left states).

        Used to steer a constant u_from to u_to: the 1-wave enters from the
        right boundary, then the 2-wave from the left one.
        """
        u_from, u_to = as_state(u_from), as_state(u_to)
        s = self._intersect(u_from, True, u_to, True)
        return np.array([s, self.wave_curve_u(1, u_from, s, True)])

    def shock_speed(self, i, uL, uR):
        ds = float(uR[0]) - float(uL[0])
        return float(self.flux(uR)[0] - self.flux(uL)[0]) / ds


class Gas(_TwoFamily):
    """Isentropic gas in (rho, u) variables:

        rho_t + (u rho)_x = 0
        u_t + (u^2/2 + K^2 rho^(gamma-1)/(gamma-1))_x = 0
    """

    name = "gas"
    state_names = ("rho", "u")
    s_dir = (-1, 1)
    u_dir = (-1, 1)

    def __init__(self, gamma=2.0, K=1.0, box=((0.8, 1.2), (-0.2, 0.2))):
        if not gamma > 1.0:
            raise ValueError("gas model needs gamma > 1")
        if not K > 0:
            raise ValueError("gas model needs K > 0")
        self.gamma = float(gamma)
        self.K = float(K)
        super().__init__(box)
        if self.box[0, 0] <= 0:
            raise ValueError("density box must be positive (no vacuum)")

    def params(self):
        return {"gamma": self.gamma, "K": self.K, "box": self.box.tolist()}

    def pressure(self, rho):
        return self.K ** 2 * rho ** (self.gamma - 1) / (self.gamma - 1)

    def sound_speed(self, rho):
        return self.K * rho ** (0.5 * (self.gamma - 1))

    def flux(self, u):
        rho, v = as_state(u)
        return np.array([rho * v, 0.5 * v * v + self.pressure(rho)])

    def eigenvalues(self, u):
        rho, v = as_state(u)
        if rho <= 0:
            raise DegeneracyError("vacuum state")
        c = self.sound_speed(rho)
        return np.array([v - c, v + c])

    def eigenvectors(self, u):
        rho, v = as_state(u)
        c = self.sound_speed(rho)
        R = np.array([[-rho, rho], [c, c]])
        return R / np.linalg.norm(R, axis=0)

    def to_riemann(self, u):
        rho, v = as_state(u)
        z = 2.0 * self.sound_speed(rho) / (self.gamma - 1)
        return np.array([v - z, v + z])

    def from_riemann(self, w):
        w1, w2 = as_state(w)
        c = 0.25 * (self.gamma - 1) * (w2 - w1)
        if c <= 0:
            raise DomainError("Riemann coordinates imply vacuum")
        rho = (c / self.K) ** (2.0 / (self.gamma - 1))
        return np.array([rho, 0.5 * (w1 + w2)])

    def _integral_u(self, i, w_other, s):
        z = 2.0 * self.sound_speed(s) / (self.gamma - 1)
        return w_other - z if i == 1 else w_other + z

    def _hugoniot_g(self, s0, s):
        return 2.0 * (self.pressure(s) - self.pressure(s0)) * (s - s0) / (s + s0)


class PSystem(_TwoFamily):
    """p-system v_t - u_x = 0, u_t + p(v)_x = 0 with p(v) = kappa v^-gamma.

    Same-family shock collisions emit a rarefaction of the other family here;
    kept as the contrast model that violates the wedge signs of ``gas``.
    """

    name = "psystem"
    state_names = ("v", "u")
    s_dir = (1, -1)
    u_dir = (1, -1)

    def __init__(self, gamma=1.4, kappa=1.0, box=((0.8, 1.2), (-0.2, 0.2))):
        if not gamma > 1.0:
            raise ValueError("p-system needs gamma > 1")
        self.gamma = float(gamma)
        self.kappa = float(kappa)
        super().__init__(box)

    def params(self):
        return {"gamma": self.gamma, "kappa": self.kappa, "box": self.box.tolist()}

    def pressure(self, v):
        return self.kappa * v ** (-self.gamma)

    def _c(self, v):
        return math.sqrt(self.gamma * self.kappa) * v ** (-0.5 * (self.gamma + 1))

    def _phi(self, v):
        return 2.0 * math.sqrt(self.gamma * self.kappa) / (self.gamma - 1) * v ** (-0.5 * (self.gamma - 1))

    def flux(self, u):
        v, vel = as_state(u)
        return np.array([-vel, self.pressure(v)])

    def eigenvalues(self, u):
        v = float(as_state(u)[0])
        if v <= 0:
            raise DegeneracyError("nonpositive specific volume")
        c = self._c(v)
        return np.array([-c, c])

    def eigenvectors(self, u):
        c = self._c(float(as_state(u)[0]))
        R = np.array([[1.0, -1.0], [c, c]])
        return R / np.linalg.norm(R, axis=0)

    def to_riemann(self, u):
        v, vel = as_state(u)
        phi = self._phi(v)
        return np.array([vel - phi, vel + phi])

    def from_riemann(self, w):
        w1, w2 = as_state(w)
        phi = 0.5 * (w2 - w1)
        if phi <= 0:
            raise DomainError("Riemann coordinates out of chart")
        base = phi * (self.gamma - 1) / (2.0 * math.sqrt(self.gamma * self.kappa))
        return np.array([base ** (-2.0 / (self.gamma - 1)), 0.5 * (w1 + w2)])

    def _integral_u(self, i, w_other, s):
        phi = self._phi(s)
        return w_other - phi if i == 1 else w_other + phi

    def _hugoniot_g(self, s0, s):
        return -(self.pressure(s) - self.pressure(s0)) * (s - s0)


_REGISTRY = {"burgers": Burgers, "temple2": Temple2, "gas": Gas, "psystem": PSystem}


def make_model(name, **params):
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(_REGISTRY)}") from None
    return cls(**params)


# -- operations -------------------------------------------------------------

def eval_flux(model, u):
    model.check_state(u)
    return model.flux(as_state(u))


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray
    vectors: np.ndarray  # columns


def eigen(model, u):
    u = as_state(u)
    model.check_state(u)
    lam = model.eigenvalues(u)
    if np.any(np.diff(lam) <= 0):
        raise DegeneracyError(f"{model.name}: eigenvalues {lam.tolist()} not strictly ordered at {u.tolist()}")
    return Spectrum(lam, model.eigenvectors(u))


def eigen_residual(model, u):
    """max_i |Df r_i - lambda_i r_i| with Df by central differences."""
    u = as_state(u)
    J = model.jacobian(u)
    lam = model.eigenvalues(u)
    R = model.eigenvectors(u)
    return float(max(np.linalg.norm(J @ R[:, i] - lam[i] * R[:, i]) for i in range(model.n)))


def to_riemann(model, u):
    model.check_state(u)
    return model.to_riemann(u)


def from_riemann(model, w):
    u = model.from_riemann(w)
    model.check_state(u)
    return u


@dataclass
class HypothesisReport:
    model: str
    samples: int
    strictly_hyperbolic: bool
    genuinely_nonlinear: bool
    speed_separation: bool
    c0: float
    lambda_min: float
    lambda_max: float
    gn_min: float
    max_eigen_residual: float
    h7: dict | None = None
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        base = self.strictly_hyperbolic and self.genuinely_nonlinear and self.speed_separation
        if self.h7 is not None:
            base = base and all(self.h7.values())
        return base

    def to_dict(self):
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return d


def _directional(fun, u, r, eps=FD_STEP):
    return (fun(u + eps * r) - fun(u - eps * r)) / (2 * eps)


def validate_model(model, k=21, gn_floor=1e-8):
    """Grid-sample the box and check strict hyperbolicity, genuine nonlinearity
    and the speed separation lambda_p <= -c0 < 0 < c0 <= lambda_{p+1}."""
    pts = model.grid(k)
    failures = []
    strict = gn = sep = True
    c0 = lam_min = np.inf
    lam_max = 0.0
    gn_min = np.inf
    res_max = 0.0
    h7 = {"lambda1_negative": True, "lambda2_positive": True, "gn_1": True, "gn_2": True,
          "r1_wedge_r2": True, "r1_wedge_Dr1r1": True, "r2_wedge_Dr2r2": True} \
        if getattr(model, "check_h7", False) else None
    for u in pts:
        lam = model.eigenvalues(u)
        R = model.eigenvectors(u)
        if model.n > 1 and np.any(np.diff(lam) <= 0):
            strict = False
            failures.append(f"not strictly hyperbolic at {u.tolist()}")
        neg, pos = lam[: model.p], lam[model.p:]
        if np.any(neg >= 0) or np.any(pos <= 0):
            sep = False
            failures.append(f"speed of wrong sign at {u.tolist()}")
        gap = min(np.min(-neg) if neg.size else np.inf, np.min(pos) if pos.size else np.inf)
        c0 = min(c0, gap)
        lam_min = min(lam_min, float(np.min(np.abs(lam))))
        lam_max = max(lam_max, float(np.max(np.abs(lam))))
        for i in range(model.n):
            d = float(_directional(lambda x: model.eigenvalues(x)[i], u, R[:, i]))
            gn_min = min(gn_min, d)
            if d <= gn_floor:
                gn = False
                failures.append(f"family {i + 1} not genuinely nonlinear at {u.tolist()}")
        if model.conservative or model.name == "temple2":
            res_max = max(res_max, eigen_residual(model, u))
        if h7 is not None:
            h7["lambda1_negative"] &= bool(lam[0] < 0)
            h7["lambda2_positive"] &= bool(lam[1] > 0)
            for i in range(2):
                h7[f"gn_{i + 1}"] &= bool(_directional(lambda x: model.eigenvalues(x)[i], u, R[:, i]) > 0)
            h7["r1_wedge_r2"] &= bool(wedge(R[:, 0], R[:, 1]) < 0)
            for i in range(2):
                Dr = _directional(lambda x: model.eigenvectors(x)[:, i], u, R[:, i])
                h7[f"r{i + 1}_wedge_Dr{i + 1}r{i + 1}"] &= bool(wedge(R[:, i], Dr) < 0)
    if c0 <= 0:
        sep = False
    return HypothesisReport(model.name, len(pts), strict, gn, sep, float(c0), float(lam_min),
                            float(lam_max), float(gn_min), float(res_max), h7, failures[:20])


def speed_bounds(model, k=41):
    """(lambda_min, lambda_max) over a box grid; cached per model instance."""
    cache = model.__dict__.get("_speed_bounds")
    if cache is None:
        speeds = np.abs(np.array([model.eigenvalues(u) for u in model.grid(k)]))
        cache = (float(speeds.min()), float(speeds.max()))
        model.__dict__["_speed_bounds"] = cache
    return cache
