"""Front tracking and boundary control for 1-D hyperbolic systems on an interval."""

__version__ = "0.1.0"

from .errors import (ConfigError, DegeneracyError, DomainError, FrontCapError, FrontControlError,
                     HorizonError, HypothesisError, NumericalAbort, OutOfBoxError, WashoutError)
from .fronttrack import (ControlPair, FrontTracker, Profile, Trajectory, boundary_traces, l1_distance,
                         sample_profile, total_variation)
from .models import (Burgers, Gas, PSystem, Temple2, eigen, eval_flux, from_riemann, make_model,
                     to_riemann, validate_model)
from .riemann import (solve_boundary_riemann_left, solve_boundary_riemann_right, rh_residual,
                      solve_riemann)
from .oleinik import check_membership, lemma1_check, oleinik_ratios

__all__ = [
    "ConfigError", "DegeneracyError", "DomainError", "FrontCapError", "FrontControlError", "HorizonError",
    "HypothesisError", "NumericalAbort", "OutOfBoxError", "WashoutError",
    "ControlPair", "FrontTracker", "Profile", "Trajectory", "boundary_traces", "l1_distance",
    "sample_profile", "total_variation",
    "Burgers", "Gas", "PSystem", "Temple2", "eigen", "eval_flux", "from_riemann", "make_model",
    "to_riemann", "validate_model",
    "solve_boundary_riemann_left", "solve_boundary_riemann_right", "rh_residual", "solve_riemann",
    "check_membership", "lemma1_check", "oleinik_ratios",
]
