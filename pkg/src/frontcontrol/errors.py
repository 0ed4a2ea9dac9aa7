"""Exception hierarchy shared by the solver modules."""


class FrontControlError(Exception):
    """Base class for all package errors."""


class DomainError(FrontControlError):
    """A state lies outside the admissible box of the model."""


class OutOfBoxError(DomainError):
    """A wave curve or interaction left the admissible box."""


class DegeneracyError(FrontControlError):
    """Strict hyperbolicity fails at the requested state."""


class NumericalAbort(FrontControlError):
    """The engine gave up (front cap reached, incomplete washout...)."""


class FrontCapError(NumericalAbort):
    pass


class HorizonError(NumericalAbort):
    """A backward-constructed front survived past the allotted window."""


class WashoutError(NumericalAbort):
    """Fronts were still alive at the end of the washout block."""


class ConfigError(FrontControlError):
    pass


class HypothesisError(FrontControlError):
    """The model fails a structural hypothesis required by the requested analysis."""
