"""Exception hierarchy shared by all modules."""


class AptRingsError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(AptRingsError, ValueError):
    """A physical parameter or argument is outside its domain."""


class ConfigError(AptRingsError, ValueError):
    """A parameter or scenario file could not be interpreted."""


class SearchError(AptRingsError, ValueError):
    """A root search was given a bracket without a sign change."""


class SingularityError(AptRingsError, ArithmeticError):
    """A closed-form expression hits a pole."""


class GridError(AptRingsError, ValueError):
    """Sample arrays are too short, mismatched, or defined on different grids."""


class NumericalError(AptRingsError, ArithmeticError):
    """Base for failures of a numerical procedure."""


class StabilityError(NumericalError):
    """An explicit time step blew up."""


class FitError(NumericalError):
    """A least-squares estimate could not be formed."""


class CadenceError(NumericalError):
    """Snapshots are too sparse to unwrap a phase unambiguously."""
