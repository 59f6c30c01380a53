"""Exception types shared across the package."""


class HestonSimError(Exception):
    """Base class for all package errors."""


class ParameterError(HestonSimError, ValueError):
    """A caller-supplied parameter is out of its admissible domain."""


class DomainError(HestonSimError, ValueError):
    """A numerically valid input falls outside the range an algorithm can evaluate."""


class NumericalError(HestonSimError, ArithmeticError):
    """An internal numerical procedure failed to converge or lost consistency."""


class ConfigurationError(HestonSimError, ValueError):
    """Scheme, product, or experiment settings are mutually inconsistent."""
