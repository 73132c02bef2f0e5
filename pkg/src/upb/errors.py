"""Exception hierarchy shared across the package."""


class UpbError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(UpbError):
    """Input data violates a structural invariant (unitarity, duplicates, ranges)."""


class DimensionError(ValidationError):
    """Operands are non-square or have incompatible shapes."""


class ConfigError(UpbError):
    """Integration or solver settings are outside their allowed ranges."""


class UnsupportedStrategyError(ConfigError):
    """The requested integration strategy is unavailable for this dimension."""


class NumericalError(UpbError):
    """An iterative numerical procedure failed to converge.

    Carries the last bisection bracket in ``bracket`` when raised by the
    radius solver, so callers can inspect how far the solve got.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class RangeError(UpbError):
    """A closed-form value exceeds the representable floating-point range."""


class ParseError(UpbError):
    """A constellation file could not be parsed."""
