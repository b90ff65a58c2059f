"""Exception hierarchy shared by all spinlind modules."""


class SpinlindError(Exception):
    """Base class for every error raised by this package."""


class ArgumentError(SpinlindError, ValueError):
    """An argument is outside the domain of the operation."""


class DegenerateFieldError(ArgumentError):
    """Both field components vanish, so the field direction is undefined."""


class CapacityError(SpinlindError):
    """The requested problem exceeds the dense-storage guard."""


class ConsistencyError(SpinlindError):
    """Objects built from different chain specifications were combined."""


class NumericError(SpinlindError, ArithmeticError):
    """A numerical routine failed or produced an unphysical result."""


class UnderdeterminedError(SpinlindError):
    """The steady state is not unique and no initial state was supplied."""


class ConfigError(SpinlindError):
    """A configuration file could not be parsed or validated."""

    def __init__(self, message, *, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class SweepPointError(SpinlindError):
    """A solver failure at one point of a parameter sweep."""

    def __init__(self, point, cause):
        self.point = point
        self.cause = cause
        super().__init__(f"failed at grid point {point!r}: {cause}")


class DegenerateTransitionWarning(UserWarning):
    """A bath couples two degenerate levels; the rate equation may be incomplete."""
