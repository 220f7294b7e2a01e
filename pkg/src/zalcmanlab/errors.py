"""Exception hierarchy shared by all modules."""


class ZalcmanLabError(Exception):
    """Base class for every error raised by this package."""


class ExpressionError(ZalcmanLabError, ValueError):
    """Malformed expression tree or expression text."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class DimensionError(ZalcmanLabError, ValueError):
    """A point or center does not match the expression dimension."""


class ZeroFreeError(ZalcmanLabError, ValueError):
    """A reciprocal was requested without a zero-free declaration, or a
    declared zero-free function was found to (nearly) vanish."""


class NumericRangeError(ZalcmanLabError, ArithmeticError):
    """Evaluation produced a non-finite value."""

    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} at z = {_fmt_point(point)}"
        super().__init__(message)
        self.point = point


class DomainError(ZalcmanLabError, ValueError):
    """A point lies outside the region where an operation is defined."""


class PreconditionUnmet(ZalcmanLabError):
    """The weighted functional never exceeds 1 at this index, so no
    rescaling step can be extracted."""

    def __init__(self, message, max_value=None):
        super().__init__(message)
        self.max_value = max_value


class NonConvergence(ZalcmanLabError):
    """Bisection failed to reach the requested tolerance."""


class MartyDivergingError(ZalcmanLabError):
    """An operation needing a Marty-bounded family got a diverging one."""


class ConfigError(ZalcmanLabError, ValueError):
    """Invalid experiment configuration."""


def _fmt_point(point):
    try:
        return "(" + ", ".join(f"{complex(c):.6g}" for c in point) + ")"
    except TypeError:
        return repr(point)
