"""Exception types raised across the package."""


class ParameterError(ValueError):
    """Physical parameters violate a model invariant."""


class ModelBreakdown(RuntimeError):
    """The normal reaction is non-positive (the top leaves the table) or ill-defined."""


class ChartSingularity(RuntimeError):
    """The Euler-angle chart is evaluated inside the pole guard band."""


class DegenerateCase(ArithmeticError):
    """Linear stability is marginal and cannot be decided."""
