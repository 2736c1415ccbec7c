"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage problems (bad parameters)
exit 1, data problems (bad files, degenerate inputs) exit 2.
"""


class FlipboundError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(FlipboundError, ValueError):
    """A parameter is outside its documented domain (e.g. k = 0, gamma <= 0)."""


class DegenerateInputError(FlipboundError, ValueError):
    """The input data makes the requested quantity undefined.

    The message names the offending point index where applicable.
    """


class UnboundedConditionError(FlipboundError, ValueError):
    """A requested bound is infinite for the given inputs (e.g. shift radius
    reaching the nearest data point)."""


class DataError(FlipboundError, ValueError):
    """A file could not be parsed or violates its schema."""
