"""Exception hierarchy.

Every error raised on bad input derives from :class:`DivergenceError`, itself a
``ValueError``, so callers can catch the whole family at once.
"""


class DivergenceError(ValueError):
    pass


class NegativeEntry(DivergenceError):
    pass


class NonFinite(DivergenceError):
    pass


class SumOutOfTolerance(DivergenceError):
    pass


class TooFewClasses(DivergenceError):
    pass


class OutOfRange(DivergenceError):
    pass


class DimensionMismatch(DivergenceError):
    pass


class InvalidAlpha(DivergenceError):
    pass


class ZeroInReference(DivergenceError):
    pass


class ZeroEntry(DivergenceError):
    pass


class MissingDerivative(DivergenceError):
    pass


class InvalidGenerator(DivergenceError):
    pass


class InfeasibleConstraint(DivergenceError):
    pass


class RejectionBudgetExceeded(DivergenceError):
    pass


class UnknownMeasure(DivergenceError):
    pass


class EmptyInput(DivergenceError):
    pass


class WriteFailure(OSError):
    pass


class InvariantViolation(AssertionError):
    """A relation that holds by theorem failed numerically; always a bug."""
