"""Exception types shared across the package.

Every error the library raises on purpose derives from :class:`SkewprodError`
so the CLI can map them onto exit codes.
"""


class SkewprodError(Exception):
    pass


class ValidationError(SkewprodError, ValueError):
    """Bad user input (config keys, parameter ranges)."""


class NotFound(SkewprodError):
    """A search ran out of budget without producing the requested object."""


class BudgetExhausted(NotFound):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class IterationCap(NotFound):
    pass


class NoSolution(NotFound):
    pass


class NotPeriodic(SkewprodError, ValueError):
    pass


class NumericalError(SkewprodError):
    """Numerical certification failed."""


class NoUnitDerivativeCrossing(NumericalError):
    pass


class DegenerateRoot(NumericalError):
    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class MBoundExceeded(NumericalError):
    pass


class PrecisionLoss(NumericalError):
    pass


class OrientationError(NumericalError):
    pass


class CommutationViolated(NumericalError):
    pass
