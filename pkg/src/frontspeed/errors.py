"""Exception types raised across the package."""


class FrontSpeedError(Exception):
    """Base class for all package errors."""


class ShapeError(FrontSpeedError, ValueError):
    pass


class ClassificationError(FrontSpeedError, ValueError):
    """A check was requested for a nonlinearity it does not apply to."""


class StepSizeError(FrontSpeedError, RuntimeError):
    """Time step too large to keep the propagated solution positive."""


class ConvergenceError(FrontSpeedError, RuntimeError):
    """Power iteration did not settle within the iteration budget.

    ``mu_prev`` and ``mu_last`` are the final two growth-rate iterates and
    ``result`` the partially converged :class:`EigenResult`.
    """

    def __init__(self, message, mu_prev, mu_last, result=None):
        super().__init__(message)
        self.mu_prev = mu_prev
        self.mu_last = mu_last
        self.result = result


class StructureError(FrontSpeedError, RuntimeError):
    """The sampled dispersion curve does not have the expected shape."""


class OrderingError(FrontSpeedError, ValueError):
    pass


class GeometryError(FrontSpeedError, ValueError):
    pass


class StabilityError(FrontSpeedError, RuntimeError):
    pass


class FrontAbsentError(FrontSpeedError, ValueError):
    pass


class InsufficientDataError(FrontSpeedError, ValueError):
    pass
