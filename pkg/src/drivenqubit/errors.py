"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class PreconditionError(ValueError):
    """Input data does not satisfy an analysis precondition (length, sampling, ...)."""


class ConvergenceError(RuntimeError):
    """A numerical solve failed to converge.

    ``profile`` carries whatever diagnostic data the solver collected, e.g. the
    residual sampled on a grid of trial values.
    """

    def __init__(self, message, profile=None):
        super().__init__(message)
        self.profile = profile


class CDTProximityWarning(UserWarning):
    """An analytic formula is evaluated outside the regime it was derived for."""
