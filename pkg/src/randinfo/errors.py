"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure (CLI exit code 2)."""


class ConvergenceError(NumericalError):
    """An iterative solver did not converge.

    Carries the best available estimate so callers can decide whether to
    salvage it; the error is never swallowed silently.
    """

    def __init__(self, message, *, estimate=None, iterations=None, residual=None):
        super().__init__(message)
        self.estimate = estimate
        self.iterations = iterations
        self.residual = residual


class RankDeficiencyError(NumericalError):
    """A matrix that must have full numerical rank does not."""


class ResourceLimitError(NumericalError):
    """A requested allocation exceeds the configured cap."""
