"""Exception types shared across the toolkit."""


class SwarmPatternError(Exception):
    """Base class for every toolkit-specific error."""


class DegenerateParameterError(SwarmPatternError, ValueError):
    """A required denominator or scale vanishes for the given parameters."""


class StabilityError(SwarmPatternError, ValueError):
    """An equilibrium quantity was requested for non-convergent parameters."""


class DivergenceError(SwarmPatternError, RuntimeError):
    """An iteration blew up.  ``partial`` holds whatever was computed."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class ConvergenceError(SwarmPatternError, RuntimeError):
    """An iterative method ran out of iterations without meeting tolerance."""


class ConsistencyError(SwarmPatternError, RuntimeError):
    """A closed-form solution failed its own verification residual."""


class ScheduleError(SwarmPatternError, ValueError):
    """Schedule registry misuse or a schedule contract violation."""


class SampleError(SwarmPatternError, ValueError):
    """An empirical estimator received too few or degenerate samples."""
