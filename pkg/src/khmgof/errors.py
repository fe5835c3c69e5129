"""Exception hierarchy shared by every module."""


class KhmgofError(Exception):
    """Base class for all library errors."""


class DomainError(KhmgofError, ValueError):
    """An argument lies outside the domain of the operation."""


class TailOverflowError(DomainError):
    """A point sits too deep in the right tail of the hypothesized law."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class IllConditionedError(KhmgofError, ArithmeticError):
    """The incomplete information matrix cannot be inverted reliably."""


class EmptyWindowError(DomainError):
    """The boxcar window around ``x`` contains no covariates."""

    def __init__(self, x, a):
        self.x = float(x)
        self.a = float(a)
        super().__init__(f"empty window at x={self.x!r} with half-width a={self.a!r}")


class DegenerateSampleError(DomainError):
    """Sample carries no spread (e.g. all residuals equal)."""


class FamilySpecError(DomainError):
    """Unparseable family specification string."""


class ConfigurationError(KhmgofError, ValueError):
    """Invalid experiment or run configuration."""


class ExperimentError(KhmgofError, RuntimeError):
    """Monte Carlo experiment failed (too many aborted replicates)."""
