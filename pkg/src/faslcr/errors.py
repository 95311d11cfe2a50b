"""Semantic exception hierarchy shared by all faslcr modules."""


class FasLcrError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FasLcrError, ValueError):
    """A configuration object or sweep grid violates its contract."""


class DomainError(FasLcrError, ValueError):
    """A numeric argument is outside the mathematical domain of an operation."""


class SingularityError(FasLcrError, ValueError):
    """A correlation coefficient sits at (or numerically at) the identical-channel
    singularity; callers must route to the identical-channel closed form."""


class AccuracyError(FasLcrError, ArithmeticError):
    """A truncated series or adaptive quadrature failed to converge within its
    budget.  ``partial`` carries the best value accumulated so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
