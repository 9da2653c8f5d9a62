"""Exception hierarchy shared across the package."""


class SkcError(Exception):
    """Base class for all package errors."""


class DomainError(SkcError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularSupportError(SkcError, ValueError):
    """Pointwise density requested for a delta-supported spectrum."""


class NumericalError(SkcError, ArithmeticError):
    """A numerical procedure failed or produced an unhealthy result."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class QuadratureError(NumericalError):
    """Quadrature did not converge within its node budget."""


class ConfigError(SkcError):
    """Invalid sweep configuration.

    ``key`` names the offending field (dotted path) and ``line`` the
    1-based line in the source file, when it can be located.
    """

    def __init__(self, message, key=None, line=None):
        where = ""
        if key is not None:
            where += f" [key: {key}"
            if line is not None:
                where += f", line {line}"
            where += "]"
        super().__init__(message + where)
        self.key = key
        self.line = line
