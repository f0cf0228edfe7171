"""Exception hierarchy shared by the library and the command line."""


class SpillnetError(Exception):
    """Base class for all library errors."""


class ConfigError(SpillnetError, ValueError):
    """Invalid pipeline configuration."""


class DataError(SpillnetError, ValueError):
    """Malformed or inconsistent input data."""


class NumericalError(SpillnetError, ArithmeticError):
    """A numerical routine failed (overflow, loss of definiteness, ...)."""


class CovarianceRecursionError(NumericalError):
    """The BEKK recursion produced a non positive-definite H_t."""

    def __init__(self, t, message=None):
        super().__init__(message or f"conditional covariance not positive definite at t={t}")
        self.t = t
