"""Exception and warning types raised by the package."""


class LogSLError(Exception):
    """Base class for all package errors."""

    #: simulation time at which the error occurred, when known
    time = None


class InvalidParam(LogSLError, ValueError):
    """A model or analysis parameter lies outside its admissible range."""


class ZeroMean(LogSLError):
    """The field's mean vanishes; the polar decomposition is undefined."""


class DomainViolation(LogSLError):
    """The field left the admissible domain of the analytic logarithm."""


class ZeroModulus(LogSLError):
    """A grid value is (numerically) zero where a logarithm is required."""


class BudgetExceeded(LogSLError):
    """An enumeration or simulation would exceed its configured budget."""


class DegenerateWindow(LogSLError):
    """Too few usable samples remain in a rate-fitting window."""


class BranchWarning(UserWarning):
    """A pointwise phase sits close to the branch cut of the principal argument."""
