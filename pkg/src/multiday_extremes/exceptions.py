"""Exception hierarchy shared by the library and the command line."""


class ExtremesError(Exception):
    """Base class for all package errors."""


class DataValidationError(ExtremesError, ValueError):
    """Input data violates a documented invariant."""


class ParseError(DataValidationError):
    """A file could not be parsed; the message names the file and row."""


class InfeasibleError(ExtremesError):
    """An estimate or scenario cannot be computed from the given inputs."""


class ConvergenceError(ExtremesError):
    """A fit did not converge where a converged fit is required."""
