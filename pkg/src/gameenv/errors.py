"""Exception hierarchy.

Each family maps to one CLI exit code: configuration problems exit with 2,
numerical failures with 3.
"""


class GameEnvError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(GameEnvError, ValueError):
    """Invalid parameter values or malformed parameter/scenario files."""


class DomainError(GameEnvError, ValueError):
    """A point lies outside the unit square (or outside an operation's domain)."""


class UnsupportedConfigurationError(GameEnvError, ValueError):
    """The requested combination of parameters is outside what an operation supports."""


class PreconditionError(GameEnvError, ValueError):
    """An operation was called outside the regime its formulas are valid for."""


class SingularPointError(GameEnvError, ValueError):
    """Evaluation at a point where the quantity is singular (e.g. x=0 for a Dulac factor)."""


class NumericalError(GameEnvError, RuntimeError):
    """A numerical procedure failed."""


class IntegrationError(NumericalError):
    """The ODE integrator could not advance (step size underflow)."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class DegenerateEigenvectorError(NumericalError):
    """Eigenvectors could not be normalized as required."""
