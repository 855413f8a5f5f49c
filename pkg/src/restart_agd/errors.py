"""Exception hierarchy shared by the solver, certifier and CLI."""


class RestartAGDError(Exception):
    """Base class for all package errors."""


class ArgumentError(RestartAGDError, ValueError):
    """Bad input to an objective or solver (shape mismatch, NaN, ...)."""


class NumericError(RestartAGDError, ArithmeticError):
    """A non-finite value appeared during an iteration."""


class GenerationError(RestartAGDError):
    """A randomly generated problem failed its validity check."""


class DomainError(RestartAGDError, ValueError):
    """A bound formula was evaluated outside the range where it is defined."""


class PreconditionError(RestartAGDError):
    """A checker was handed a trace it cannot certify."""


class ConfigError(RestartAGDError, ValueError):
    """Invalid experiment configuration. ``field`` names the offending key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
