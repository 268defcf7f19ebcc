"""Exception types shared by every module."""


class CerebarmError(Exception):
    """Base class for all package errors."""


class ContractViolationError(CerebarmError):
    """An operation was called with arguments or state outside its contract."""


class ConfigurationError(CerebarmError):
    """A configuration value or file violates an invariant."""


class NumericalDivergenceError(CerebarmError):
    """Plant integration produced a non-finite state.

    Carries a ``diagnostics`` dict describing the state at the moment of
    failure so a harness can abort with a useful message.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
