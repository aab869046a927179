"""Exception hierarchy shared by all modules."""


class MfqError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MfqError, ValueError):
    """An argument lies outside the domain of the operation."""


class ValidationError(MfqError, ValueError):
    """An object fails a structural check (e.g. a non-unitary gate)."""


class ConfigurationError(MfqError, ValueError):
    """Parameters are individually valid but cannot be combined."""


class ResourceError(MfqError):
    """A requested problem would exceed the configured memory budget."""


class ReadoutSingularError(MfqError, ArithmeticError):
    """The reference component of a marginal vanished; x cannot be read out."""
