"""Classical emulator of the mean-field multi-copy quantum solver for nonlinear ODEs."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigurationError,
    DomainError,
    MfqError,
    ReadoutSingularError,
    ResourceError,
    ValidationError,
)
from .ode import OdeSpec  # noqa: E402

__all__ = [
    "ConfigurationError",
    "DomainError",
    "MfqError",
    "OdeSpec",
    "ReadoutSingularError",
    "ResourceError",
    "ValidationError",
    "__version__",
]
