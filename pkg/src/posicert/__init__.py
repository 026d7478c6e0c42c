"""Rigorous positivity certificates for semilinear elliptic problems."""
from .errors import ConfigurationError, DomainError, InputError, PosicertError, PrecisionError
from .interval import Interval

__all__ = [
    "ConfigurationError",
    "DomainError",
    "InputError",
    "Interval",
    "PosicertError",
    "PrecisionError",
]
__version__ = "0.1.0"
