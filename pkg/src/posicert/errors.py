"""Exception types shared across the package."""


class PosicertError(Exception):
    """Base class for every error raised by posicert."""


class DomainError(PosicertError, ValueError):
    """An argument lies outside the set where an enclosure is established."""


class PrecisionError(PosicertError, ArithmeticError):
    """Binary64 enclosures are too wide to resolve the requested quantity."""


class ConfigurationError(PosicertError, ValueError):
    """A computation lacks a required input, e.g. no eigenvalue source."""


class InputError(PosicertError, ValueError):
    """A file or command-line value could not be parsed."""
