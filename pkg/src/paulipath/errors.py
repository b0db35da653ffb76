"""Exception types shared across the package."""


class PauliPathError(Exception):
    """Base class for all package errors."""


class ParseError(PauliPathError):
    """Malformed circuit, observable or state-spec input."""


class DimensionMismatchError(PauliPathError):
    """Operands defined on different qubit counts."""


class NoiseModelError(PauliPathError):
    """An algorithm was invoked with a noise model it does not handle."""


class CapExceededError(PauliPathError):
    """A dense computation was requested beyond its qubit cap."""
