class SolyanikError(Exception):
    """Base class for library errors."""


class DimensionMismatch(SolyanikError, ValueError):
    pass


class CapExceeded(SolyanikError):
    """An enumeration would exceed its configured size cap."""


class InvalidSystem(SolyanikError, ValueError):
    """A finite system failed validation (bijection, weights or commutation)."""
