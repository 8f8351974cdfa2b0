"""Exception types raised by the toolkit."""


class TwoBodyError(ValueError):
    """Base class for every error raised by the toolkit."""


class IndexRangeError(TwoBodyError):
    """A matrix or generator index is outside its documented range."""


class DomainError(TwoBodyError):
    """A coefficient or kinematic map was evaluated at a singular or forbidden point."""


class OrderError(TwoBodyError):
    """A differential operator would exceed the supported derivative order."""


class NonUnitaryError(TwoBodyError):
    """A conjugating matrix failed the unitarity check."""


class GridError(TwoBodyError):
    """Invalid grid, packet or field sampling request."""


class EvolutionError(TwoBodyError):
    """Time stepping produced non-finite values."""

    def __init__(self, message: str, step_index: int):
        super().__init__(message)
        self.step_index = step_index


class ConfigError(TwoBodyError):
    """Unreadable or invalid configuration, or an unknown suite."""
