"""Exception types and threshold results shared across modules."""

from __future__ import annotations

from dataclasses import dataclass


class EdskError(Exception):
    """Base class for all library errors."""


class EmptyInput(EdskError, ValueError):
    pass


class LevelError(EdskError, IndexError):
    pass


class ParamMismatch(EdskError, ValueError):
    """Two sketches were built with incompatible parameters (seed, n, algorithm)."""


class ParamError(EdskError, ValueError):
    pass


class DiagError(EdskError, ValueError):
    pass


class NotPermutation(EdskError, ValueError):
    pass


class CorruptSketch(EdskError, ValueError):
    pass


class FormatError(EdskError, ValueError):
    """An EDSK file failed to parse or verify."""


class TooLarge(EdskError, ValueError):
    pass


@dataclass(frozen=True)
class ExceedsThreshold:
    """Returned by bounded queries when the distance is larger than ``k``."""

    k: int

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class AboveThreshold:
    """Returned by the banded window DP when its cost exceeds the cutoff."""

    delta: float
    cutoff: float

    def __bool__(self) -> bool:
        return False
