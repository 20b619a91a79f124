"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class RRGError(Exception):
    """Base class for all errors raised by rrgedge."""


class InvalidParams(RRGError, ValueError):
    pass


class RetriesExceeded(RRGError, RuntimeError):
    pass


class IndexOutOfRange(RRGError, IndexError):
    pass


class NotSwitchable(RRGError, ValueError):
    pass


class ForestTooLarge(RRGError, ValueError):
    pass


class DegreeTooSmall(RRGError, ValueError):
    pass


class NoConvergence(RRGError, RuntimeError):
    pass


class TruncationNotConverged(RRGError, ArithmeticError):
    pass


class DepthTooSmall(RRGError, ValueError):
    pass


class OnSupport(RRGError, ValueError):
    pass


class RootBracketFailure(RRGError, RuntimeError):
    pass


class NewtonDiverged(RRGError, RuntimeError):
    def __init__(self, message: str, trace: list[complex] | None = None):
        super().__init__(message)
        self.trace = list(trace or [])


class ShapeMismatch(RRGError, ValueError):
    pass


class OdeBlowup(RRGError, RuntimeError):
    pass


class OutOfRange(RRGError, ValueError):
    pass


class ConfigError(RRGError, ValueError):
    pass
