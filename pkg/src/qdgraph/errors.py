"""Exception types shared across the package."""


class QDError(Exception):
    """Base class for all errors raised by qdgraph."""


class DegreeError(QDError, ValueError):
    """A polynomial has the wrong degree for the requested operation."""


class DomainError(QDError, ValueError):
    """An argument lies outside the domain of an operation."""


class NotApplicable(QDError, ValueError):
    """The input belongs to a case handled by a different code path."""


class BranchJump(QDError):
    """A square-root continuation step was too coarse to follow the branch."""


class PathTooClose(QDError, ValueError):
    """An integration path passes too close to a critical point."""


class DegenerateError(QDError, ValueError):
    """Repeated zeros or a zero colliding with the pole at the origin."""


class NoMeasure(QDError):
    """The short-trajectory pattern does not support a limit measure.

    The ``reason`` attribute is one of ``"Degenerate"``, ``"ThreeShorts"``,
    ``"ShortCount"`` or ``"Incomplete"``.
    """

    def __init__(self, reason, message=""):
        super().__init__(f"{reason}: {message}" if message else reason)
        self.reason = reason
