"""Exception hierarchy shared across the package.

Two families: hard errors (``ValidationError`` and friends, mapped to CLI
exit code 2) and flow signals (``FeatureLost``, ``AssignmentImpossible``,
``UnscorableTrack``) that callers are expected to catch as part of normal
operation.
"""


class TrackwatchError(Exception):
    """Base class for everything raised by this package."""


class ValidationError(TrackwatchError):
    """Input violates a documented precondition or invariant."""


class ParseError(ValidationError):
    """Malformed input content (bad JSONL line, bad PGM header, ...)."""


class DegenerateInputError(ValidationError):
    """Input too small/empty for the operation to be defined."""


class ModelFormatError(ValidationError):
    """Model file is truncated, corrupt, or has the wrong format version."""


class FeatureLost(TrackwatchError):
    """A tracked window diverged, left the frame, or lost texture."""


class AssignmentImpossible(TrackwatchError):
    """Every vocabulary primitive is orthogonal to the query tracklet."""


class UnscorableTrack(TrackwatchError):
    """Track is too short to canonize at the smallest model scale."""
