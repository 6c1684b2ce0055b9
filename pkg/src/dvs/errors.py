"""Exception hierarchy shared across the package.

``ConfigError`` maps to CLI exit code 2, every other ``DVSError`` (and
generic data problems) to exit code 3.
"""


class DVSError(Exception):
    """Base class for all package errors."""


class ShapeError(DVSError):
    """Grid dimensions disagree with what an operation requires."""


class BoundsError(DVSError):
    """A region geometry reaches outside its frame."""


class ClassRangeError(DVSError):
    """A label id is outside [0, num_classes)."""


class ConfigError(DVSError):
    """Invalid configuration file, flag value, or parameter combination."""


class LifecycleError(DVSError):
    """Scheduler state machine used out of order."""


class SequenceError(DVSError):
    """Frame index outside the rendered sequence."""


class CompletenessError(DVSError):
    """Stitching received fewer regions than the scheme produces."""


class UndefinedMeasureError(DVSError):
    """A metric has no defined value (e.g. mIoU of an empty matrix)."""
