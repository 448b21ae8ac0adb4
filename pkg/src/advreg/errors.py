"""Exception hierarchy shared by all advreg modules."""


class AdvRegError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(AdvRegError, ValueError):
    """Array shapes do not chain or do not match declared sizes."""


class InputError(AdvRegError, ValueError):
    """A caller-supplied value is out of range or malformed."""


class ConfigError(AdvRegError, ValueError):
    """A configuration object violates its invariants."""


class StateError(AdvRegError, RuntimeError):
    """An operation was invoked with stale or mismatched internal state."""


class SplitError(AdvRegError, ValueError):
    """Dataset splits overlap where disjointness is required."""


class TrainingError(AdvRegError, RuntimeError):
    """Training diverged (non-finite loss). Carries the epoch index."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


class FormatError(AdvRegError, ValueError):
    """A file could not be parsed or violates its schema."""
