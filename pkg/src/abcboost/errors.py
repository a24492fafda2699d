"""Exception types shared across the package."""


class DataError(ValueError):
    """Raised when an input file or dataset violates a precondition."""


class TrainingError(RuntimeError):
    """Raised when training cannot proceed (bad config, non-finite loss)."""


class ModelIOError(ValueError):
    """Raised when a model file is corrupt, truncated, or unsupported."""
