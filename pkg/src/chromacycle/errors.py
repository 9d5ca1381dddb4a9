"""Exception types raised across the package."""


class ChromaCycleError(Exception):
    """Base class for all package-specific errors."""


class ShapeMismatchError(ChromaCycleError, ValueError):
    """Image planes or tensors have incompatible shapes."""


class UnsupportedImageError(ChromaCycleError, ValueError):
    """File exists but is not a readable raster image."""


class ManifestError(ChromaCycleError, ValueError):
    """Dataset manifest is malformed or references unreadable files."""


class CheckpointError(ChromaCycleError, ValueError):
    """Checkpoint file is malformed, truncated, or version-incompatible."""


class RegimeMismatchError(CheckpointError):
    """Checkpoint regime does not match the requested operation."""


class TrainingDivergedError(ChromaCycleError, RuntimeError):
    """A loss became non-finite; training aborted."""

    def __init__(self, term: str, iteration: int):
        self.term = term
        self.iteration = iteration
        super().__init__(
            f"non-finite value in '{term}' at iteration {iteration}; "
            "training aborted"
        )
