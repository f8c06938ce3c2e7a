"""Exception types shared across the toolkit.

Each class carries a short stable ``code`` used by the CLI (error-message
prefixes) and the HTTP service (JSON error bodies).
"""


class PaletteKitError(Exception):
    """Base class for all toolkit errors."""

    code = "error"


class DecodeError(PaletteKitError):
    """Input bytes are not a decodable PNG image."""

    code = "bad_image"


class DimensionMismatchError(PaletteKitError):
    """Two rasters/planes that must share dimensions do not."""

    code = "dimension_mismatch"


class EmptyMaskError(PaletteKitError):
    """A mask with at least one set pixel was required."""

    code = "empty_mask"


class OutOfBoundsError(PaletteKitError):
    """A rectangle or index lies outside the image bounds."""

    code = "out_of_bounds"


class SizeMismatchError(PaletteKitError):
    """Source and target palettes differ in length."""

    code = "palette_size_mismatch"


class MissingTextureError(PaletteKitError):
    """Texture conditioning requested without a texture source image."""

    code = "missing_texture"


class ShapeMismatchError(PaletteKitError):
    """Tensor shapes are incompatible."""

    code = "shape_mismatch"


class InvalidScheduleError(PaletteKitError):
    """Noise-schedule parameters are invalid."""

    code = "invalid_schedule"


class EmptyDatasetError(PaletteKitError):
    """Training requested on an empty dataset."""

    code = "empty_dataset"


class FrozenViolationError(PaletteKitError):
    """A frozen base parameter changed during control training."""

    code = "frozen_violation"


class TooSmallError(PaletteKitError):
    """Image smaller than the metric window."""

    code = "too_small"


class CheckpointError(PaletteKitError):
    """Checkpoint file missing, corrupt, or of the wrong version."""

    code = "bad_checkpoint"
