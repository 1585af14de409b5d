"""Exception types shared across the package."""


class BlastselError(Exception):
    """Base class for all package-specific errors."""


class DatasetFormatError(BlastselError):
    """Malformed feature CSV: bad header, ragged row, bad id or label token."""


class NonFiniteFeatureError(BlastselError):
    """A feature value is NaN or infinite."""


class InvalidSplitError(BlastselError):
    """Split parameters are out of range or a class is too small to split."""


class EmptyMaskError(BlastselError):
    """A feature mask with no selected features was used where one is required."""


class SingleClassError(BlastselError):
    """An operation that needs both classes received single-class data."""


class EmptyForegroundError(BlastselError):
    """Foreground segmentation produced a mask with no foreground pixels."""


class DimensionTooLargeError(BlastselError):
    """Exhaustive search requested for more features than it can enumerate."""


class DivergenceError(BlastselError):
    """Training produced a non-finite loss."""


class PipelineStageError(BlastselError):
    """A pipeline stage failed; carries the stage name and the original cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"pipeline stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
