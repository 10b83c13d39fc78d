class ExtractorError(Exception):
    """Base class for extraction failures."""


class JobError(ExtractorError):
    """The job description is invalid (template, labels, paths)."""


class MaskLostError(ExtractorError):
    """Some records lost (or duplicated) the mask token after wrapping/truncation."""

    def __init__(self, message: str, indices: list[int]):
        super().__init__(message)
        self.indices = indices
