"""Produce EVSL1 mask-position probability files from labeled text data."""

from .errors import ExtractorError, JobError, MaskLostError
from .extract import ExtractionJob, ExtractionResult, extract, kshot_sample
from .records import read_records, validate_labels

__version__ = "0.1.0"

__all__ = [
    "ExtractionJob",
    "ExtractionResult",
    "ExtractorError",
    "JobError",
    "MaskLostError",
    "extract",
    "kshot_sample",
    "read_records",
    "validate_labels",
]
