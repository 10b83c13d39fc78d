"""Exception hierarchy.

The CLI maps every ``EvoverbError`` to exit code 2 (validation/config) and
plain ``OSError`` to exit code 1 (I/O), so library code should raise one of
these for anything a caller could have gotten wrong.
"""


class EvoverbError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(EvoverbError):
    """Invalid hyperparameter or size request (e.g. more candidates than vocabulary)."""


class DataError(EvoverbError):
    """A dataset, candidate set, or verbalizer violates an invariant."""


class ShapeError(DataError):
    """Operands have incompatible dimensions."""


class RowSumError(DataError):
    """A probability row does not sum to 1 within tolerance."""


class FormatError(EvoverbError):
    """A file could not be decoded."""


class BadMagicError(FormatError):
    """The file does not start with the expected magic bytes."""


class TruncatedError(FormatError):
    """The file ended before the declared payload was complete."""


class HeaderError(FormatError):
    """The file header is malformed or internally inconsistent."""


class PayloadTooLargeError(FormatError):
    """The declared payload exceeds the configured size cap."""
