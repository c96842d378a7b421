"""Exception hierarchy.

Everything raised on purpose by this package derives from :class:`RSAError`.
:class:`DataError` covers invalid or inconsistent data, :class:`FormatError`
covers malformed files, and :class:`IoFailure` wraps operating-system errors.
"""


class RSAError(Exception):
    """Base class for all package errors."""


class DataError(RSAError, ValueError):
    """Input data violates a documented invariant."""


class ValidationError(DataError):
    """A domain object could not be constructed from the given values."""


class LengthMismatch(DataError):
    pass


class DegenerateVector(DataError):
    """A vector has (numerically) zero variance.

    ``condition`` names the offending condition when the vector is an RDM
    input row.
    """

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ConditionMismatch(DataError):
    pass


class TaskMismatch(DataError):
    pass


class InvalidSimilarity(DataError):
    pass


class InvalidK(DataError):
    pass


class FormatError(DataError):
    """Malformed file content. ``where`` is a byte offset or row number."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class BadMagic(FormatError):
    pass


class VersionUnsupported(FormatError):
    pass


class TruncatedPayload(FormatError):
    pass


class TrailingData(FormatError):
    pass


class BadEncoding(FormatError):
    pass


class NonFinite(FormatError):
    pass


class DuplicateConditionId(FormatError):
    pass


class MalformedFile(FormatError):
    pass


class MissingOrientation(FormatError):
    pass


class DuplicateSource(FormatError):
    pass


class NonFiniteScore(FormatError):
    pass


class EmptyTable(FormatError):
    pass


class AsymmetricBeyondTolerance(FormatError):
    pass


class BadDiagonal(FormatError):
    pass


class IoFailure(RSAError, OSError):
    pass
