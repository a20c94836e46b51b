"""Typed errors raised across the package."""


class BlendshotError(Exception):
    """Base class for all package errors."""


class ShapeError(BlendshotError):
    """Operand dimensions do not agree."""


class InvalidInputError(BlendshotError):
    """Input values violate a precondition (NaN/Inf, out of range)."""


class InvalidLabelError(BlendshotError):
    """A class index falls outside [0, K)."""


class EmptyInputError(BlendshotError):
    """An operation received an empty batch or matrix."""


class DegenerateEmbeddingError(BlendshotError):
    """An embedding row has zero norm and cannot be normalized."""


class MissingClassError(BlendshotError):
    """A class has no items available for sampling."""


class CannotAdaptError(BlendshotError):
    """Pseudolabel adaptation has no usable pseudolabels."""


class FormatError(BlendshotError):
    """Base class for binary file format errors."""


class BadMagicError(FormatError):
    """File does not start with the expected magic bytes."""


class VersionMismatchError(FormatError):
    """File declares an unsupported format version."""


class TruncatedFileError(FormatError):
    """File payload is shorter than its header promises."""


class UnknownDtypeError(FormatError):
    """File declares a dtype code this reader does not know."""


class ManifestError(BlendshotError):
    """Dataset manifest is missing keys or internally inconsistent."""
