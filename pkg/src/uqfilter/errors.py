"""Exception hierarchy shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class ShapeError(ValidationError):
    """Tensor dimensions do not conform."""


class UndefinedMetricError(ValueError):
    """A metric has no defined value for the given inputs (e.g. empty set)."""


class FormatError(ValueError):
    """Base class for file-format parse failures."""


class BadMagicError(FormatError):
    pass


class VersionMismatchError(FormatError):
    pass


class TruncatedPayloadError(FormatError):
    pass


class DimensionMismatchError(FormatError):
    """Payload size disagrees with header arithmetic."""
