"""Exception types raised across the package."""


class CxError(Exception):
    """Base class for all errors raised by cxproj."""


class EmptySupport(CxError, ValueError):
    pass


class DimensionMismatch(CxError, ValueError):
    pass


class NonFiniteCoordinate(CxError, ValueError):
    pass


class NonPositiveScale(CxError, ValueError):
    pass


class LengthMismatch(CxError, ValueError):
    pass


class WrongDimension(CxError, ValueError):
    pass


class NotMonotone(CxError, ValueError):
    pass


class ParseError(CxError, ValueError):
    """Malformed measure or config file.

    ``line`` and ``field`` locate the problem when known.
    """

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class SchemaVersionUnsupported(CxError, ValueError):
    pass


class SizeLimitExceeded(CxError, ValueError):
    pass


class ZeroRowMass(CxError, ValueError):
    pass


class TimeNotGreaterThanOne(CxError, ValueError):
    pass


class MaxItersExceeded(CxError, RuntimeError):
    pass


class TooLarge(CxError, ValueError):
    pass


class CheckUnavailableForDim(CxError, ValueError):
    pass


class ConfigError(CxError, ValueError):
    pass
