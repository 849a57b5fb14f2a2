"""Exception hierarchy.

Every error carries a short machine-readable ``kind`` (the class name) so the
CLI can print a one-line diagnostic and map it onto an exit code.
"""


class BoundKDEError(Exception):
    """Base class for all library errors."""

    exit_code = 3

    @property
    def kind(self):
        return type(self).__name__


class OrderTooLarge(BoundKDEError, ValueError):
    pass


class DimensionMismatch(BoundKDEError, ValueError):
    pass


class InvalidBandwidth(BoundKDEError, ValueError):
    pass


class EmptyFamily(BoundKDEError, ValueError):
    exit_code = 4


class IndexNotInFamily(BoundKDEError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class GridMismatch(BoundKDEError, ValueError):
    pass


class InvalidAmplitude(BoundKDEError, ValueError):
    pass


class BadEnvelope(BoundKDEError, RuntimeError):
    pass


class InsufficientPoints(BoundKDEError, ValueError):
    pass


class ParseError(BoundKDEError, ValueError):
    def __init__(self, line, message="could not parse value"):
        self.line = line
        super().__init__(f"line {line}: {message}")


class OutOfDomain(BoundKDEError, ValueError):
    def __init__(self, line, column, value=None):
        self.line = line
        self.column = column
        self.value = value
        super().__init__(f"line {line}, column {column}: value {value!r} outside [0, 1]")


class ModelFormatError(BoundKDEError, ValueError):
    pass
