"""Exception hierarchy shared by all featknn modules."""

from __future__ import annotations


class FeatknnError(Exception):
    """Base class for every error raised by this package."""


class FormatError(FeatknnError):
    """Input does not match the expected file format or structure.

    ``line`` and ``column`` are set for CSV parse failures (1-based).
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class UnsupportedVersion(FeatknnError):
    """File declares a format version this build cannot read."""


class CorruptFile(FeatknnError):
    """Structurally valid header but inconsistent or truncated content.

    ``offset`` is the byte offset at which the problem was detected.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class WriteError(FeatknnError):
    """Byte sink failed mid-write; ``offset`` counts bytes written so far."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class InvalidData(FeatknnError):
    """Values violate a container invariant (non-finite entries, bad labels, ...)."""


class InsufficientData(FeatknnError):
    """Not enough samples for the requested operation."""


class DegenerateData(FeatknnError):
    """Input carries no usable signal (e.g. zero total variance)."""


class DimensionError(FeatknnError):
    """Vector or matrix dimensions do not agree."""


class ZeroVectorError(FeatknnError):
    """A zero-norm vector was passed where an angle is undefined."""


class ParameterError(FeatknnError):
    """A parameter value is outside its documented range."""


class VocabularyError(FeatknnError):
    """Two feature sets disagree on the class vocabulary."""
