"""
Domain errors raised across the npga package.

Value-type errors also derive from ValueError so callers that only catch
built-ins keep working.
"""

from typing import Optional


class NpgaError(Exception):
    """Base class for every error raised by npga."""


class InvalidInputError(NpgaError, ValueError):
    """Non-finite, empty or otherwise unusable numeric input."""


class InvalidSpecError(NpgaError, ValueError):
    """A kernel, corruption or guidance spec violates its invariants."""


class ShapeError(NpgaError, ValueError):
    """Array dimensions do not agree."""


class InvalidLabelError(NpgaError, ValueError):
    """Label rows are malformed (e.g. not one-hot, index out of range)."""


class LayoutError(NpgaError, ValueError):
    """A flat parameter vector does not match its recorded layout."""


class FormatError(NpgaError, ValueError):
    """A binary or checkpoint file does not follow the expected format."""


class ConditioningError(NpgaError, ArithmeticError):
    """Cholesky factorization failed even after the jitter retry."""

    def __init__(self, message: str, jitter: float):
        super().__init__(f"{message} (attempted jitter={jitter:.3e})")
        self.jitter = jitter


class ParseError(NpgaError, ValueError):
    """A text data file could not be parsed."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        where = ""
        if path is not None:
            where = f"{path}"
        if line is not None:
            where = f"{where}:{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line


class ConfigError(NpgaError, ValueError):
    """An experiment config file is invalid; `field` names the dotted key."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
