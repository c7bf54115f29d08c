"""Exception types raised by the toolkit."""

from typing import Optional


class MdcsError(ValueError):
    """Base class of every error raised on invalid input."""


class DomainError(MdcsError):
    """A physical quantity is outside its valid domain."""


class GridError(MdcsError):
    """A sampling grid is not uniform, too small or does not match its data."""


class SpectrumError(MdcsError):
    """A slice or anchor lies outside the spectrum coverage."""


class FitError(MdcsError):
    """A fit cannot be started with the supplied data or initial values."""


class FormatError(MdcsError):
    """A file could not be parsed."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.message = message
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:"
            if line is not None:
                location += f"{line}:"
            location += " "
        elif line is not None:
            location = f"line {line}: "
        super().__init__(f"{location}{message}")
