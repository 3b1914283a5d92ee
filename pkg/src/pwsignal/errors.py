"""Exception types shared across the package."""


class PwsignalError(Exception):
    """Base class for all package-specific errors."""


class EmptyCorpusError(PwsignalError):
    """Raised when a corpus source yields no usable classes."""


class ParseError(PwsignalError):
    """Malformed line in a text input file.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DomainError(PwsignalError):
    """An argument is outside the range an operation supports."""


class UnreachableSignalError(PwsignalError):
    """Conditioning on a signal that is emitted with probability zero."""


class UserExistsError(PwsignalError):
    """Registration attempted for a username that is already taken."""
