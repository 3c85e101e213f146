"""Shared exception types."""


class ParseError(ValueError):
    """Malformed text input. Carries the offending source name and line number."""

    def __init__(self, message, source="<input>", line=None):
        self.source = source
        self.line = line
        where = source if line is None else f"{source}:{line}"
        super().__init__(f"{where}: {message}")


class ValidationError(ValueError):
    """Well-formed input that violates a data invariant."""

    def __init__(self, message, source=None, line=None):
        self.source = source
        self.line = line
        if source is not None:
            where = source if line is None else f"{source}:{line}"
            message = f"{where}: {message}"
        super().__init__(message)


class CapacityError(RuntimeError):
    """Input exceeds the size budget of an intentionally naive algorithm."""


class DatasetMissingError(FileNotFoundError):
    """An external benchmark corpus is not present on disk."""
