class LrconeError(Exception):
    """Base class for every error raised by the toolkit."""


class InvalidArgumentError(LrconeError, ValueError):
    """An argument violates a documented precondition."""


class ResourceLimitError(LrconeError):
    """A configured cap (Hilbert dimension, enumeration size) would be exceeded."""


class NumericFailureError(LrconeError):
    """A numerical routine did not converge or produced an inconsistent result."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
        return f"{base} ({details})"


class ConfigParseError(LrconeError):
    """The run configuration is not well-formed JSON."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ConfigValidationError(LrconeError):
    """The run configuration is well-formed but violates a constraint."""

    def __init__(self, field: str, message: str):
        super().__init__(f"Field '{field}': {message}")
        self.field = field


class OutputError(LrconeError, OSError):
    """A result file could not be written."""
