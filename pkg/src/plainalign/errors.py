"""Exception types shared across the toolkit."""

from __future__ import annotations


class PlainalignError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(PlainalignError):
    """Input data violates a documented invariant."""


class FormatError(ValidationError):
    """A corpus file is malformed.

    Carries the file path, the 1-based line number, and the offending
    field so callers can point at the exact spot.
    """

    def __init__(
        self,
        message: str,
        *,
        path: object = None,
        line_no: int | None = None,
        field: str | None = None,
    ) -> None:
        context = []
        if path is not None:
            context.append(str(path))
        if line_no is not None:
            context.append(f"line {line_no}")
        if field is not None:
            context.append(f"field {field!r}")
        if context:
            message = f"{message} ({', '.join(context)})"
        super().__init__(message)
        self.path = path
        self.line_no = line_no
        self.field = field


class ConfigurationError(PlainalignError):
    """A configuration value is unusable (bad threshold, dimension mismatch, ...)."""


class ExtractionError(PlainalignError):
    """HTML content extraction failed for a page."""


class TransportError(PlainalignError):
    """A page could not be fetched."""


class UsageError(PlainalignError):
    """Bad command line invocation."""
