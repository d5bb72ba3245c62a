"""Exception hierarchy for the ragged-array engine.

Everything raised on purpose derives from RaggedError so callers (and the
CLI) can catch one type. Where a builtin category fits, the subclass also
inherits it (IndexError, TypeError, ValueError) so idiomatic handlers keep
working.
"""

__all__ = [
    "RaggedError",
    "LayoutError",
    "ValidationError",
    "RangeError",
    "UnknownFieldError",
    "TypeMismatchError",
    "BuilderStateError",
    "FormError",
    "PackageFormatError",
    "MissingBufferError",
    "CountError",
    "StateError",
    "RowError",
]


class RaggedError(Exception):
    """Base class for all errors raised by this package."""


class LayoutError(RaggedError):
    """A layout node was constructed with arguments that can never be valid."""


class ValidationError(RaggedError):
    """A layout failed structural validation.

    Carries the full report; the message lists every violation.
    """

    def __init__(self, report):
        self.report = report
        lines = [f"{v.form_key}: {v.message}" for v in report.violations]
        super().__init__("layout validation failed: " + "; ".join(lines))


class RangeError(RaggedError, IndexError):
    """An index, entry number, or integral value is out of range."""


class UnknownFieldError(RaggedError, KeyError):
    """A record field or column name does not exist."""

    def __str__(self) -> str:
        # KeyError repr()s its argument; keep the plain message.
        return self.args[0] if self.args else ""


class TypeMismatchError(RaggedError, TypeError):
    """A value or layout has the wrong structural type for an operation."""


class BuilderStateError(RaggedError):
    """A builder operation was called in an illegal state (mid-list, ragged record)."""


class StateError(RaggedError):
    """A stateful handle (e.g. a column reader) was used before positioning."""


class FormError(RaggedError):
    """Form JSON could not be parsed or names an unsupported node class."""


class PackageFormatError(RaggedError):
    """An on-disk or in-memory package violates the interchange format."""


class MissingBufferError(PackageFormatError):
    """A form references a buffer name that the package does not provide."""


class CountError(RaggedError, ValueError):
    """A counts sequence is negative or does not sum to the content length."""


class RowError(RaggedError):
    """A user-supplied row callable failed; carries the row index as context."""

    def __init__(self, message: str, row: int):
        super().__init__(message)
        self.row = row
