"""Shared exception types."""


class GradedModalError(Exception):
    """Base class for all errors raised by this package."""


class SignatureError(GradedModalError, ValueError):
    """An agent or proposition name is unknown, or two signatures differ."""


class ParseError(GradedModalError, ValueError):
    """Input text does not conform to a grammar; carries a position."""

    def __init__(self, message: str, *, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class EvaluationError(GradedModalError, ValueError):
    """A formula cannot be evaluated against the given structure or assignment."""


class ResourceLimitError(GradedModalError, RuntimeError):
    """A guarded operation exceeded its budget.  Distinct from any verdict."""
