"""Exception hierarchy shared by every stage of the toolkit."""

from __future__ import annotations


class DqsynthError(Exception):
    """Base class for all errors raised by dqsynth."""


class ParseError(DqsynthError):
    """Malformed synthesis-problem text.  Carries a 1-based source position."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class LexError(ParseError):
    pass


class UnknownOperatorError(ParseError):
    pass


class SortError(ParseError):
    pass


class DuplicateDeclarationError(ParseError):
    pass


class UnsupportedFeatureError(ParseError):
    pass


class DimacsError(DqsynthError):
    """Malformed (DQ|Q)DIMACS input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ResourceLimitExceeded(DqsynthError):
    """A conflict budget, expansion bound or wall-clock deadline was hit."""


class PipelineError(DqsynthError):
    """An internal precondition between pipeline stages was violated."""


class ExternalSolverError(DqsynthError):
    """An external solver could not be run or produced unusable output."""
