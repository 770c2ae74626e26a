"""Exception hierarchy shared by all engine modules."""
from __future__ import annotations


class EngineError(Exception):
    """Base class; carries an optional source position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class LexError(EngineError):
    pass


class ParseError(EngineError):
    pass


class TemplateError(EngineError):
    pass


class GrammarError(EngineError):
    """Ill-formed definition: bad partition, cycle, reserved name, kind clash."""


class FormTooLarge(EngineError):
    """Normalization aborted: the normal form exceeded the literal budget."""


class ExpansionBounded(EngineError):
    """Expansion hit a resource bound (path length or depth) before completion.

    Distinct from unsatisfiability: completeness was abandoned, not refuted.
    """
