"""Diagnostics for the synrec pipeline.

Every user-facing error carries a source span; internal invariant
violations raise :class:`InternalError` instead, which signals a bug in a
pass rather than a problem with the input program.
"""

from __future__ import annotations

from .ast import Span, NO_SPAN


class SynrecError(Exception):
    """Base class for user-attributable errors."""

    def __init__(self, message: str, span: Span = NO_SPAN):
        self.message = message
        self.span = span
        super().__init__(self.render())

    def render(self) -> str:
        if self.span is not NO_SPAN and self.span.line:
            return f"{self.span}: {self.message}"
        return self.message


class ParseError(SynrecError):
    pass


class ResolveError(SynrecError):
    pass


class TypeCheckError(SynrecError):
    pass


class UnifyError(SynrecError):
    pass


class ExpandError(SynrecError):
    pass


class PrintError(SynrecError):
    pass


class InternalError(Exception):
    """An invariant of a pass was violated; not a user error."""
