"""Exception hierarchy shared by every stage of the analyzer."""

from __future__ import annotations

from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:  # frontend imports this module
    from minisol_iv.frontend.span import Span


class MiniSolError(Exception):
    """Base class for user-facing errors; carries the offending span."""

    kind = "error"

    def __init__(self, message: str, span: Optional[Span] = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self) -> str:
        if self.span is None:
            return f"{self.kind}: {self.message}"
        return f"{self.span.line}:{self.span.column}: {self.kind}: {self.message}"


class LexError(MiniSolError):
    kind = "LexError"


class ParseError(MiniSolError):
    kind = "ParseError"


class ResolveError(MiniSolError):
    kind = "ResolveError"


class TypeCheckError(MiniSolError):
    kind = "TypeError"


class LowerError(MiniSolError):
    kind = "LowerError"


class IterationLimitExceeded(RuntimeError):
    """A CFG node was processed more often than the engine allows.

    This signals an engine bug (missing widening), never bad user input.
    """


class ConfigError(ValueError):
    pass
