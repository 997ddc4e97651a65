from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    """Half-open byte range ``[start, end)`` plus 1-based line/column of both ends."""

    start: int
    end: int
    line: int
    column: int
    end_line: int
    end_column: int

    def cover(self, other: "Span") -> "Span":
        first = self if self.start <= other.start else other
        end = self if self.end >= other.end else other
        return Span(first.start, end.end, first.line, first.column, end.end_line, end.end_column)


NO_SPAN = Span(0, 0, 1, 1, 1, 1)
