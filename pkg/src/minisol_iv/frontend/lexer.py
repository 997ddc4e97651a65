"""Hand-written scanner for MiniSol source text."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import List

from minisol_iv.errors import LexError
from minisol_iv.frontend.span import Span


class TokenKind(enum.Enum):
    KEYWORD = "keyword"
    IDENTIFIER = "identifier"
    INTEGER = "integer-literal"
    STRING = "string-literal"
    PUNCT = "punctuation"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    span: Span

    @property
    def value(self) -> int:
        """Numeric value of an integer literal."""
        text = self.lexeme.replace("_", "")
        if text[:2] in ("0x", "0X"):
            return int(text[2:], 16)
        return int(text, 10)

    def is_(self, kind: TokenKind, lexeme: str) -> bool:
        return self.kind is kind and self.lexeme == lexeme

    def __repr__(self) -> str:
        return f"{self.kind.value}({self.lexeme})"


KEYWORDS = frozenset(
    """
    contract enum struct mapping function modifier constructor returns return
    if else for while do break continue require assert revert true false
    public private internal external pure view payable memory storage calldata
    import is library interface abstract event emit immutable constant using
    new delete virtual override unchecked try catch fallback receive
    bool address string bytes
    """.split()
)

_INT_TYPE = re.compile(r"u?int(\d+)?\Z")

# Longest first so that `+=` wins over `+`.
PUNCTUATION = (
    "=>", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=",
    "{", "}", "(", ")", "[", "]", ";", ",", ".", "=", "<", ">", "+", "-", "*", "/",
    "%", "!", "?", ":",
)

_WORD = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_HEX = re.compile(r"0[xX][0-9A-Fa-f](?:_?[0-9A-Fa-f])*")
_DEC = re.compile(r"[0-9](?:_?[0-9])*")
_STRING_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", '"': '"', "'": "'", "0": "\0"}


def is_keyword(word: str) -> bool:
    return word in KEYWORDS or _INT_TYPE.match(word) is not None


class _Scanner:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: List[Token] = []

    def _advance_to(self, new_pos: int) -> None:
        chunk = self.src[self.pos:new_pos]
        newlines = chunk.count("\n")
        if newlines:
            self.line += newlines
            self.col = len(chunk) - chunk.rfind("\n")
        else:
            self.col += len(chunk)
        self.pos = new_pos

    def _span_to(self, end: int) -> Span:
        start, line, col = self.pos, self.line, self.col
        self._advance_to(end)
        return Span(start, end, line, col, self.line, self.col)

    def _error(self, message: str, length: int = 1) -> LexError:
        end = min(self.pos + length, len(self.src))
        return LexError(message, Span(self.pos, end, self.line, self.col, self.line, self.col + (end - self.pos)))

    def _skip_trivia(self) -> None:
        src = self.src
        while self.pos < len(src):
            ch = src[self.pos]
            if ch in " \t\r\n\f﻿":
                self._advance_to(self.pos + 1)
            elif src.startswith("//", self.pos):
                nl = src.find("\n", self.pos)
                self._advance_to(len(src) if nl < 0 else nl)
            elif src.startswith("/*", self.pos):
                close = src.find("*/", self.pos + 2)
                if close < 0:
                    raise self._error("unterminated block comment", 2)
                self._advance_to(close + 2)
            else:
                return

    def _string(self, quote: str) -> None:
        i = self.pos + 1
        out = []
        src = self.src
        while True:
            if i >= len(src) or src[i] == "\n":
                raise self._error("unterminated string literal", i - self.pos)
            ch = src[i]
            if ch == quote:
                break
            if ch == "\\":
                if i + 1 >= len(src):
                    raise self._error("unterminated string literal", i - self.pos)
                esc = src[i + 1]
                if esc in _STRING_ESCAPES:
                    out.append(_STRING_ESCAPES[esc])
                    i += 2
                    continue
                if esc == "x" and re.fullmatch(r"[0-9A-Fa-f]{2}", src[i + 2:i + 4]):
                    out.append(chr(int(src[i + 2:i + 4], 16)))
                    i += 4
                    continue
                if esc == "u" and re.fullmatch(r"[0-9A-Fa-f]{4}", src[i + 2:i + 6]):
                    out.append(chr(int(src[i + 2:i + 6], 16)))
                    i += 6
                    continue
                raise self._error(f"invalid escape sequence '\\{esc}'", i + 2 - self.pos)
            out.append(ch)
            i += 1
        # The lexeme keeps the decoded contents; the printer re-quotes it.
        self.tokens.append(Token(TokenKind.STRING, "".join(out), self._span_to(i + 1)))

    def _pragma(self) -> None:
        semi = self.src.find(";", self.pos)
        if semi < 0:
            raise self._error("unterminated pragma directive", 6)
        self._advance_to(semi + 1)

    def run(self) -> List[Token]:
        src = self.src
        while True:
            self._skip_trivia()
            if self.pos >= len(src):
                break
            ch = src[self.pos]
            m = _WORD.match(src, self.pos)
            if m:
                word = m.group()
                if word == "pragma":
                    self._pragma()
                    continue
                kind = TokenKind.KEYWORD if is_keyword(word) else TokenKind.IDENTIFIER
                self.tokens.append(Token(kind, word, self._span_to(m.end())))
                continue
            if ch.isdigit():
                m = _HEX.match(src, self.pos) or _DEC.match(src, self.pos)
                end = m.end()
                if end < len(src) and (src[end].isalnum() or src[end] in "_$."):
                    raise self._error("malformed number literal", end + 1 - self.pos)
                self.tokens.append(Token(TokenKind.INTEGER, m.group(), self._span_to(end)))
                continue
            if ch in "\"'":
                self._string(ch)
                continue
            for p in PUNCTUATION:
                if src.startswith(p, self.pos):
                    self.tokens.append(Token(TokenKind.PUNCT, p, self._span_to(self.pos + len(p))))
                    break
            else:
                raise self._error(f"unexpected character {ch!r}")
        self.tokens.append(Token(TokenKind.EOF, "", Span(self.pos, self.pos, self.line, self.col, self.line, self.col)))
        return self.tokens


def tokenize(source: str) -> List[Token]:
    """Split `source` into tokens, dropping whitespace, comments and pragmas.

    The returned list always ends with a single EOF token.
    """
    return _Scanner(source).run()
