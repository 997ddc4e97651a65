"""Lexer, parser, printer and resolver for MiniSol."""

from minisol_iv.frontend.lexer import Token, TokenKind, tokenize
from minisol_iv.frontend.parser import parse, parse_source
from minisol_iv.frontend.printer import pretty
from minisol_iv.frontend.resolver import SymbolTable, resolve

__all__ = ["Token", "TokenKind", "tokenize", "parse", "parse_source", "pretty", "SymbolTable", "resolve"]
