"""Recursive-descent parser producing the AST in :mod:`minisol_iv.frontend.ast`.

Fails fast: the first syntax error raises :class:`ParseError`.
"""

from __future__ import annotations

from typing import Callable, List, Optional, Sequence, TypeVar

from minisol_iv.errors import ParseError
from minisol_iv.frontend import ast
from minisol_iv.frontend.lexer import Token, TokenKind, tokenize
from minisol_iv.frontend.span import Span
from minisol_iv.frontend.types import elementary

N = TypeVar("N", bound=ast.Node)

VISIBILITY = ("public", "private", "internal", "external")
MUTABILITY = ("pure", "view", "payable")
LOCATIONS = ("memory", "storage", "calldata")
ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=")
BUILTIN_CALL_MEMBERS = ("transfer", "send", "call")

# Keywords that name real Solidity features outside the MiniSol subset.
UNSUPPORTED = {
    "import": "import directives",
    "library": "libraries",
    "interface": "interfaces",
    "abstract": "abstract contracts",
    "is": "inheritance",
    "event": "events",
    "emit": "events",
    "using": "using-for directives",
    "immutable": "immutable variables",
    "constant": "constant variables",
    "fallback": "fallback functions",
    "receive": "receive functions",
    "virtual": "virtual functions",
    "override": "overriding",
    "new": "contract creation",
    "delete": "delete",
    "do": "do-while loops",
    "break": "break",
    "continue": "continue",
    "unchecked": "unchecked blocks",
    "try": "try/catch",
    "catch": "try/catch",
    "string": "string variables",
    "bytes": "bytes variables",
}


def _is_elementary(tok: Token) -> bool:
    return tok.kind is TokenKind.KEYWORD and (
        tok.lexeme in ("bool", "address") or tok.lexeme.startswith(("uint", "int"))
    )


class Parser:
    def __init__(self, tokens: Sequence[Token]):
        if not tokens or tokens[-1].kind is not TokenKind.EOF:
            raise ValueError("token stream must end with EOF")
        self.toks = tokens
        self.i = 0
        self.in_modifier = False

    # -- token plumbing -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    @property
    def prev(self) -> Token:
        return self.toks[self.i - 1]

    def at(self, lexeme: str) -> bool:
        return self.tok.kind in (TokenKind.PUNCT, TokenKind.KEYWORD) and self.tok.lexeme == lexeme

    def accept(self, lexeme: str) -> bool:
        if self.at(lexeme):
            self.i += 1
            return True
        return False

    def _found(self) -> str:
        t = self.tok
        return "end of input" if t.kind is TokenKind.EOF else f"{t.kind.value} '{t.lexeme}'"

    def error(self, expected: str) -> ParseError:
        return ParseError(f"expected {expected}, found {self._found()}", self.tok.span)

    def unsupported(self, what: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(f"unsupported construct: {what}", tok.span)

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            if self.tok.lexeme in UNSUPPORTED and self.tok.kind is TokenKind.KEYWORD:
                raise self.unsupported(UNSUPPORTED[self.tok.lexeme])
            raise self.error(f"'{lexeme}'")
        self.i += 1
        return self.prev

    def ident(self) -> str:
        if self.tok.kind is not TokenKind.IDENTIFIER:
            if self.tok.kind is TokenKind.KEYWORD and self.tok.lexeme in UNSUPPORTED:
                raise self.unsupported(UNSUPPORTED[self.tok.lexeme])
            raise self.error("identifier")
        self.i += 1
        return self.prev.lexeme

    def finish(self, node: N, start: Token) -> N:
        end = self.prev
        node.span = Span(start.span.start, end.span.end, start.span.line, start.span.column,
                         end.span.end_line, end.span.end_column)
        return node

    def comma_list(self, item: Callable[[], N], close: str) -> List[N]:
        items: List[N] = []
        if self.accept(close):
            return items
        while True:
            items.append(item())
            if self.accept(close):
                return items
            self.expect(",")

    # -- top level --------------------------------------------------------------

    def source_unit(self) -> ast.SourceUnit:
        start = self.tok
        contracts = []
        while self.tok.kind is not TokenKind.EOF:
            if self.tok.lexeme in ("enum", "struct", "function"):
                raise self.unsupported("file-level declarations")
            contracts.append(self.contract())
        unit = ast.SourceUnit(contracts)
        if contracts:
            self.finish(unit, start)
        return unit

    def contract(self) -> ast.ContractDef:
        start = self.tok
        if self.tok.lexeme in UNSUPPORTED and self.tok.kind is TokenKind.KEYWORD:
            raise self.unsupported(UNSUPPORTED[self.tok.lexeme])
        self.expect("contract")
        c = ast.ContractDef(self.ident())
        if self.at("is"):
            raise self.unsupported("inheritance")
        self.expect("{")
        while not self.accept("}"):
            if self.tok.kind is TokenKind.EOF:
                raise self.error("'}'")
            self.member(c)
        self.finish(c, start)
        _check_calls(c)
        return c

    def member(self, c: ast.ContractDef) -> None:
        t = self.tok
        if t.kind is TokenKind.KEYWORD and t.lexeme in UNSUPPORTED and t.lexeme not in ("string", "bytes"):
            raise self.unsupported(UNSUPPORTED[t.lexeme])
        if self.at("enum"):
            c.enums.append(self.enum_def())
        elif self.at("struct"):
            c.structs.append(self.struct_def())
        elif self.at("modifier"):
            c.modifiers.append(self.modifier_def())
        elif self.at("function") or self.at("constructor"):
            c.functions.append(self.function_def())
        else:
            c.state_vars.append(self.state_var())

    def enum_def(self) -> ast.EnumDef:
        start = self.expect("enum")
        name = self.ident()
        self.expect("{")
        if self.at("}"):
            raise ParseError("enum must declare at least one variant", self.tok.span)
        variants = self.comma_list(self.ident, "}")
        return self.finish(ast.EnumDef(name, variants), start)

    def struct_def(self) -> ast.StructDef:
        start = self.expect("struct")
        name = self.ident()
        self.expect("{")
        members = []
        while not self.accept("}"):
            fstart = self.tok
            ty = self.type_name()
            fname = self.ident()
            self.expect(";")
            members.append(self.finish(ast.Param(ty, None, fname), fstart))
        return self.finish(ast.StructDef(name, members), start)

    def state_var(self) -> ast.StateVar:
        start = self.tok
        ty = self.type_name()
        visibility = None
        while self.tok.kind is TokenKind.KEYWORD:
            if self.tok.lexeme in VISIBILITY and visibility is None:
                visibility = self.tok.lexeme
                self.i += 1
            elif self.tok.lexeme in UNSUPPORTED:
                raise self.unsupported(UNSUPPORTED[self.tok.lexeme])
            else:
                break
        name = self.ident()
        init = self.expression() if self.accept("=") else None
        self.expect(";")
        return self.finish(ast.StateVar(ty, visibility, name, init), start)

    def param(self) -> ast.Param:
        start = self.tok
        ty = self.type_name()
        location = None
        if self.tok.lexeme in LOCATIONS and self.tok.kind is TokenKind.KEYWORD:
            location = self.tok.lexeme
            self.i += 1
        name = self.ident() if self.tok.kind is TokenKind.IDENTIFIER else None
        return self.finish(ast.Param(ty, location, name), start)

    def params(self) -> List[ast.Param]:
        self.expect("(")
        return self.comma_list(self.param, ")")

    def modifier_def(self) -> ast.ModifierDef:
        start = self.expect("modifier")
        name = self.ident()
        params = self.params() if self.at("(") else []
        self.in_modifier = True
        try:
            body = self.block()
        finally:
            self.in_modifier = False
        return self.finish(ast.ModifierDef(name, params, body), start)

    def function_def(self) -> ast.FunctionDef:
        start = self.tok
        is_ctor = self.accept("constructor")
        if not is_ctor:
            self.expect("function")
            if self.tok.lexeme in ("fallback", "receive"):
                raise self.unsupported(UNSUPPORTED[self.tok.lexeme])
            name = self.ident()
        else:
            name = "constructor"
        params = self.params()
        visibility = mutability = None
        modifiers: List[ast.ModifierRef] = []
        returns: List[ast.Param] = []
        while True:
            t = self.tok
            if t.kind is TokenKind.KEYWORD and t.lexeme in VISIBILITY:
                if visibility is not None:
                    raise ParseError("duplicate visibility specifier", t.span)
                visibility = t.lexeme
                self.i += 1
            elif t.kind is TokenKind.KEYWORD and t.lexeme in MUTABILITY:
                if mutability is not None:
                    raise ParseError("duplicate mutability specifier", t.span)
                mutability = t.lexeme
                self.i += 1
            elif t.kind is TokenKind.KEYWORD and t.lexeme in UNSUPPORTED:
                raise self.unsupported(UNSUPPORTED[t.lexeme])
            elif t.kind is TokenKind.IDENTIFIER:
                self.i += 1
                args = self.args() if self.at("(") else []
                modifiers.append(self.finish(ast.ModifierRef(t.lexeme, args), t))
            elif self.accept("returns"):
                returns = self.params()
            else:
                break
        if self.at(";"):
            raise self.unsupported("functions without a body")
        body = self.block()
        fn = ast.FunctionDef(name, params, returns, visibility, mutability, modifiers, body, is_ctor)
        return self.finish(fn, start)

    # -- types ------------------------------------------------------------------

    def type_name(self) -> ast.TypeName:
        start = self.tok
        base: ast.TypeName
        if _is_elementary(start):
            if elementary(start.lexeme) is None:
                raise ParseError(f"unsupported construct: integer type '{start.lexeme}' "
                                 "(widths 8, 16, 32, 64, 128, 256 only)", start.span)
            self.i += 1
            payable = start.lexeme == "address" and self.accept("payable")
            base = self.finish(ast.ElementaryTypeName(start.lexeme, payable), start)
        elif self.accept("mapping"):
            self.expect("(")
            key = self.type_name()
            self.expect("=>")
            value = self.type_name()
            self.expect(")")
            base = self.finish(ast.MappingTypeName(key, value), start)
        elif start.kind is TokenKind.IDENTIFIER:
            self.i += 1
            base = self.finish(ast.UserTypeName(start.lexeme), start)
        elif start.kind is TokenKind.KEYWORD and start.lexeme in UNSUPPORTED:
            raise self.unsupported(UNSUPPORTED[start.lexeme])
        else:
            raise self.error("type name")
        while self.at("[") and (self.peek().lexeme == "]" or self.peek().kind is TokenKind.INTEGER
                                and self.peek(2).lexeme == "]"):
            self.i += 1
            length = None
            if self.tok.kind is TokenKind.INTEGER:
                length = self.tok.value
                self.i += 1
            self.expect("]")
            base = self.finish(ast.ArrayTypeName(base, length), start)
        return base

    # -- statements ---------------------------------------------------------------

    def block(self) -> ast.Block:
        start = self.expect("{")
        stmts = []
        while not self.accept("}"):
            if self.tok.kind is TokenKind.EOF:
                raise self.error("'}'")
            stmts.append(self.statement())
        return self.finish(ast.Block(stmts), start)

    def statement(self) -> ast.Stmt:
        t = self.tok
        if self.at("{"):
            return self.block()
        if self.accept("if"):
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.statement()
            else_ = self.statement() if self.accept("else") else None
            return self.finish(ast.If(cond, then, else_), t)
        if self.accept("while"):
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            return self.finish(ast.While(cond, self.statement()), t)
        if self.accept("for"):
            return self.for_rest(t)
        if self.accept("return"):
            value = None if self.at(";") else self.expression()
            self.expect(";")
            return self.finish(ast.Return(value), t)
        if self.accept("require"):
            self.expect("(")
            cond = self.expression()
            msg = self.expression() if self.accept(",") else None
            self.expect(")")
            self.expect(";")
            return self.finish(ast.Require(cond, msg), t)
        if self.accept("assert"):
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            self.expect(";")
            return self.finish(ast.Assert(cond), t)
        if self.accept("revert"):
            self.expect("(")
            msg = None if self.at(")") else self.expression()
            self.expect(")")
            self.expect(";")
            return self.finish(ast.Revert(msg), t)
        if t.kind is TokenKind.IDENTIFIER and t.lexeme == "_" and self.peek().lexeme == ";":
            if not self.in_modifier:
                raise ParseError("placeholder '_' outside a modifier", t.span)
            self.i += 2
            return self.finish(ast.Placeholder(), t)
        if t.kind is TokenKind.KEYWORD and t.lexeme in UNSUPPORTED and t.lexeme not in ("string", "bytes"):
            raise self.unsupported(UNSUPPORTED[t.lexeme])
        stmt = self.simple_statement()
        self.expect(";")
        return self.finish(stmt, t)

    def for_rest(self, start: Token) -> ast.For:
        self.expect("(")
        init = None if self.at(";") else self.simple_statement()
        self.expect(";")
        cond = None if self.at(";") else self.expression()
        self.expect(";")
        step = None if self.at(")") else self.simple_statement()
        self.expect(")")
        body = self.statement()
        return self.finish(ast.For(init, cond, step, body), start)

    def _looks_like_decl(self) -> bool:
        t = self.tok
        if t.lexeme == "mapping" and t.kind is TokenKind.KEYWORD:
            return True
        if _is_elementary(t):
            return self.peek().lexeme != "("
        if t.kind is TokenKind.KEYWORD and t.lexeme in ("string", "bytes"):
            return True
        if t.kind is not TokenKind.IDENTIFIER:
            return False
        saved = self.i
        try:
            self.type_name()
        except ParseError:
            return False
        else:
            nxt = self.tok
            return nxt.kind is TokenKind.IDENTIFIER or (
                nxt.kind is TokenKind.KEYWORD and nxt.lexeme in LOCATIONS)
        finally:
            self.i = saved

    def local_decl(self) -> ast.LocalDecl:
        start = self.tok
        ty = self.type_name()
        location = None
        if self.tok.kind is TokenKind.KEYWORD and self.tok.lexeme in LOCATIONS:
            location = self.tok.lexeme
            self.i += 1
        return self.finish(ast.LocalDecl(ty, location, self.ident()), start)

    def _tuple_slot(self) -> Optional[ast.LocalDecl]:
        if self.at(",") or self.at(")"):
            return None
        return self.local_decl()

    def simple_statement(self) -> ast.Stmt:
        """Declaration or expression statement without the trailing ';'."""
        t = self.tok
        if self.at("(") and self._tuple_decl_ahead():
            self.i += 1
            slots = [self._tuple_slot()]
            while self.accept(","):
                slots.append(self._tuple_slot())
            self.expect(")")
            self.expect("=")
            return self.finish(ast.TupleDecl(slots, self.expression()), t)
        if self._looks_like_decl():
            decl = self.local_decl()
            init = self.expression() if self.accept("=") else None
            return self.finish(ast.VarDecl(decl, init), t)
        if self.at("++") or self.at("--"):
            op = self.tok.lexeme
            self.i += 1
            target = self.unary()
            return self.finish(ast.IncDec(target, op, prefix=True), t)
        expr = self.expression()
        if self.tok.kind is TokenKind.PUNCT and self.tok.lexeme in ASSIGN_OPS:
            op = self.tok.lexeme
            self.i += 1
            return self.finish(ast.Assign(expr, op, self.expression()), t)
        if self.at("++") or self.at("--"):
            op = self.tok.lexeme
            self.i += 1
            return self.finish(ast.IncDec(expr, op), t)
        return self.finish(ast.ExprStmt(expr), t)

    def _tuple_decl_ahead(self) -> bool:
        saved = self.i
        self.i += 1
        try:
            while self.at(","):
                self.i += 1
            return self._looks_like_decl()
        finally:
            self.i = saved

    # -- expressions --------------------------------------------------------------

    def expression(self) -> ast.Expr:
        expr = self.binary(0)
        if self.at("?"):
            raise self.unsupported("conditional expressions")
        return expr

    _LEVELS = (("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-"), ("*", "/", "%"))

    def binary(self, level: int) -> ast.Expr:
        if level == len(self._LEVELS):
            return self.unary()
        start = self.tok
        left = self.binary(level + 1)
        ops = self._LEVELS[level]
        while self.tok.kind is TokenKind.PUNCT and self.tok.lexeme in ops:
            op = self.tok.lexeme
            self.i += 1
            right = self.binary(level + 1)
            left = self.finish(ast.Binary(op, left, right), start)
        return left

    def unary(self) -> ast.Expr:
        start = self.tok
        if self.at("!") or self.at("-"):
            op = self.tok.lexeme
            self.i += 1
            return self.finish(ast.Unary(op, self.unary()), start)
        if self.at("++") or self.at("--"):
            raise self.unsupported("increment/decrement inside expressions")
        return self.postfix()

    def args(self) -> List[ast.Expr]:
        self.expect("(")
        return self.comma_list(self.expression, ")")

    def call_option(self) -> ast.CallOption:
        start = self.tok
        name = self.ident()
        self.expect(":")
        return self.finish(ast.CallOption(name, self.expression()), start)

    def postfix(self) -> ast.Expr:
        start = self.tok
        expr = self.primary()
        while True:
            if self.accept("."):
                expr = self.finish(ast.Member(expr, self.ident()), start)
            elif self.accept("["):
                index = self.expression()
                self.expect("]")
                expr = self.finish(ast.IndexExpr(expr, index), start)
            elif self.at("("):
                expr = self.finish(ast.Call(expr, self.args()), start)
            elif (self.at("{") and self.peek().kind is TokenKind.IDENTIFIER
                  and self.peek(2).lexeme == ":"):
                self.i += 1
                options = self.comma_list(self.call_option, "}")
                expr = self.finish(ast.Call(expr, self.args(), options), start)
            else:
                return expr

    def primary(self) -> ast.Expr:
        t = self.tok
        if t.kind is TokenKind.INTEGER:
            self.i += 1
            return self.finish(ast.IntLit(t.value), t)
        if t.kind is TokenKind.STRING:
            self.i += 1
            return self.finish(ast.StrLit(t.lexeme), t)
        if t.kind is TokenKind.IDENTIFIER:
            self.i += 1
            return self.finish(ast.Ident(t.lexeme), t)
        if self.accept("true") or self.accept("false"):
            return self.finish(ast.BoolLit(t.lexeme == "true"), t)
        if self.accept("("):
            inner = self.expression()
            if self.at(","):
                raise self.unsupported("tuple expressions")
            self.expect(")")
            return inner
        if self.accept("["):
            elements = self.comma_list(self.expression, "]")
            if not elements:
                raise ParseError("empty array literal", t.span)
            return self.finish(ast.ArrayLit(elements), t)
        if (_is_elementary(t) or t.lexeme == "payable") and self.peek().lexeme == "(":
            if t.lexeme != "payable" and elementary(t.lexeme) is None:
                raise ParseError(f"unsupported construct: integer type '{t.lexeme}'", t.span)
            self.i += 1
            self.expect("(")
            arg = self.expression()
            self.expect(")")
            return self.finish(ast.TypeConv(t.lexeme, arg), t)
        if t.kind is TokenKind.KEYWORD and t.lexeme in UNSUPPORTED:
            raise self.unsupported(UNSUPPORTED[t.lexeme])
        raise self.error("expression")


def _check_calls(contract: ast.ContractDef) -> None:
    """Reject calls other than enum casts and the builtin value transfers."""
    enums = {e.name for e in contract.enums}
    roots: List[ast.Node] = [*contract.functions, *contract.modifiers, *contract.state_vars]
    for root in roots:
        for node in root.walk():
            if not isinstance(node, ast.Call):
                continue
            callee = node.callee
            if isinstance(callee, ast.Ident) and callee.name in enums:
                continue
            if isinstance(callee, ast.Member) and callee.name in BUILTIN_CALL_MEMBERS:
                continue
            if isinstance(callee, ast.Ident):
                what = f"call to '{callee.name}' (user-defined function calls)"
            elif isinstance(callee, ast.Member):
                what = f"call to '.{callee.name}' (external calls other than transfer/send/call)"
            else:
                what = "call of a computed callee"
            raise ParseError(f"unsupported construct: {what}", node.span)
    for fn in contract.functions:
        for ref in fn.modifiers:
            if ref.name in enums:
                raise ParseError(f"'{ref.name}' is not a modifier", ref.span)


def parse(tokens: Sequence[Token]) -> ast.SourceUnit:
    return Parser(tokens).source_unit()


def parse_source(source: str) -> ast.SourceUnit:
    return parse(tokenize(source))
