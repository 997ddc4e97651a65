"""Render AST nodes back to MiniSol source text.

The output re-parses to a structurally identical tree; expressions get only
the parentheses their precedence requires.
"""

from __future__ import annotations

import json
from typing import List

from minisol_iv.frontend import ast

_PRECEDENCE = {
    "||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}
_UNARY = 7
_POSTFIX = 8


def _prec(e: ast.Expr) -> int:
    if isinstance(e, ast.Binary):
        return _PRECEDENCE[e.op]
    if isinstance(e, ast.Unary):
        return _UNARY
    return _POSTFIX


def expr_text(e: ast.Expr) -> str:
    if isinstance(e, ast.IntLit):
        return str(e.value)
    if isinstance(e, ast.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, ast.StrLit):
        return json.dumps(e.value)
    if isinstance(e, ast.Ident):
        return e.name
    if isinstance(e, ast.Member):
        return f"{_operand(e.obj, _POSTFIX)}.{e.name}"
    if isinstance(e, ast.IndexExpr):
        return f"{_operand(e.base, _POSTFIX)}[{expr_text(e.index)}]"
    if isinstance(e, ast.Binary):
        p = _PRECEDENCE[e.op]
        # Left-associative: the right operand needs parens at equal precedence.
        return f"{_operand(e.left, p)} {e.op} {_operand(e.right, p + 1)}"
    if isinstance(e, ast.Unary):
        inner = _operand(e.operand, _UNARY)
        if e.op == "-" and inner.startswith("-"):
            inner = f"({inner})"  # `--x` would lex as a decrement
        return f"{e.op}{inner}"
    if isinstance(e, ast.Call):
        opts = ""
        if e.options:
            opts = "{" + ", ".join(f"{o.name}: {expr_text(o.value)}" for o in e.options) + "}"
        args = ", ".join(expr_text(a) for a in e.args)
        return f"{_operand(e.callee, _POSTFIX)}{opts}({args})"
    if isinstance(e, ast.TypeConv):
        return f"{e.target}({expr_text(e.arg)})"
    if isinstance(e, ast.ArrayLit):
        return "[" + ", ".join(expr_text(x) for x in e.elements) + "]"
    raise TypeError(f"cannot print {type(e).__name__}")


def _operand(e: ast.Expr, min_prec: int) -> str:
    text = expr_text(e)
    return f"({text})" if _prec(e) < min_prec else text


def type_text(t: ast.TypeName) -> str:
    if isinstance(t, ast.ElementaryTypeName):
        return t.name + (" payable" if t.payable else "")
    if isinstance(t, ast.UserTypeName):
        return t.name
    if isinstance(t, ast.ArrayTypeName):
        return f"{type_text(t.base)}[{'' if t.length is None else t.length}]"
    if isinstance(t, ast.MappingTypeName):
        return f"mapping({type_text(t.key)} => {type_text(t.value)})"
    raise TypeError(f"cannot print {type(t).__name__}")


def _decl_text(d: ast.LocalDecl) -> str:
    loc = f" {d.location}" if d.location else ""
    return f"{type_text(d.type_name)}{loc} {d.name}"


def _param_text(p: ast.Param) -> str:
    parts = [type_text(p.type_name)]
    if p.location:
        parts.append(p.location)
    if p.name:
        parts.append(p.name)
    return " ".join(parts)


def simple_stmt_text(s: ast.Stmt) -> str:
    """Statements that fit on one line, without the trailing semicolon."""
    if isinstance(s, ast.VarDecl):
        init = f" = {expr_text(s.init)}" if s.init is not None else ""
        return _decl_text(s.decl) + init
    if isinstance(s, ast.TupleDecl):
        slots = ", ".join("" if d is None else _decl_text(d) for d in s.decls)
        return f"({slots}) = {expr_text(s.value)}"
    if isinstance(s, ast.Assign):
        return f"{expr_text(s.target)} {s.op} {expr_text(s.value)}"
    if isinstance(s, ast.IncDec):
        target = expr_text(s.target)
        return f"{s.op}{target}" if s.prefix else f"{target}{s.op}"
    if isinstance(s, ast.ExprStmt):
        return expr_text(s.expr)
    if isinstance(s, ast.Return):
        return "return" if s.value is None else f"return {expr_text(s.value)}"
    if isinstance(s, ast.Require):
        msg = f", {expr_text(s.message)}" if s.message is not None else ""
        return f"require({expr_text(s.cond)}{msg})"
    if isinstance(s, ast.Assert):
        return f"assert({expr_text(s.cond)})"
    if isinstance(s, ast.Revert):
        return f"revert({'' if s.message is None else expr_text(s.message)})"
    if isinstance(s, ast.Placeholder):
        return "_"
    raise TypeError(f"not a simple statement: {type(s).__name__}")


class _Printer:
    def __init__(self, indent: str = "    "):
        self.lines: List[str] = []
        self.unit = indent
        self.depth = 0

    def emit(self, text: str) -> None:
        self.lines.append(self.unit * self.depth + text)

    def block(self, b: ast.Block) -> None:
        self.depth += 1
        for s in b.stmts:
            self.stmt(s)
        self.depth -= 1

    def clause(self, header: str, body: ast.Stmt) -> None:
        if isinstance(body, ast.Block):
            self.emit(header + " {")
            self.block(body)
            self.emit("}")
        else:
            self.emit(header)
            self.depth += 1
            self.stmt(body)
            self.depth -= 1

    def stmt(self, s: ast.Stmt) -> None:
        if isinstance(s, ast.Block):
            self.emit("{")
            self.block(s)
            self.emit("}")
        elif isinstance(s, ast.If):
            self.clause(f"if ({expr_text(s.cond)})", s.then)
            if s.else_ is not None:
                self.clause("else", s.else_)
        elif isinstance(s, ast.While):
            self.clause(f"while ({expr_text(s.cond)})", s.body)
        elif isinstance(s, ast.For):
            init = simple_stmt_text(s.init) if s.init else ""
            cond = expr_text(s.cond) if s.cond else ""
            step = simple_stmt_text(s.step) if s.step else ""
            self.clause(f"for ({init}; {cond}; {step})", s.body)
        else:
            self.emit(simple_stmt_text(s) + ";")

    def contract(self, c: ast.ContractDef) -> None:
        self.emit(f"contract {c.name} {{")
        self.depth += 1
        for e in c.enums:
            self.emit(f"enum {e.name} {{ {', '.join(e.variants)} }}")
        for st in c.structs:
            self.emit(f"struct {st.name} {{")
            self.depth += 1
            for f in st.fields:
                self.emit(f"{type_text(f.type_name)} {f.name};")
            self.depth -= 1
            self.emit("}")
        for v in c.state_vars:
            vis = f" {v.visibility}" if v.visibility else ""
            init = f" = {expr_text(v.init)}" if v.init is not None else ""
            self.emit(f"{type_text(v.type_name)}{vis} {v.name}{init};")
        for m in c.modifiers:
            params = ", ".join(_param_text(p) for p in m.params)
            self.emit(f"modifier {m.name}({params}) {{")
            self.block(m.body)
            self.emit("}")
        for fn in c.functions:
            self.function(fn)
        self.depth -= 1
        self.emit("}")

    def function(self, fn: ast.FunctionDef) -> None:
        params = ", ".join(_param_text(p) for p in fn.params)
        head = "constructor" if fn.is_constructor else f"function {fn.name}"
        attrs = [a for a in (fn.visibility, fn.mutability) if a]
        for ref in fn.modifiers:
            args = "(" + ", ".join(expr_text(a) for a in ref.args) + ")" if ref.args else ""
            attrs.append(ref.name + args)
        if fn.returns:
            attrs.append("returns (" + ", ".join(_param_text(p) for p in fn.returns) + ")")
        suffix = (" " + " ".join(attrs)) if attrs else ""
        self.emit(f"{head}({params}){suffix} {{")
        self.block(fn.body)
        self.emit("}")


def pretty(unit: ast.SourceUnit) -> str:
    p = _Printer()
    for i, c in enumerate(unit.contracts):
        if i:
            p.lines.append("")
        p.contract(c)
    return "\n".join(p.lines) + "\n"
