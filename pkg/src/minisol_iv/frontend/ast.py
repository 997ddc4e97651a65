"""AST node classes.

Spans, resolved types and symbol bindings are excluded from equality, so two
trees compare equal when they are structurally identical.  That is what the
pretty-printer round-trip relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Iterator, List, Optional, Tuple

from minisol_iv.frontend.span import NO_SPAN, Span


@dataclass(kw_only=True)
class Node:
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    def children(self) -> Iterator["Node"]:
        for f in fields(self):
            if not f.compare:
                continue
            yield from _nodes_in(getattr(self, f.name))

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.children():
            yield from child.walk()


def _nodes_in(value: Any) -> Iterator[Node]:
    if isinstance(value, Node):
        yield value
    elif isinstance(value, (list, tuple)):
        for item in value:
            yield from _nodes_in(item)


# --- type names ------------------------------------------------------------


@dataclass
class TypeName(Node):
    pass


@dataclass
class ElementaryTypeName(TypeName):
    name: str  # uint256, int8, bool, address ...
    payable: bool = False


@dataclass
class UserTypeName(TypeName):
    name: str


@dataclass
class ArrayTypeName(TypeName):
    base: TypeName
    length: Optional[int] = None


@dataclass
class MappingTypeName(TypeName):
    key: TypeName
    value: TypeName


# --- expressions -------------------------------------------------------------


@dataclass
class Expr(Node):
    ty: Any = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class StrLit(Expr):
    value: str


@dataclass
class Ident(Expr):
    name: str
    symbol: Any = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class Member(Expr):
    obj: Expr
    name: str


@dataclass
class IndexExpr(Expr):
    base: Expr
    index: Expr


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class Unary(Expr):
    op: str  # '!' or '-'
    operand: Expr


@dataclass
class CallOption(Node):
    name: str
    value: Expr


@dataclass
class Call(Expr):
    """`callee(args)`; resolve sets `kind` to enum_cast, transfer, send or call."""

    callee: Expr
    args: List[Expr]
    options: List[CallOption] = field(default_factory=list)
    kind: Optional[str] = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class TypeConv(Expr):
    """Elementary conversion such as `address(0)`, `uint8(x)` or `payable(a)`."""

    target: str
    arg: Expr


@dataclass
class ArrayLit(Expr):
    elements: List[Expr]


# --- statements --------------------------------------------------------------


@dataclass
class Stmt(Node):
    pass


@dataclass
class Block(Stmt):
    stmts: List[Stmt]


@dataclass
class LocalDecl(Node):
    type_name: TypeName
    location: Optional[str]
    name: str
    symbol: Any = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class VarDecl(Stmt):
    decl: LocalDecl
    init: Optional[Expr] = None


@dataclass
class TupleDecl(Stmt):
    """`(bool ok, ) = expr;` with empty slots as None."""

    decls: List[Optional[LocalDecl]]
    value: Expr


@dataclass
class Assign(Stmt):
    target: Expr
    op: str  # '=', '+=', '-=', '*=', '/=', '%='
    value: Expr


@dataclass
class IncDec(Stmt):
    target: Expr
    op: str  # '++' or '--'
    prefix: bool = False


@dataclass
class If(Stmt):
    cond: Expr
    then: Stmt
    else_: Optional[Stmt] = None


@dataclass
class For(Stmt):
    init: Optional[Stmt]
    cond: Optional[Expr]
    step: Optional[Stmt]
    body: Stmt


@dataclass
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass
class Require(Stmt):
    cond: Expr
    message: Optional[Expr] = None


@dataclass
class Assert(Stmt):
    cond: Expr


@dataclass
class Revert(Stmt):
    message: Optional[Expr] = None


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class Placeholder(Stmt):
    """The `_;` inside a modifier body."""


# --- declarations ------------------------------------------------------------


@dataclass
class Param(Node):
    type_name: TypeName
    location: Optional[str]
    name: Optional[str]
    symbol: Any = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class EnumDef(Node):
    name: str
    variants: List[str]
    ty: Any = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class StructDef(Node):
    name: str
    fields: List[Param]
    ty: Any = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class StateVar(Node):
    type_name: TypeName
    visibility: Optional[str]
    name: str
    init: Optional[Expr] = None
    symbol: Any = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class ModifierRef(Node):
    name: str
    args: List[Expr] = field(default_factory=list)


@dataclass
class FunctionDef(Node):
    name: str
    params: List[Param]
    returns: List[Param]
    visibility: Optional[str]
    mutability: Optional[str]  # None, 'view', 'pure', 'payable'
    modifiers: List[ModifierRef]
    body: Block
    is_constructor: bool = False

    @property
    def display_name(self) -> str:
        return "constructor" if self.is_constructor else self.name


@dataclass
class ModifierDef(Node):
    name: str
    params: List[Param]
    body: Block


@dataclass
class ContractDef(Node):
    name: str
    enums: List[EnumDef] = field(default_factory=list)
    structs: List[StructDef] = field(default_factory=list)
    state_vars: List[StateVar] = field(default_factory=list)
    modifiers: List[ModifierDef] = field(default_factory=list)
    functions: List[FunctionDef] = field(default_factory=list)

    @property
    def constructor(self) -> Optional[FunctionDef]:
        for fn in self.functions:
            if fn.is_constructor:
                return fn
        return None


@dataclass
class SourceUnit(Node):
    contracts: List[ContractDef]


def statements(stmt: Stmt) -> Iterator[Stmt]:
    """All statements nested in `stmt`, including itself, in source order."""
    for node in stmt.walk():
        if isinstance(node, Stmt):
            yield node


def span_tuple(node: Node) -> Tuple[int, int]:
    return node.span.start, node.span.end
