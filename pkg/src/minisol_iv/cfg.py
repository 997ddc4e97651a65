"""Three-address IR, basic blocks and lowering from the resolved AST.

Each function (with its modifiers inlined at `_;`) becomes one `Cfg`.  The
constructor's Cfg also runs the state-variable initializers first.
Instructions read their operands lazily from the abstract (or concrete)
state, so a `Place` operand means "the value stored there right now".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Tuple, Union

from minisol_iv.errors import LowerError
from minisol_iv.frontend import ast
from minisol_iv.frontend.printer import expr_text
from minisol_iv.frontend.resolver import BUILTIN_VARS, ContractSymbols, VarSymbol
from minisol_iv.frontend.span import NO_SPAN, Span
from minisol_iv.frontend.types import (
    BOOL, UINT256, ArrayType, EnumType, MappingType, MiniSolType, StructType, TypeRefType,
)

# --- operands ------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: int
    ty: MiniSolType = UINT256

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Field:
    name: str


@dataclass(frozen=True)
class Index:
    operand: "Operand"  # a Const or a path-free Place
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Length:
    pass


PathElem = Union[Field, Index, Length]


@dataclass(frozen=True)
class Place:
    """A variable identity plus an access path."""

    root: str
    path: Tuple[PathElem, ...] = ()

    def extend(self, elem: PathElem) -> "Place":
        return Place(self.root, self.path + (elem,))

    @property
    def is_temp(self) -> bool:
        return self.root.startswith("$")

    @property
    def is_simple(self) -> bool:
        return not self.path


Operand = Union[Const, Place]

# --- instructions ----------------------------------------------------------------


@dataclass(kw_only=True)
class Instr:
    # `span` is the lowered statement; `site` the sub-expression responsible
    # for the instruction (used to place diagnostics).
    span: Span = NO_SPAN
    site: Span = NO_SPAN
    # True inside the right operand of && / ||, where a failing evaluation
    # does not necessarily revert the whole transaction.
    guarded: bool = False
    # Left operands that held (True for &&) or failed (False for ||) on the way here.
    guards: Tuple[Tuple["Operand", bool], ...] = field(default=(), compare=False)

    def reads(self) -> Iterator[Operand]:
        return iter(())

    def dest_place(self) -> Optional[Place]:
        return getattr(self, "dest", None)


@dataclass(kw_only=True)
class Declare(Instr):
    dest: Place
    ty: MiniSolType


@dataclass(kw_only=True)
class Assign(Instr):
    dest: Place
    src: Operand

    def reads(self):
        yield self.src


@dataclass(kw_only=True)
class BinOp(Instr):
    dest: Place
    op: str  # add sub mul div mod lt le gt ge eq ne and or
    lhs: Operand
    rhs: Operand
    ty: MiniSolType  # result type; BOOL for comparisons and logic

    def reads(self):
        yield self.lhs
        yield self.rhs


@dataclass(kw_only=True)
class UnOp(Instr):
    dest: Place
    op: str  # not, neg
    src: Operand
    ty: MiniSolType

    def reads(self):
        yield self.src


@dataclass(kw_only=True)
class EnumCast(Instr):
    dest: Place
    target: EnumType
    src: Operand

    def reads(self):
        yield self.src


@dataclass(kw_only=True)
class Convert(Instr):
    """Elementary conversion (`address(x)`, `uint8(x)`, `payable(x)`)."""

    dest: Place
    ty: MiniSolType
    src: Operand

    def reads(self):
        yield self.src


@dataclass(kw_only=True)
class ArrayLit(Instr):
    dest: Place
    elems: Tuple[Operand, ...]
    ty: ArrayType

    def reads(self):
        yield from self.elems


@dataclass(kw_only=True)
class ExternalTransfer(Instr):
    """`.transfer`, `.send` and `.call{value: v}`; `result` receives the success flag."""

    recipient: Operand
    amount: Operand
    result: Optional[Place] = None
    kind: str = "transfer"

    def reads(self):
        yield self.recipient
        yield self.amount

    def dest_place(self) -> Optional[Place]:
        return self.result


@dataclass(kw_only=True)
class Require(Instr):
    cond: Operand

    def reads(self):
        yield self.cond


@dataclass(kw_only=True)
class Assert(Instr):
    cond: Operand

    def reads(self):
        yield self.cond


@dataclass(kw_only=True)
class Revert(Instr):
    pass


@dataclass(kw_only=True)
class Return(Instr):
    operands: Tuple[Operand, ...] = ()

    def reads(self):
        yield from self.operands


@dataclass(kw_only=True)
class Branch(Instr):
    """Block terminator; the true/false edges leave the enclosing block."""

    cond: Operand
    origin: str  # 'if' or 'loop'

    def reads(self):
        yield self.cond


# --- graph -----------------------------------------------------------------------

EDGE_KINDS = ("uncond", "true", "false")


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    kind: str = "uncond"


@dataclass
class BasicBlock:
    id: int
    instrs: List[Instr] = field(default_factory=list)

    @property
    def branch(self) -> Optional[Branch]:
        if self.instrs and isinstance(self.instrs[-1], Branch):
            return self.instrs[-1]
        return None


@dataclass
class Cfg:
    name: str  # "Contract.function"
    blocks: List[BasicBlock]
    edges: List[Edge]
    entry: int = 0
    var_types: Dict[str, MiniSolType] = field(default_factory=dict)
    display: Dict[str, str] = field(default_factory=dict)  # key -> source name
    temp_text: Dict[str, str] = field(default_factory=dict)  # temp -> source text
    params: List[str] = field(default_factory=list)
    returns: List[str] = field(default_factory=list)
    locals: List[str] = field(default_factory=list)
    state_vars: List[str] = field(default_factory=list)
    payable: bool = False
    is_constructor: bool = False
    func: Optional[ast.FunctionDef] = field(default=None, compare=False, repr=False)

    def successors(self, n: int) -> List[Edge]:
        return [e for e in self.edges if e.src == n]

    def predecessors(self, n: int) -> List[Edge]:
        return [e for e in self.edges if e.dst == n]

    def instructions(self) -> Iterator[Tuple[int, int, Instr]]:
        for b in self.blocks:
            for i, ins in enumerate(b.instrs):
                yield b.id, i, ins

    def temp_defs(self) -> Dict[str, Instr]:
        defs = {}
        for _, _, ins in self.instructions():
            d = ins.dest_place()
            if d is not None and d.is_temp and d.is_simple:
                defs[d.root] = ins
        return defs

    def place_type(self, p: Place) -> MiniSolType:
        ty = self.var_types[p.root]
        for elem in p.path:
            ty = step_type(ty, elem)
        return ty

    def text(self, x: Operand) -> str:
        """Source-like rendering of an operand; temps print as the expression they hold."""
        if isinstance(x, Const):
            return str(x.value)
        if x.is_temp and x.is_simple and x.root in self.temp_text:
            return self.temp_text[x.root]
        return place_text(x, self.display, self.temp_text)

    def terminal_blocks(self) -> List[int]:
        srcs = {e.src for e in self.edges}
        return [b.id for b in self.blocks if b.id not in srcs]


def step_type(ty: MiniSolType, elem: PathElem) -> MiniSolType:
    if isinstance(elem, Field):
        assert isinstance(ty, StructType)
        fty = ty.field(elem.name)
        assert fty is not None
        return fty
    if isinstance(elem, Length):
        return UINT256
    if isinstance(ty, ArrayType):
        return ty.elem
    assert isinstance(ty, MappingType)
    return ty.value


def place_text(p: Place, display: Optional[Dict[str, str]] = None,
               temps: Optional[Dict[str, str]] = None) -> str:
    if temps and p.is_temp and p.is_simple and p.root in temps:
        return temps[p.root]
    out = (display or {}).get(p.root, p.root)
    for elem in p.path:
        if isinstance(elem, Field):
            out += "." + elem.name
        elif isinstance(elem, Length):
            out += ".length"
        else:
            x = elem.operand
            out += f"[{x.value if isinstance(x, Const) else place_text(x, display, temps)}]"
    return out


# --- lowering ----------------------------------------------------------------------

_BINOPS = {
    "+": "add", "-": "sub", "*": "mul", "/": "div", "%": "mod",
    "<": "lt", "<=": "le", ">": "gt", ">=": "ge", "==": "eq", "!=": "ne",
    "&&": "and", "||": "or",
}
_COMPOUND = {"+=": "add", "-=": "sub", "*=": "mul", "/=": "div", "%=": "mod"}
OP_SYMBOLS = {v: k for k, v in _BINOPS.items()}


class _Lowerer:
    def __init__(self, syms: ContractSymbols, name: str):
        self.syms = syms
        self.blocks: List[BasicBlock] = []
        self.edges: List[Edge] = []
        self.cur: Optional[int] = self.new_block()
        self.stmt_span = NO_SPAN
        self.guards: List[Tuple[Operand, bool]] = []
        self.cfg = Cfg(name, self.blocks, self.edges)
        for sym in syms.state_vars.values():
            self.add_var(sym)
            self.cfg.state_vars.append(sym.key)
        for sym in BUILTIN_VARS.values():
            self.cfg.var_types[sym.key] = sym.ty
            self.cfg.display[sym.key] = sym.key
        self.ntemps = 0

    # -- plumbing --------------------------------------------------------------------

    def new_block(self) -> int:
        b = BasicBlock(len(self.blocks))
        self.blocks.append(b)
        return b.id

    def edge(self, src: int, dst: int, kind: str = "uncond") -> None:
        self.edges.append(Edge(src, dst, kind))

    def has_preds(self, b: int) -> bool:
        return any(e.dst == b for e in self.edges)

    def emit(self, ins: Instr, site: Optional[Span] = None) -> None:
        if self.cur is None:
            return  # unreachable code
        ins.span = self.stmt_span
        ins.site = site if site is not None else self.stmt_span
        ins.guarded = bool(self.guards)
        ins.guards = tuple(self.guards)
        self.blocks[self.cur].instrs.append(ins)

    def add_var(self, sym: VarSymbol) -> None:
        self.cfg.var_types[sym.key] = sym.ty
        self.cfg.display[sym.key] = sym.name

    def temp(self, ty: MiniSolType, source: ast.Expr) -> Place:
        key = f"$t{self.ntemps}"
        self.ntemps += 1
        self.cfg.var_types[key] = ty
        self.cfg.temp_text[key] = expr_text(source)
        return Place(key)

    # -- expressions -----------------------------------------------------------------

    def place(self, e: ast.Expr) -> Place:
        """Lower an lvalue-shaped expression to a Place."""
        if isinstance(e, ast.Ident) and isinstance(e.symbol, VarSymbol):
            return Place(e.symbol.key)
        if isinstance(e, ast.Member):
            if isinstance(e.obj, ast.Ident) and e.obj.name == "msg" and not isinstance(e.obj.symbol, VarSymbol):
                return Place(f"msg.{e.name}")
            base = self.place(e.obj)
            if isinstance(e.obj.ty, ArrayType) and e.name == "length":
                return base.extend(Length())
            return base.extend(Field(e.name))
        if isinstance(e, ast.IndexExpr):
            base = self.place(e.base)
            idx = self.expr(e.index)
            if isinstance(idx, Place) and not idx.is_simple:
                t = self.temp(e.index.ty, e.index)
                self.emit(Assign(dest=t, src=idx), e.index.span)
                idx = t
            return base.extend(Index(idx, e.span))
        raise LowerError("expression is not a storage location", e.span)

    def expr(self, e: ast.Expr, dest: Optional[Place] = None) -> Operand:
        """Lower `e`; when `dest` is given the value ends up stored there."""
        result = self._expr(e, dest)
        if dest is not None and result != dest:
            self.emit(Assign(dest=dest, src=result), e.span)
            return dest
        return result

    def target(self, dest: Optional[Place], e: ast.Expr) -> Place:
        return dest if dest is not None else self.temp(e.ty, e)

    def _expr(self, e: ast.Expr, dest: Optional[Place]) -> Operand:
        if isinstance(e, ast.IntLit):
            return Const(e.value, e.ty)
        if isinstance(e, ast.BoolLit):
            return Const(int(e.value), BOOL)
        if isinstance(e, ast.Member) and isinstance(e.obj.ty, TypeRefType):
            return Const(e.ty.variants.index(e.name), e.ty)
        if isinstance(e, (ast.Ident, ast.Member, ast.IndexExpr)):
            return self.place(e)
        if isinstance(e, ast.Binary):
            op = _BINOPS[e.op]
            lhs = self.expr(e.left)
            if op in ("and", "or"):
                self.guards.append((lhs, op == "and"))
                rhs = self.expr(e.right)
                self.guards.pop()
            else:
                rhs = self.expr(e.right)
            d = self.target(dest, e)
            self.emit(BinOp(dest=d, op=op, lhs=lhs, rhs=rhs, ty=e.ty), e.span)
            return d
        if isinstance(e, ast.Unary):
            if e.op == "-" and isinstance(e.operand, ast.IntLit):
                return Const(-e.operand.value, e.ty)
            src = self.expr(e.operand)
            d = self.target(dest, e)
            self.emit(UnOp(dest=d, op="not" if e.op == "!" else "neg", src=src, ty=e.ty), e.span)
            return d
        if isinstance(e, ast.Call):
            return self.call(e, dest)
        if isinstance(e, ast.TypeConv):
            src = self.expr(e.arg)
            d = self.target(dest, e)
            self.emit(Convert(dest=d, ty=e.ty, src=src), e.span)
            return d
        if isinstance(e, ast.ArrayLit):
            elems = tuple(self.expr(x) for x in e.elements)
            d = self.target(dest, e)
            self.emit(ArrayLit(dest=d, elems=elems, ty=e.ty), e.span)
            return d
        raise LowerError(f"cannot lower expression {type(e).__name__}", e.span)

    def call(self, e: ast.Call, dest: Optional[Place], result: Optional[Place] = None,
             discard: bool = False) -> Operand:
        if e.kind == "enum_cast":
            src = self.expr(e.args[0])
            d = self.target(dest, e)
            self.emit(EnumCast(dest=d, target=e.ty, src=src), e.span)
            return d
        assert isinstance(e.callee, ast.Member)
        recipient = self.expr(e.callee.obj)
        if e.kind == "call":
            amount = self.expr(e.options[0].value) if e.options else Const(0)
        else:
            amount = self.expr(e.args[0])
        if e.kind == "send" and not discard and result is None:
            result = self.target(dest, e)
        self.emit(ExternalTransfer(recipient=recipient, amount=amount, result=result, kind=e.kind), e.span)
        return result if result is not None else Const(0)

    # -- statements ------------------------------------------------------------------

    def stmts(self, body: List[ast.Stmt], ctx: "_Ctx") -> None:
        for s in body:
            self.stmt(s, ctx)

    def stmt(self, s: ast.Stmt, ctx: "_Ctx") -> None:
        if self.cur is None:
            return  # dead code after return/revert is dropped
        outer = self.stmt_span
        self.stmt_span = s.span
        try:
            self._stmt(s, ctx)
        finally:
            self.stmt_span = outer

    def _stmt(self, s: ast.Stmt, ctx: "_Ctx") -> None:
        if isinstance(s, ast.Block):
            self.stmts(s.stmts, ctx)
        elif isinstance(s, ast.VarDecl):
            sym = s.decl.symbol
            self.add_var(sym)
            self.cfg.locals.append(sym.key)
            dest = Place(sym.key)
            if s.init is None:
                self.emit(Declare(dest=dest, ty=sym.ty))
            else:
                self.expr(s.init, dest)
        elif isinstance(s, ast.TupleDecl):
            first = s.decls[0] if s.decls else None
            result = None
            for slot in s.decls:
                if slot is not None:
                    self.add_var(slot.symbol)
                    self.cfg.locals.append(slot.symbol.key)
            if first is not None:
                result = Place(first.symbol.key)
            if not (isinstance(s.value, ast.Call) and s.value.kind == "call"):
                raise LowerError("unsupported construct: tuple destructuring", s.span)
            if any(slot is not None for slot in s.decls[1:]):
                raise LowerError("unsupported construct: binding call return data", s.span)
            self.call(s.value, None, result=result, discard=result is None)
        elif isinstance(s, ast.Assign):
            dest = self.place(s.target)
            if s.op == "=":
                self.expr(s.value, dest)
            else:
                rhs = self.expr(s.value)
                self.emit(BinOp(dest=dest, op=_COMPOUND[s.op], lhs=dest, rhs=rhs, ty=s.target.ty))
        elif isinstance(s, ast.IncDec):
            dest = self.place(s.target)
            op = "add" if s.op == "++" else "sub"
            self.emit(BinOp(dest=dest, op=op, lhs=dest, rhs=Const(1, s.target.ty), ty=s.target.ty))
        elif isinstance(s, ast.ExprStmt):
            if isinstance(s.expr, ast.Call):
                self.call(s.expr, None, discard=True)
            else:
                self.expr(s.expr)
        elif isinstance(s, ast.Require):
            self.emit(Require(cond=self.expr(s.cond)), s.cond.span)
        elif isinstance(s, ast.Assert):
            self.emit(Assert(cond=self.expr(s.cond)), s.cond.span)
        elif isinstance(s, ast.Revert):
            self.emit(Revert())
            self.cur = None
        elif isinstance(s, ast.Return):
            ops = () if s.value is None else (self.expr(s.value),)
            self.emit(Return(operands=ops))
            if ctx.return_target is not None:
                self.jump(ctx.return_target)
            self.cur = None
        elif isinstance(s, ast.If):
            self.if_stmt(s, ctx)
        elif isinstance(s, ast.While):
            self.loop(s.cond, None, s.body, ctx)
        elif isinstance(s, ast.For):
            if s.init is not None:
                self.stmt(s.init, ctx)
            self.loop(s.cond, s.step, s.body, ctx)
        elif isinstance(s, ast.Placeholder):
            if ctx.placeholder is None:
                raise LowerError("placeholder outside a modifier", s.span)
            ctx.placeholder()
        else:
            raise LowerError(f"cannot lower statement {type(s).__name__}", s.span)

    def jump(self, target: int) -> None:
        if self.cur is not None:
            self.edge(self.cur, target)

    def branch(self, cond: ast.Expr, origin: str) -> Tuple[int, int]:
        c = self.expr(cond)
        self.emit(Branch(cond=c, origin=origin), cond.span)
        assert self.cur is not None
        t, f = self.new_block(), self.new_block()
        self.edge(self.cur, t, "true")
        self.edge(self.cur, f, "false")
        return t, f

    def if_stmt(self, s: ast.If, ctx: "_Ctx") -> None:
        then_b, else_b = self.branch(s.cond, "if")
        self.cur = then_b
        self.stmt(s.then, ctx)
        then_end = self.cur
        if s.else_ is None:
            join = else_b
        else:
            self.cur = else_b
            self.stmt(s.else_, ctx)
            else_end = self.cur
            join = self.new_block()
            if else_end is not None:
                self.edge(else_end, join)
        if then_end is not None:
            self.edge(then_end, join)
        self.cur = join if self.has_preds(join) else None

    def loop(self, cond: Optional[ast.Expr], step: Optional[ast.Stmt], body: ast.Stmt, ctx: "_Ctx") -> None:
        header = self.new_block()
        self.jump(header)
        self.cur = header
        exit_b: Optional[int] = None
        if cond is not None:
            body_b, exit_b = self.branch(cond, "loop")
        else:
            body_b = self.new_block()
            self.edge(header, body_b)
        self.cur = body_b
        self.stmt(body, ctx)
        if step is not None and self.cur is not None:
            step_b = self.new_block()
            self.jump(step_b)
            self.cur = step_b
            self.stmt(step, ctx)
        self.jump(header)
        self.cur = exit_b

    # -- finishing -------------------------------------------------------------------

    def finish(self) -> Cfg:
        """Drop unreachable blocks and renumber the rest in creation order."""
        seen = {0}
        stack = [0]
        while stack:
            n = stack.pop()
            for e in self.edges:
                if e.src == n and e.dst not in seen:
                    seen.add(e.dst)
                    stack.append(e.dst)
        # A block that is only the target of an empty fall-through chain is kept;
        # blocks nobody jumps to (other than the entry) are removed.
        keep = [b for b in self.blocks if b.id in seen]
        remap = {b.id: i for i, b in enumerate(keep)}
        for b in keep:
            b.id = remap[b.id]
        self.cfg.blocks = keep
        self.cfg.edges = [Edge(remap[e.src], remap[e.dst], e.kind) for e in self.edges if e.src in remap]
        return self.cfg


@dataclass
class _Ctx:
    return_target: Optional[int] = None
    placeholder: Optional[Callable[[], None]] = None


def _lower_code(lw: _Lowerer, fn: ast.FunctionDef) -> None:
    syms = lw.syms
    info = syms.info(fn)
    for sym in info.params:
        lw.add_var(sym)
        lw.cfg.params.append(sym.key)
    for sym in info.returns:
        lw.add_var(sym)
        lw.cfg.returns.append(sym.key)
    for sym in info.returns:
        lw.stmt_span = fn.span
        lw.emit(Declare(dest=Place(sym.key), ty=sym.ty))

    mods = fn.modifiers

    def layer(k: int, return_target: Optional[int]) -> None:
        if k == len(mods):
            lw.stmts(fn.body.stmts, _Ctx(return_target=return_target))
            return
        ref = mods[k]
        mod = syms.modifiers[ref.name]
        minfo = syms.info(mod)
        for sym in minfo.params:
            lw.add_var(sym)
            lw.cfg.locals.append(sym.key)
        for arg, sym in zip(ref.args, minfo.params):
            lw.stmt_span = ref.span
            lw.expr(arg, Place(sym.key))

        def placeholder() -> None:
            cont = lw.new_block()
            layer(k + 1, cont)
            lw.jump(cont)
            lw.cur = cont if lw.has_preds(cont) else None

        lw.stmts(mod.body.stmts, _Ctx(return_target=return_target, placeholder=placeholder))

    end = lw.new_block() if mods else None
    layer(0, end)
    if end is not None:
        lw.jump(end)
        lw.cur = end if lw.has_preds(end) else None


def lower_function(func: ast.FunctionDef, symbols: ContractSymbols) -> Cfg:
    """Lower one function (or the constructor body alone) into a Cfg."""
    lw = _Lowerer(symbols, f"{symbols.contract.name}.{func.display_name}")
    lw.cfg.func = func
    lw.cfg.payable = func.mutability == "payable"
    lw.cfg.is_constructor = func.is_constructor
    _lower_code(lw, func)
    return lw.finish()


def lower_constructor(symbols: ContractSymbols) -> Cfg:
    """State-variable initializers followed by the constructor body, if any."""
    c = symbols.contract
    lw = _Lowerer(symbols, f"{c.name}.constructor")
    lw.cfg.is_constructor = True
    for v in c.state_vars:
        if v.init is not None:
            lw.stmt_span = v.span
            lw.expr(v.init, Place(v.symbol.key))
    ctor = c.constructor
    if ctor is not None:
        lw.cfg.func = ctor
        lw.cfg.payable = ctor.mutability == "payable"
        _lower_code(lw, ctor)
    return lw.finish()


def lower_contract(symbols: ContractSymbols) -> Dict[str, Cfg]:
    """Constructor Cfg (always present) plus one Cfg per non-constructor function."""
    out = {"constructor": lower_constructor(symbols)}
    for fn in symbols.contract.functions:
        if not fn.is_constructor:
            out[fn.name] = lower_function(fn, symbols)
    return out


# --- ordering -----------------------------------------------------------------------


def reverse_post_order(cfg: Cfg) -> List[int]:
    """Entry first; successors are explored so that the first edge's target comes first."""
    succs: Dict[int, List[int]] = {b.id: [] for b in cfg.blocks}
    for e in cfg.edges:
        succs[e.src].append(e.dst)
    seen = {cfg.entry}
    post: List[int] = []
    stack = [(cfg.entry, iter(reversed(succs[cfg.entry])))]
    while stack:
        node, it = stack[-1]
        for nxt in it:
            if nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, iter(reversed(succs[nxt]))))
                break
        else:
            stack.pop()
            post.append(node)
    return post[::-1]


def loop_headers(cfg: Cfg) -> List[int]:
    order = {n: i for i, n in enumerate(reverse_post_order(cfg))}
    return sorted({e.dst for e in cfg.edges if order[e.dst] <= order[e.src]})


# --- validation and rendering --------------------------------------------------------


def check_cfg(cfg: Cfg) -> List[str]:
    """Structural invariants; returns a list of violations (empty when valid)."""
    problems = []
    preds = {b.id: [e for e in cfg.edges if e.dst == b.id] for b in cfg.blocks}
    if preds[cfg.entry]:
        problems.append("entry has predecessors")
    for b in cfg.blocks:
        out = [e for e in cfg.edges if e.src == b.id]
        kinds = sorted(e.kind for e in out)
        if b.branch is not None:
            if kinds != ["false", "true"]:
                problems.append(f"B{b.id}: branch needs one true and one false edge, has {kinds}")
        elif out and kinds != ["uncond"]:
            problems.append(f"B{b.id}: expected one unconditional successor, has {kinds}")
        for ins in b.instrs[:-1]:
            if isinstance(ins, Branch):
                problems.append(f"B{b.id}: branch before end of block")
    if len(reverse_post_order(cfg)) != len(cfg.blocks):
        problems.append("some blocks are unreachable")
    assigned = set()
    for n in reverse_post_order(cfg):
        for ins in cfg.blocks[n].instrs:
            for x in _operand_places(ins):
                if x.is_temp and x.root not in assigned:
                    problems.append(f"temp {x.root} used before assignment")
            d = ins.dest_place()
            if d is not None and d.is_temp and d.is_simple:
                if d.root in assigned:
                    problems.append(f"temp {d.root} assigned twice")
                assigned.add(d.root)
    return problems


def _operand_places(ins: Instr) -> Iterator[Place]:
    def walk(x: Operand) -> Iterator[Place]:
        if isinstance(x, Place):
            yield Place(x.root)
            for elem in x.path:
                if isinstance(elem, Index):
                    yield from walk(elem.operand)
    for x in ins.reads():
        yield from walk(x)
    d = ins.dest_place()
    if d is not None:
        for elem in d.path:
            if isinstance(elem, Index):
                yield from walk(elem.operand)


def instr_text(ins: Instr, cfg: Optional[Cfg] = None) -> str:
    disp = cfg.display if cfg is not None else {}

    def t(x: Operand) -> str:
        return str(x.value) if isinstance(x, Const) else place_text(x, disp)

    if isinstance(ins, Declare):
        return f"declare {ins.ty} {t(ins.dest)}"
    if isinstance(ins, Assign):
        return f"{t(ins.dest)} = {t(ins.src)}"
    if isinstance(ins, BinOp):
        return f"{t(ins.dest)} = {t(ins.lhs)} {OP_SYMBOLS[ins.op]} {t(ins.rhs)}"
    if isinstance(ins, UnOp):
        return f"{t(ins.dest)} = {'!' if ins.op == 'not' else '-'}{t(ins.src)}"
    if isinstance(ins, EnumCast):
        return f"{t(ins.dest)} = {ins.target.name}({t(ins.src)})"
    if isinstance(ins, Convert):
        return f"{t(ins.dest)} = {ins.ty}({t(ins.src)})"
    if isinstance(ins, ArrayLit):
        return f"{t(ins.dest)} = [{', '.join(t(x) for x in ins.elems)}]"
    if isinstance(ins, ExternalTransfer):
        call = f"{ins.kind}({t(ins.recipient)}, {t(ins.amount)})"
        return f"{t(ins.result)} = {call}" if ins.result is not None else call
    if isinstance(ins, Require):
        return f"require {t(ins.cond)}"
    if isinstance(ins, Assert):
        return f"assert {t(ins.cond)}"
    if isinstance(ins, Revert):
        return "revert"
    if isinstance(ins, Return):
        return "return" + ("" if not ins.operands else " " + ", ".join(t(x) for x in ins.operands))
    if isinstance(ins, Branch):
        return f"branch {t(ins.cond)}"
    raise TypeError(ins)


def dump_cfg(cfg: Cfg) -> str:
    lines = [f"cfg {cfg.name}"]
    for b in cfg.blocks:
        lines.append(f"B{b.id}:")
        for ins in b.instrs:
            lines.append(f"  {instr_text(ins, cfg)}")
        lines.append("")
    for e in cfg.edges:
        lines.append(f"edges: B{e.src}->B{e.dst} [{e.kind}]")
    return "\n".join(lines) + "\n"
