"""Name resolution and type checking.

`resolve` binds every identifier to a symbol and stores a MiniSolType on
every expression node (`expr.ty`).  Variables receive a `key` that is unique
within the code analyzed together (a function plus its inlined modifiers);
the analysis state is indexed by these keys.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

from minisol_iv.errors import ResolveError, TypeCheckError
from minisol_iv.frontend import ast
from minisol_iv.frontend.types import (
    ADDRESS, BOOL, BYTES, INT256, STRING, UINT256, VOID,
    AddressType, ArrayType, BoolType, BuiltinType, EnumType, IntType, MappingType,
    MiniSolType, StructType, TupleType, TypeRefType, bounds, elementary, is_integer, is_scalar,
)

MSG_SENDER = "msg.sender"
MSG_VALUE = "msg.value"


@dataclass
class VarSymbol:
    name: str
    key: str
    ty: MiniSolType
    kind: str  # state | param | local | return | builtin
    node: Optional[ast.Node] = field(default=None, repr=False)


BUILTIN_VARS = {
    MSG_SENDER: VarSymbol("sender", MSG_SENDER, ADDRESS, "builtin"),
    MSG_VALUE: VarSymbol("value", MSG_VALUE, UINT256, "builtin"),
}


@dataclass
class CodeInfo:
    """Variables declared by one function, constructor or modifier."""

    node: Union[ast.FunctionDef, ast.ModifierDef]
    params: List[VarSymbol] = field(default_factory=list)
    returns: List[VarSymbol] = field(default_factory=list)
    locals: List[VarSymbol] = field(default_factory=list)


@dataclass
class ContractSymbols:
    contract: ast.ContractDef
    enums: Dict[str, EnumType] = field(default_factory=dict)
    structs: Dict[str, StructType] = field(default_factory=dict)
    state_vars: Dict[str, VarSymbol] = field(default_factory=dict)
    modifiers: Dict[str, ast.ModifierDef] = field(default_factory=dict)
    code: Dict[int, CodeInfo] = field(default_factory=dict)

    def info(self, node: Union[ast.FunctionDef, ast.ModifierDef]) -> CodeInfo:
        return self.code[id(node)]


@dataclass
class SymbolTable:
    contracts: Dict[str, ContractSymbols] = field(default_factory=dict)

    def contract(self, c: Union[str, ast.ContractDef]) -> ContractSymbols:
        return self.contracts[c if isinstance(c, str) else c.name]


def _is_literal(e: ast.Expr) -> bool:
    if isinstance(e, ast.IntLit):
        return True
    if isinstance(e, ast.Unary) and e.op == "-":
        return _is_literal(e.operand)
    if isinstance(e, ast.Binary) and e.op in "+-*/%":
        return _is_literal(e.left) and _is_literal(e.right)
    return False


def common_int_type(a: IntType, b: IntType, span) -> IntType:
    if a.signed != b.signed:
        raise TypeCheckError(f"operands of type {a} and {b} mix signed and unsigned", span)
    return a if a.bits >= b.bits else b


def assignable(src: MiniSolType, dst: MiniSolType) -> bool:
    if src == dst:
        return True
    if isinstance(src, IntType) and isinstance(dst, IntType):
        return src.signed == dst.signed and src.bits <= dst.bits
    if isinstance(src, ArrayType) and isinstance(dst, ArrayType):
        if dst.length is not None and src.length != dst.length:
            return False
        return assignable(src.elem, dst.elem)
    return False


class _ContractResolver:
    def __init__(self, c: ast.ContractDef):
        self.c = c
        self.syms = ContractSymbols(c)
        self._struct_defs = {s.name: s for s in c.structs}
        self._struct_busy: set = set()
        self.scopes: List[Dict[str, VarSymbol]] = []
        self.info: Optional[CodeInfo] = None
        self.used_keys: set = set()
        self.key_prefix = ""

    # -- declarations -----------------------------------------------------------

    def run(self) -> ContractSymbols:
        names: Dict[str, ast.Node] = {}

        def declare(name: str, node: ast.Node) -> None:
            if name in names:
                raise ResolveError(f"'{name}' is already declared in contract {self.c.name}", node.span)
            names[name] = node

        for e in self.c.enums:
            declare(e.name, e)
            if len(set(e.variants)) != len(e.variants):
                raise ResolveError(f"duplicate variant in enum {e.name}", e.span)
            e.ty = self.syms.enums[e.name] = EnumType(e.name, tuple(e.variants))
        for s in self.c.structs:
            declare(s.name, s)
        for s in self.c.structs:
            s.ty = self.struct_type(s.name, s.span)
        for v in self.c.state_vars:
            declare(v.name, v)
            ty = self.type_of(v.type_name)
            v.symbol = self.syms.state_vars[v.name] = VarSymbol(v.name, v.name, ty, "state", v)
        for m in self.c.modifiers:
            declare(m.name, m)
            self.syms.modifiers[m.name] = m
        ctor_seen = False
        for fn in self.c.functions:
            if fn.is_constructor:
                if ctor_seen:
                    raise ResolveError("more than one constructor", fn.span)
                ctor_seen = True
            elif fn.name in names and not isinstance(names[fn.name], ast.FunctionDef):
                raise ResolveError(f"'{fn.name}' is already declared in contract {self.c.name}", fn.span)
            else:
                names.setdefault(fn.name, fn)

        # Initializers see every state variable, like Solidity.
        for v in self.c.state_vars:
            if v.init is not None:
                self.scopes = []
                self.info = None
                ty = self.expr(v.init, expected=v.symbol.ty)
                self.check_assignable(ty, v.symbol.ty, v.init)
        for m in self.c.modifiers:
            self.code(m, prefix=f"{m.name}::")
        for fn in self.c.functions:
            self.code(fn, prefix="")
        return self.syms

    def struct_type(self, name: str, span) -> StructType:
        if name in self.syms.structs:
            return self.syms.structs[name]
        if name in self._struct_busy:
            raise TypeCheckError(f"recursive struct type '{name}'", span)
        self._struct_busy.add(name)
        sdef = self._struct_defs[name]
        seen = set()
        fields = []
        for f in sdef.fields:
            if f.name in seen:
                raise ResolveError(f"duplicate field '{f.name}' in struct {name}", f.span)
            seen.add(f.name)
            fields.append((f.name, self.type_of(f.type_name)))
        self._struct_busy.discard(name)
        st = self.syms.structs[name] = StructType(name, tuple(fields))
        return st

    def type_of(self, t: ast.TypeName) -> MiniSolType:
        if isinstance(t, ast.ElementaryTypeName):
            ty = elementary(t.name)
            if ty is None:
                raise TypeCheckError(f"unknown elementary type '{t.name}'", t.span)
            return ty
        if isinstance(t, ast.UserTypeName):
            if t.name in self.syms.enums:
                return self.syms.enums[t.name]
            if t.name in self._struct_defs:
                return self.struct_type(t.name, t.span)
            raise ResolveError(f"unknown type '{t.name}'", t.span)
        if isinstance(t, ast.ArrayTypeName):
            if t.length is not None and t.length == 0:
                raise TypeCheckError("fixed-size arrays must have a positive length", t.span)
            return ArrayType(self.type_of(t.base), t.length)
        if isinstance(t, ast.MappingTypeName):
            key = self.type_of(t.key)
            if not is_scalar(key):
                raise TypeCheckError(f"mapping keys must be elementary or enum types, not {key}", t.key.span)
            return MappingType(key, self.type_of(t.value))
        raise TypeError(t)

    # -- scopes -------------------------------------------------------------------

    def fresh_key(self, name: str) -> str:
        base = self.key_prefix + name
        key, n = base, 1
        while key in self.used_keys:
            n += 1
            key = f"{base}#{n}"
        self.used_keys.add(key)
        return key

    def declare_local(self, name: str, ty: MiniSolType, kind: str, node: ast.Node) -> VarSymbol:
        scope = self.scopes[-1]
        if name in scope:
            raise ResolveError(f"'{name}' is already declared in this scope", node.span)
        sym = VarSymbol(name, self.fresh_key(name), ty, kind, node)
        scope[name] = sym
        assert self.info is not None
        {"param": self.info.params, "return": self.info.returns}.get(kind, self.info.locals).append(sym)
        return sym

    def lookup(self, ident: ast.Ident) -> Union[VarSymbol, MiniSolType]:
        for scope in reversed(self.scopes):
            if ident.name in scope:
                return scope[ident.name]
        if ident.name in self.syms.state_vars:
            return self.syms.state_vars[ident.name]
        if ident.name in self.syms.enums:
            return TypeRefType(self.syms.enums[ident.name])
        if ident.name in self.syms.structs:
            return TypeRefType(self.syms.structs[ident.name])
        if ident.name == "msg":
            return BuiltinType("msg")
        raise ResolveError(f"undeclared identifier '{ident.name}'", ident.span)

    def code(self, node: Union[ast.FunctionDef, ast.ModifierDef], prefix: str) -> None:
        self.info = CodeInfo(node)
        self.syms.code[id(node)] = self.info
        self.key_prefix = prefix
        self.used_keys = set(self.syms.state_vars) | set(BUILTIN_VARS)
        self.scopes = [{}]
        for p in node.params:
            ty = self.type_of(p.type_name)
            if p.name is not None:
                p.symbol = self.declare_local(p.name, ty, "param", p)
        if isinstance(node, ast.FunctionDef):
            self.returns = []
            for p in node.returns:
                ty = self.type_of(p.type_name)
                self.returns.append(ty)
                if p.name is not None:
                    p.symbol = self.declare_local(p.name, ty, "return", p)
            for ref in node.modifiers:
                mod = self.syms.modifiers.get(ref.name)
                if mod is None:
                    raise ResolveError(f"undeclared modifier '{ref.name}'", ref.span)
                if len(ref.args) != len(mod.params):
                    raise TypeCheckError(f"modifier '{ref.name}' expects {len(mod.params)} arguments", ref.span)
                for arg, p in zip(ref.args, mod.params):
                    pty = self.type_of(p.type_name)
                    self.check_assignable(self.expr(arg, expected=pty), pty, arg)
        else:
            self.returns = []
        self.block(node.body, new_scope=False)
        self.scopes = []

    # -- statements ---------------------------------------------------------------

    def block(self, b: ast.Block, new_scope: bool = True) -> None:
        if new_scope:
            self.scopes.append({})
        for s in b.stmts:
            self.stmt(s)
        if new_scope:
            self.scopes.pop()

    def cond(self, e: ast.Expr) -> None:
        ty = self.expr(e)
        if not isinstance(ty, BoolType):
            raise TypeCheckError(f"condition must be bool, not {ty}", e.span)

    def scoped(self, s: ast.Stmt) -> None:
        if isinstance(s, ast.Block):
            self.block(s)
        else:
            self.scopes.append({})
            self.stmt(s)
            self.scopes.pop()

    def stmt(self, s: ast.Stmt) -> None:
        if isinstance(s, ast.Block):
            self.block(s)
        elif isinstance(s, ast.VarDecl):
            if s.decl.location == "storage":
                raise TypeCheckError("unsupported construct: local storage references", s.decl.span)
            ty = self.type_of(s.decl.type_name)
            if s.init is not None:
                self.check_assignable(self.expr(s.init, expected=ty), ty, s.init)
            s.decl.symbol = self.declare_local(s.decl.name, ty, "local", s.decl)
        elif isinstance(s, ast.TupleDecl):
            vty = self.expr(s.value)
            if not isinstance(vty, TupleType) or len(s.decls) > len(vty.items):
                raise TypeCheckError(f"cannot destructure value of type {vty}", s.value.span)
            for slot, item in zip(s.decls, vty.items):
                if slot is None:
                    continue
                ty = self.type_of(slot.type_name)
                if ty != item:
                    raise TypeCheckError(f"cannot assign {item} to {ty}", slot.span)
                slot.symbol = self.declare_local(slot.name, ty, "local", slot)
        elif isinstance(s, ast.Assign):
            tty = self.lvalue(s.target)
            if s.op == "=":
                self.check_assignable(self.expr(s.value, expected=tty), tty, s.value)
            else:
                vty = self.expr(s.value, expected=tty if is_integer(tty) else None)
                if not (is_integer(tty) and is_integer(vty)):
                    raise TypeCheckError(f"operator {s.op} needs integer operands, got {tty} and {vty}", s.span)
                self.check_assignable(vty, tty, s.value)
        elif isinstance(s, ast.IncDec):
            tty = self.lvalue(s.target)
            if not is_integer(tty):
                raise TypeCheckError(f"operator {s.op} needs an integer operand, got {tty}", s.span)
        elif isinstance(s, ast.If):
            self.cond(s.cond)
            self.scoped(s.then)
            if s.else_ is not None:
                self.scoped(s.else_)
        elif isinstance(s, ast.While):
            self.cond(s.cond)
            self.scoped(s.body)
        elif isinstance(s, ast.For):
            self.scopes.append({})
            if s.init is not None:
                self.stmt(s.init)
            if s.cond is not None:
                self.cond(s.cond)
            if s.step is not None:
                self.stmt(s.step)
            self.scoped(s.body)
            self.scopes.pop()
        elif isinstance(s, ast.Return):
            if s.value is None:
                return
            if len(self.returns) != 1:
                raise TypeCheckError("return value does not match the declared return types", s.span)
            self.check_assignable(self.expr(s.value, expected=self.returns[0]), self.returns[0], s.value)
        elif isinstance(s, ast.Require):
            self.cond(s.cond)
            if s.message is not None:
                self.message(s.message)
        elif isinstance(s, ast.Assert):
            self.cond(s.cond)
        elif isinstance(s, ast.Revert):
            if s.message is not None:
                self.message(s.message)
        elif isinstance(s, ast.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, ast.Placeholder):
            pass
        else:
            raise TypeError(s)

    def message(self, e: ast.Expr) -> None:
        if self.expr(e) != STRING:
            raise TypeCheckError("message must be a string literal", e.span)

    def check_assignable(self, src: MiniSolType, dst: MiniSolType, e: ast.Expr) -> None:
        if not assignable(src, dst):
            raise TypeCheckError(f"cannot assign value of type {src} to {dst}", e.span)

    def lvalue(self, e: ast.Expr) -> MiniSolType:
        ty = self.expr(e)
        root = e
        while isinstance(root, (ast.Member, ast.IndexExpr)):
            if isinstance(root, ast.Member) and isinstance(root.obj.ty, ArrayType):
                raise TypeCheckError("array length is read-only", e.span)
            root = root.obj if isinstance(root, ast.Member) else root.base
        if not (isinstance(root, ast.Ident) and isinstance(root.symbol, VarSymbol)) \
                or (isinstance(e, ast.Member) and isinstance(e.obj.ty, BuiltinType)):
            raise TypeCheckError("expression is not assignable", e.span)
        return ty

    # -- expressions --------------------------------------------------------------

    def expr(self, e: ast.Expr, expected: Optional[MiniSolType] = None) -> MiniSolType:
        e.ty = self._expr(e, expected)
        return e.ty

    def _int_literal(self, e: ast.Expr, value: int, expected: Optional[MiniSolType]) -> MiniSolType:
        ty = expected if isinstance(expected, IntType) else (INT256 if value < 0 else UINT256)
        lo, hi = bounds(ty)
        if not lo <= value <= hi:
            raise TypeCheckError(f"literal {value} does not fit in {ty}", e.span)
        return ty

    def _expr(self, e: ast.Expr, expected: Optional[MiniSolType]) -> MiniSolType:
        if isinstance(e, ast.IntLit):
            return self._int_literal(e, e.value, expected)
        if isinstance(e, ast.BoolLit):
            return BOOL
        if isinstance(e, ast.StrLit):
            return STRING
        if isinstance(e, ast.Ident):
            target = self.lookup(e)
            e.symbol = target
            return target.ty if isinstance(target, VarSymbol) else target
        if isinstance(e, ast.Member):
            return self.member(e)
        if isinstance(e, ast.IndexExpr):
            base = self.expr(e.base)
            if isinstance(base, ArrayType):
                ity = self.expr(e.index, expected=UINT256)
                if not is_integer(ity):
                    raise TypeCheckError(f"array index must be an integer, not {ity}", e.index.span)
                return base.elem
            if isinstance(base, MappingType):
                kty = self.expr(e.index, expected=base.key)
                if not assignable(kty, base.key):
                    raise TypeCheckError(f"mapping key must be {base.key}, not {kty}", e.index.span)
                return base.value
            raise TypeCheckError(f"cannot index a value of type {base}", e.span)
        if isinstance(e, ast.Binary):
            return self.binary(e, expected)
        if isinstance(e, ast.Unary):
            if e.op == "!":
                self.cond(e.operand)
                return BOOL
            if _is_literal(e.operand) and isinstance(e.operand, ast.IntLit):
                target = expected if isinstance(expected, IntType) and expected.signed else INT256
                e.operand.ty = self._int_literal(e.operand, e.operand.value, target)
                return target
            ty = self.expr(e.operand, expected)
            if not (isinstance(ty, IntType) and ty.signed):
                raise TypeCheckError(f"unary minus needs a signed integer, not {ty}", e.span)
            return ty
        if isinstance(e, ast.Call):
            return self.call(e)
        if isinstance(e, ast.TypeConv):
            return self.conversion(e)
        if isinstance(e, ast.ArrayLit):
            elem_expected = expected.elem if isinstance(expected, ArrayType) else None
            tys = [self.expr(x, expected=elem_expected) for x in e.elements]
            elem = elem_expected or tys[0]
            for x, t in zip(e.elements, tys):
                if not assignable(t, elem):
                    raise TypeCheckError(f"array literal element of type {t} does not match {elem}", x.span)
            return ArrayType(elem, len(e.elements))
        raise TypeError(e)

    def literal_operand(self, e: ast.Expr, other: Optional[MiniSolType]) -> MiniSolType:
        """Type a literal operand like its partner when it fits, else by default."""
        if isinstance(other, IntType):
            try:
                return self.expr(e, expected=other)
            except TypeCheckError:
                pass
        return self.expr(e)

    def member(self, e: ast.Member) -> MiniSolType:
        obj = self.expr(e.obj)
        if obj == BuiltinType("msg"):
            key = f"msg.{e.name}"
            if key not in BUILTIN_VARS:
                raise ResolveError(f"unsupported builtin 'msg.{e.name}'", e.span)
            return BUILTIN_VARS[key].ty
        if isinstance(obj, ArrayType) and e.name == "length":
            return UINT256
        if isinstance(obj, StructType):
            fty = obj.field(e.name)
            if fty is None:
                raise ResolveError(f"struct {obj.name} has no field '{e.name}'", e.span)
            return fty
        if isinstance(obj, TypeRefType) and isinstance(obj.target, EnumType):
            if e.name not in obj.target.variants:
                raise ResolveError(f"enum {obj.target.name} has no variant '{e.name}'", e.span)
            return obj.target
        if isinstance(obj, AddressType) and e.name in ("transfer", "send", "call"):
            return BuiltinType(e.name)
        raise ResolveError(f"unknown member '{e.name}' of {obj}", e.span)

    def binary(self, e: ast.Binary, expected: Optional[MiniSolType]) -> MiniSolType:
        op = e.op
        if op in ("&&", "||"):
            self.cond(e.left)
            self.cond(e.right)
            return BOOL
        arith = op in ("+", "-", "*", "/", "%")
        # Literals take the type of the other operand.
        if _is_literal(e.left) and not _is_literal(e.right):
            rty = self.expr(e.right)
            lty = self.literal_operand(e.left, rty)
        elif _is_literal(e.left) and _is_literal(e.right):
            lty = self.literal_operand(e.left, expected if arith else None)
            rty = self.literal_operand(e.right, lty)
        else:
            lty = self.expr(e.left)
            rty = self.literal_operand(e.right, lty) if _is_literal(e.right) else self.expr(e.right)
        if arith:
            if not (isinstance(lty, IntType) and isinstance(rty, IntType)):
                raise TypeCheckError(f"operator {op} needs integer operands, got {lty} and {rty}", e.span)
            return common_int_type(lty, rty, e.span)
        # comparisons
        if isinstance(lty, IntType) and isinstance(rty, IntType):
            common_int_type(lty, rty, e.span)
            return BOOL
        if isinstance(lty, (IntType, EnumType)) and isinstance(rty, (IntType, EnumType)):
            if isinstance(lty, EnumType) and isinstance(rty, EnumType) and lty != rty:
                raise TypeCheckError(f"cannot compare {lty} with {rty}", e.span)
            return BOOL
        if lty == rty and isinstance(lty, AddressType):
            return BOOL
        if lty == rty and isinstance(lty, BoolType) and op in ("==", "!="):
            return BOOL
        raise TypeCheckError(f"cannot apply {op} to {lty} and {rty}", e.span)

    def call(self, e: ast.Call) -> MiniSolType:
        callee = self.expr(e.callee)
        if isinstance(callee, TypeRefType) and isinstance(callee.target, EnumType):
            if len(e.args) != 1 or e.options:
                raise TypeCheckError("enum conversion takes exactly one argument", e.span)
            aty = self.expr(e.args[0])
            if not (is_integer(aty) or aty == callee.target):
                raise TypeCheckError(f"cannot convert {aty} to enum {callee.target}", e.span)
            e.kind = "enum_cast"
            return callee.target
        if isinstance(callee, BuiltinType) and callee.name in ("transfer", "send"):
            if len(e.args) != 1 or e.options:
                raise TypeCheckError(f".{callee.name} takes exactly one argument", e.span)
            aty = self.expr(e.args[0], expected=UINT256)
            if not assignable(aty, UINT256):
                raise TypeCheckError(f"amount must be uint256, not {aty}", e.args[0].span)
            e.kind = callee.name
            return VOID if callee.name == "transfer" else BOOL
        if isinstance(callee, BuiltinType) and callee.name == "call":
            for opt in e.options:
                if opt.name != "value":
                    raise TypeCheckError(f"unsupported call option '{opt.name}'", opt.span)
                oty = self.expr(opt.value, expected=UINT256)
                if not assignable(oty, UINT256):
                    raise TypeCheckError(f"value must be uint256, not {oty}", opt.value.span)
            if len(e.args) != 1 or self.expr(e.args[0]) != STRING:
                raise TypeCheckError(".call takes a single payload literal", e.span)
            e.kind = "call"
            return TupleType((BOOL, BYTES))
        raise TypeCheckError(f"value of type {callee} is not callable", e.span)

    def conversion(self, e: ast.TypeConv) -> MiniSolType:
        if e.target == "payable":
            aty = self.expr(e.arg)
            if aty != ADDRESS:
                raise TypeCheckError(f"payable() needs an address, not {aty}", e.span)
            return ADDRESS
        target = elementary(e.target)
        if target is None or isinstance(target, BoolType):
            raise TypeCheckError(f"unsupported conversion to {e.target}", e.span)
        aty = self.expr(e.arg, expected=target if isinstance(target, IntType) else UINT256)
        if isinstance(target, AddressType):
            if not (aty == ADDRESS or isinstance(aty, IntType) and not aty.signed):
                raise TypeCheckError(f"cannot convert {aty} to address", e.span)
            return ADDRESS
        if not isinstance(aty, (IntType, EnumType, AddressType)):
            raise TypeCheckError(f"cannot convert {aty} to {target}", e.span)
        return target


def resolve(unit: ast.SourceUnit) -> SymbolTable:
    table = SymbolTable()
    for c in unit.contracts:
        if c.name in table.contracts:
            raise ResolveError(f"contract '{c.name}' is declared twice", c.span)
        table.contracts[c.name] = _ContractResolver(c).run()
    return table
