"""Forward interval analysis: abstract states, transfer functions, worklist fixpoint.

The fixpoint loop follows the classic edge-driven worklist: pop the node with
the smallest reverse-post-order index, push its out-state along every edge
(refined by the branch condition on true/false edges) and re-queue the far
node whenever its in-state grows.  Loop headers switch from join to widening
after `widen_delay` updates.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from typing import ClassVar, Dict, FrozenSet, Iterable, List, Optional, Tuple

from minisol_iv.cfg import (
    ArrayLit, Assert, Assign, BasicBlock, BinOp, Branch, Cfg, Const, Convert, Declare, EnumCast,
    ExternalTransfer, Field, Index, Instr, Length, Operand, Place, Require, Return, Revert, UnOp,
    loop_headers, lower_contract, reverse_post_order,
)
from minisol_iv.domain import (
    BOOL_TOP, BOTTOM, FALSE, LENGTH_DOMAIN, TRUE, AbstractValue, ArrayValue, Interval, MappingValue,
    Scalar, coerce, default_value, interval_binop, interval_compare, interval_logic,
    interval_neg, join, leq, top_value, widen, with_assigned,
)
from minisol_iv.errors import IterationLimitExceeded
from minisol_iv.frontend.resolver import ContractSymbols, MSG_SENDER, MSG_VALUE
from minisol_iv.frontend.span import Span
from minisol_iv.frontend.types import ADDRESS, UINT256, bounds

DEFAULT_WIDEN_DELAY = 3
MAX_VISITS = 1000

# --- state ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class Fact:
    """Relational side fact: variable `index` is below `array.length`."""

    index: str
    array: Place


class AbstractState:
    """Variable key -> AbstractValue, plus relational facts; unreachable when `reachable` is False.

    A key missing from a reachable state carries no information (it is out of
    scope on some incoming path), so join keeps only the shared keys.
    """

    __slots__ = ("values", "facts", "reachable")

    def __init__(self, values: Optional[Dict[str, AbstractValue]] = None,
                 facts: FrozenSet[Fact] = frozenset(), reachable: bool = True):
        self.values = dict(values or {})
        self.facts = facts
        self.reachable = reachable

    @staticmethod
    def bottom() -> "AbstractState":
        return AbstractState(reachable=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AbstractState):
            return NotImplemented
        if not self.reachable or not other.reachable:
            return self.reachable == other.reachable
        return self.values == other.values and self.facts == other.facts

    def __repr__(self) -> str:
        if not self.reachable:
            return "AbstractState(⊥)"
        return f"AbstractState({self.values!r}, facts={set(self.facts)!r})"

    def get(self, key: str) -> Optional[AbstractValue]:
        return self.values.get(key)

    def copy(self) -> "AbstractState":
        return AbstractState(self.values, self.facts, self.reachable)

    def join(self, other: "AbstractState") -> "AbstractState":
        if not self.reachable:
            return other
        if not other.reachable:
            return self
        values = {k: join(v, other.values[k]) for k, v in self.values.items() if k in other.values}
        return AbstractState(values, self.facts & other.facts)

    def widen(self, new: "AbstractState", thresholds: Iterable[int]) -> "AbstractState":
        if not self.reachable:
            return new
        if not new.reachable:
            return self
        thresholds = tuple(thresholds)
        values = {k: widen(v, new.values[k], thresholds) for k, v in self.values.items() if k in new.values}
        return AbstractState(values, self.facts & new.facts)

    def leq(self, other: "AbstractState") -> bool:
        if not self.reachable:
            return True
        if not other.reachable:
            return False
        if not other.facts <= self.facts:
            return False
        for k, v in other.values.items():
            mine = self.values.get(k)
            if mine is None or not leq(mine, v):
                return False
        return True


# --- events --------------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisEvent:
    kind: ClassVar[str] = "event"
    span: Span


@dataclass(frozen=True)
class DivisorInterval(AnalysisEvent):
    kind: ClassVar[str] = "DivisorInterval"
    op: str
    dividend: Interval
    divisor: Interval
    operands: Tuple[Operand, Operand]
    texts: Tuple[str, str]
    loc: Tuple[int, int]  # (block, instruction index)


@dataclass(frozen=True)
class ConditionVerdict(AnalysisEvent):
    kind: ClassVar[str] = "ConditionVerdict"
    site: str  # require, assert or branch
    verdict: Interval
    text: str
    origin: Optional[str] = None  # 'if' or 'loop' for branches
    operands: Tuple[Tuple[str, Interval], ...] = ()  # compared values, literals omitted


@dataclass(frozen=True)
class EnumCastSource(AnalysisEvent):
    kind: ClassVar[str] = "EnumCastSource"
    source: Interval
    variants: int
    enum_name: str
    text: str
    assigned_to_variable: bool


@dataclass(frozen=True)
class IndexAccess(AnalysisEvent):
    kind: ClassVar[str] = "IndexAccess"
    index: Interval
    length: Interval
    guarded: bool
    index_text: str
    array_text: str


@dataclass(frozen=True)
class ValueTransferOfQuotient(AnalysisEvent):
    kind: ClassVar[str] = "ValueTransferOfQuotient"
    div_span: Span
    dividend: Interval
    divisor: Interval
    operands: Tuple[Operand, Operand]
    texts: Tuple[str, str]


# --- transfer ------------------------------------------------------------------------------

_NEGATE = {"lt": "ge", "le": "gt", "gt": "le", "ge": "lt", "eq": "ne", "ne": "eq"}
_SWAP = {"lt": "gt", "le": "ge", "gt": "lt", "ge": "le", "eq": "eq", "ne": "ne"}
_COMPARE = frozenset(_NEGATE)
_ARITH = frozenset(("add", "sub", "mul", "div", "mod"))


class _Revert(Exception):
    """The instruction reverts on every execution reaching it."""


class Transfer:
    """Flow function for one Cfg."""

    def __init__(self, cfg: Cfg):
        self.cfg = cfg
        self.defs = cfg.temp_defs()

    # -- reading ----------------------------------------------------------------------------

    def operand(self, st: AbstractState, x: Operand, ins: Optional[Instr] = None,
                events: Optional[list] = None) -> AbstractValue:
        if isinstance(x, Const):
            return Scalar(Interval.const(x.value), bounds(x.ty), True)
        return self.read(st, x, ins, events)

    def root_value(self, st: AbstractState, key: str) -> AbstractValue:
        v = st.get(key)
        if v is None:
            v = top_value(self.cfg.var_types[key])
        return v

    def read(self, st: AbstractState, p: Place, ins: Optional[Instr] = None,
             events: Optional[list] = None) -> AbstractValue:
        v = self.root_value(st, p.root)
        for i, elem in enumerate(p.path):
            if isinstance(elem, Field):
                v = v.field(elem.name)
            elif isinstance(elem, Length):
                v = Scalar(v.length, LENGTH_DOMAIN, v.assigned)
            elif isinstance(v, ArrayValue):
                self.check_index(st, Place(p.root, p.path[:i]), v, elem, ins, events)
                v = v.elem
            else:
                v = v.value
        return v

    def check_index(self, st: AbstractState, arr: Place, v: ArrayValue, elem: Index,
                    ins: Optional[Instr], events: Optional[list]) -> None:
        idx = self.operand(st, elem.operand).iv
        x = elem.operand
        guarded = isinstance(x, Place) and x.is_simple and Fact(x.root, arr) in st.facts
        if events is not None:
            events.append(IndexAccess(elem.span, idx, v.length, guarded, self.cfg.text(x), self.cfg.text(arr)))
        if ins is not None and not ins.guarded and not idx.is_bottom and not v.length.is_bottom \
                and idx.lo >= v.length.hi:
            raise _Revert()

    # -- writing ----------------------------------------------------------------------------

    def write(self, st: AbstractState, p: Place, value: AbstractValue, ins: Optional[Instr] = None,
              events: Optional[list] = None) -> None:
        value = with_assigned(coerce(value, self.cfg.place_type(p)))
        root = self.root_value(st, p.root) if p.path else None
        st.values[p.root] = self._set(st, Place(p.root), root, p.path, value, ins, events)
        st.facts = frozenset(f for f in st.facts if f.index != p.root and f.array.root != p.root)

    def _set(self, st, prefix: Place, cur, path, value, ins, events) -> AbstractValue:
        if not path:
            return value
        elem, rest = path[0], path[1:]
        if isinstance(elem, Field):
            inner = self._set(st, prefix.extend(elem), cur.field(elem.name), rest, value, ins, events)
            return replace(cur.with_field(elem.name, inner), assigned=True)
        if isinstance(cur, ArrayValue):
            self.check_index(st, prefix, cur, elem, ins, events)
            new = self._set(st, prefix.extend(elem), cur.elem, rest, value, ins, events)
            idx = self.operand(st, elem.operand).iv
            strong = cur.length == Interval.const(1) and idx == FALSE
            return ArrayValue(cur.length, new if strong else join(cur.elem, new), True)
        assert isinstance(cur, MappingValue)
        new = self._set(st, prefix.extend(elem), cur.value, rest, value, ins, events)
        return MappingValue(join(cur.value, new), True)

    def refine_place(self, st: AbstractState, p: Place, iv: Interval) -> bool:
        """Narrow a scalar place in place; False when the place cannot be refined."""
        if any(isinstance(e, Index) for e in p.path) or p.root not in st.values:
            return False

        def go(cur: AbstractValue, path) -> AbstractValue:
            if not path:
                return replace(cur, iv=cur.iv.meet(iv))
            elem = path[0]
            if isinstance(elem, Length):
                return replace(cur, length=cur.length.meet(iv))
            return cur.with_field(elem.name, go(cur.field(elem.name), path[1:]))

        st.values[p.root] = go(st.values[p.root], p.path)
        return True

    # -- instructions -----------------------------------------------------------------------

    def apply(self, ins: Instr, st: AbstractState, events: Optional[list] = None,
              loc: Tuple[int, int] = (0, 0)) -> AbstractState:
        """Return the out-state of `ins`; `events` (when given) collects analysis events."""
        if not st.reachable:
            return st
        out = st.copy()
        if ins.guards:
            # Short-circuit: evaluate under the left operands that let control get here.
            for cond, holds in ins.guards:
                st = self.refine(st, cond, holds)
            if not st.reachable:
                d = ins.dest_place()
                if d is not None:
                    out.values[d.root] = top_value(self.cfg.place_type(d), True)
                return out
        try:
            self._apply(ins, st, out, events, loc)
        except _Revert:
            return AbstractState.bottom()
        return out

    def _result(self, ins: Instr, iv: Interval, ty) -> AbstractValue:
        if iv.is_bottom:
            if not ins.guarded:
                raise _Revert()
            return top_value(ty, True)
        return Scalar(iv, bounds(ty), True)

    def _apply(self, ins: Instr, st: AbstractState, out: AbstractState, events, loc) -> None:
        rd = lambda x: self.operand(st, x, ins, events)  # noqa: E731
        if isinstance(ins, Declare):
            out.values[ins.dest.root] = default_value(ins.ty)
        elif isinstance(ins, Assign):
            self.write(out, ins.dest, rd(ins.src), ins, events)
        elif isinstance(ins, BinOp):
            a, b = rd(ins.lhs), rd(ins.rhs)
            if ins.op in _ARITH:
                if ins.op in ("div", "mod") and events is not None:
                    events.append(DivisorInterval(
                        ins.site, ins.op, a.iv, b.iv, (ins.lhs, ins.rhs),
                        (self.cfg.text(ins.lhs), self.cfg.text(ins.rhs)), loc))
                iv, _, _ = interval_binop(ins.op, a.iv, b.iv, ins.ty)
            elif ins.op in _COMPARE:
                iv = interval_compare(ins.op, a.iv, b.iv)
            else:
                iv = interval_logic(ins.op, a.iv, b.iv)
            self.write(out, ins.dest, self._result(ins, iv, ins.ty), ins, events)
        elif isinstance(ins, UnOp):
            a = rd(ins.src)
            if ins.op == "not":
                iv = interval_logic("not", a.iv)
            else:
                iv, _ = interval_neg(a.iv, bounds(ins.ty))
            self.write(out, ins.dest, self._result(ins, iv, ins.ty), ins, events)
        elif isinstance(ins, EnumCast):
            src = rd(ins.src).iv
            n = len(ins.target.variants)
            if events is not None:
                events.append(EnumCastSource(ins.site, src, n, ins.target.name, self.cfg.text(ins.src),
                                             not ins.dest.is_temp))
            self.write(out, ins.dest, self._result(ins, src.meet(Interval(0, n - 1)), ins.target), ins, events)
        elif isinstance(ins, Convert):
            src = rd(ins.src)
            dom = bounds(ins.ty)
            iv = src.iv if src.iv.leq(Interval(*dom)) else Interval(*dom)
            self.write(out, ins.dest, Scalar(iv, dom, True), ins, events)
        elif isinstance(ins, ArrayLit):
            elem_ty = ins.ty.elem
            summary = None
            for x in ins.elems:
                v = coerce(rd(x), elem_ty)
                summary = v if summary is None else join(summary, v)
            self.write(out, ins.dest, ArrayValue(Interval.const(len(ins.elems)), summary, True), ins, events)
        elif isinstance(ins, ExternalTransfer):
            rd(ins.recipient)
            rd(ins.amount)
            if ins.result is not None:
                self.write(out, ins.result, Scalar(BOOL_TOP, (0, 1), True), ins, events)
        elif isinstance(ins, (Require, Assert)):
            verdict = rd(ins.cond).iv
            if events is not None:
                events.append(ConditionVerdict(ins.site, "require" if isinstance(ins, Require) else "assert",
                                               verdict, self.cfg.text(ins.cond),
                                               operands=self.cond_operands(st, ins.cond)))
            refined = self.refine(out, ins.cond, True)
            out.values, out.facts, out.reachable = refined.values, refined.facts, refined.reachable
            if not out.reachable:
                raise _Revert()
        elif isinstance(ins, Revert):
            raise _Revert()
        elif isinstance(ins, Return):
            for x in ins.operands:
                rd(x)
        elif isinstance(ins, Branch):
            verdict = rd(ins.cond).iv
            if events is not None:
                events.append(ConditionVerdict(ins.site, "branch", verdict, self.cfg.text(ins.cond), ins.origin,
                                               self.cond_operands(st, ins.cond)))
        else:
            raise TypeError(f"unknown instruction {ins!r}")

    def cond_operands(self, st: AbstractState, cond: Operand) -> Tuple[Tuple[str, Interval], ...]:
        d = self.defs.get(cond.root) if isinstance(cond, Place) and cond.is_temp else None
        xs = [d.lhs, d.rhs] if isinstance(d, BinOp) and d.op in _COMPARE else [cond]
        return tuple((self.cfg.text(x), self.operand(st, x).iv) for x in xs if isinstance(x, Place))

    # -- refinement -------------------------------------------------------------------------

    def refine(self, st: AbstractState, cond: Operand, assume: bool) -> AbstractState:
        """State narrowed by assuming `cond` evaluates to `assume`."""
        if not st.reachable:
            return st
        out = st.copy()
        if not self._refine(out, cond, assume, 0):
            return AbstractState.bottom()
        return out

    def _truth(self, st: AbstractState, x: Operand) -> Interval:
        return self.operand(st, x).iv

    def _refine(self, st: AbstractState, cond: Operand, assume: bool, depth: int) -> bool:
        if isinstance(cond, Const):
            return (cond.value != 0) == assume
        want = TRUE if assume else FALSE
        if self._truth(st, cond).meet(want).is_bottom:
            return False
        d = self.defs.get(cond.root) if cond.is_temp and cond.is_simple and depth < 64 else None
        if isinstance(d, BinOp) and d.op in _COMPARE:
            if not self._refine_compare(st, d.op if assume else _NEGATE[d.op], d.lhs, d.rhs):
                return False
        elif isinstance(d, BinOp) and d.op in ("and", "or"):
            both = (d.op == "and") == assume  # a && b true, or a || b false
            if both:
                if not self._refine(st, d.lhs, assume, depth + 1) or not self._refine(st, d.rhs, assume, depth + 1):
                    return False
            else:
                # One side decides; refine the other when the first is known.
                lhs, rhs = self._truth(st, d.lhs), self._truth(st, d.rhs)
                other = FALSE if assume else TRUE  # value that does not decide
                if lhs == other and not self._refine(st, d.rhs, assume, depth + 1):
                    return False
                if rhs == other and not self._refine(st, d.lhs, assume, depth + 1):
                    return False
        elif isinstance(d, UnOp) and d.op == "not":
            if not self._refine(st, d.src, not assume, depth + 1):
                return False
        self.refine_place(st, cond, want)
        return not self._truth(st, cond).is_bottom

    def _refine_compare(self, st: AbstractState, op: str, lhs: Operand, rhs: Operand) -> bool:
        a, b = self._truth(st, lhs), self._truth(st, rhs)
        if a.is_bottom or b.is_bottom:
            return False
        if op in ("gt", "ge"):
            lhs, rhs, a, b, op = rhs, lhs, b, a, _SWAP[op]
        if op == "lt":
            na, nb = Interval.of(a.lo, min(a.hi, b.hi - 1)), Interval.of(max(b.lo, a.lo + 1), b.hi)
        elif op == "le":
            na, nb = Interval.of(a.lo, min(a.hi, b.hi)), Interval.of(max(b.lo, a.lo), b.hi)
        elif op == "eq":
            na = nb = a.meet(b)
        else:  # ne
            na, nb = _trim(a, b), _trim(b, a)
        if na.is_bottom or nb.is_bottom:
            return False
        for x, iv in ((lhs, na), (rhs, nb)):
            if isinstance(x, Place):
                self.refine_place(st, x, iv)
        if op == "lt" and isinstance(lhs, Place) and lhs.is_simple and not lhs.is_temp \
                and isinstance(rhs, Place) and rhs.path and isinstance(rhs.path[-1], Length):
            st.facts = st.facts | {Fact(lhs.root, Place(rhs.root, rhs.path[:-1]))}
        return True


def _trim(a: Interval, b: Interval) -> Interval:
    """a without the single value of b, when that value is an endpoint of a."""
    if not b.is_singleton:
        return a
    v = b.lo
    if a.is_singleton and a.lo == v:
        return BOTTOM
    if a.lo == v:
        return Interval(v + 1, a.hi)
    if a.hi == v:
        return Interval(a.lo, v - 1)
    return a


def transfer(instr: Instr, state: AbstractState, cfg: Cfg) -> Tuple[AbstractState, List[AnalysisEvent]]:
    """Out-state and events of a single instruction."""
    events: List[AnalysisEvent] = []
    return Transfer(cfg).apply(instr, state, events), events


def refine_condition(state: AbstractState, cond: Operand, assume: bool, cfg: Cfg) -> AbstractState:
    return Transfer(cfg).refine(state, cond, assume)


# --- fixpoint --------------------------------------------------------------------------------


@dataclass
class AnalysisResult:
    cfg: Cfg
    initial: AbstractState
    block_in: Dict[int, AbstractState]
    instr_states: Dict[Tuple[int, int], Tuple[AbstractState, AbstractState]]
    end: AbstractState
    events: List[AnalysisEvent]
    visits: Dict[int, int]  # times each node was processed
    updates: Dict[int, int]  # times each node's in-state changed
    iterations: int
    widenings: int
    thresholds: Tuple[int, ...] = ()

    def state_before(self, block: int, index: int) -> AbstractState:
        return self.instr_states[(block, index)][0]


def harvest_thresholds(cfg: Cfg) -> Tuple[int, ...]:
    """Integer literals of the function (and their neighbours) for threshold widening."""
    found = set()

    def visit(x) -> None:
        if isinstance(x, Const):
            found.update((x.value - 1, x.value, x.value + 1))
        elif isinstance(x, Place):
            for e in x.path:
                if isinstance(e, Index):
                    visit(e.operand)

    for _, _, ins in cfg.instructions():
        for x in ins.reads():
            visit(x)
        d = ins.dest_place()
        if d is not None:
            visit(d)
    return tuple(sorted(found))


def _edge_state(tr: Transfer, block: BasicBlock, out: AbstractState, kind: str) -> AbstractState:
    br = block.branch
    if br is None or kind == "uncond":
        return out
    return tr.refine(out, br.cond, kind == "true")


def _run_block(tr: Transfer, block: BasicBlock, st: AbstractState, events=None, record=None) -> AbstractState:
    for i, ins in enumerate(block.instrs):
        new = tr.apply(ins, st, events, (block.id, i))
        if record is not None:
            record[(block.id, i)] = (st, new)
        st = new
    return st


def run_worklist(cfg: Cfg, initial: AbstractState, widen_delay: int = DEFAULT_WIDEN_DELAY,
                 max_visits: int = MAX_VISITS) -> AnalysisResult:
    """Least fixpoint (up to widening) of the forward analysis over `cfg`."""
    if widen_delay < 1:
        raise ValueError("widen delay must be at least 1")
    tr = Transfer(cfg)
    order = reverse_post_order(cfg)
    rank = {n: i for i, n in enumerate(order)}
    headers = set(loop_headers(cfg))
    thresholds = harvest_thresholds(cfg)
    succs: Dict[int, list] = {b.id: [] for b in cfg.blocks}
    for e in cfg.edges:
        succs[e.src].append(e)

    state_in: Dict[int, AbstractState] = {cfg.entry: initial}
    updates = {b.id: 0 for b in cfg.blocks}
    visits = {b.id: 0 for b in cfg.blocks}
    updates[cfg.entry] = 1
    heap = [(rank[cfg.entry], cfg.entry)]
    queued = {cfg.entry}
    iterations = widenings = 0
    while heap:
        _, n = heapq.heappop(heap)
        queued.discard(n)
        visits[n] += 1
        iterations += 1
        if visits[n] > max_visits:
            raise IterationLimitExceeded(f"{cfg.name}: block B{n} processed more than {max_visits} times")
        block = cfg.blocks[n]
        out = _run_block(tr, block, state_in[n])
        for e in succs[n]:
            v = _edge_state(tr, block, out, e.kind)
            old = state_in.get(e.dst)
            if old is None:
                new = v
            else:
                new = old.join(v)
                if e.dst in headers and updates[e.dst] >= widen_delay:
                    new = old.widen(new, thresholds)
                    widenings += 1
            if old is None or not new.leq(old):
                state_in[e.dst] = new
                updates[e.dst] += 1
                if e.dst not in queued:
                    heapq.heappush(heap, (rank[e.dst], e.dst))
                    queued.add(e.dst)

    # Final pass: per-instruction states and events from the fixpoint.
    events: List[AnalysisEvent] = []
    record: Dict[Tuple[int, int], Tuple[AbstractState, AbstractState]] = {}
    block_out: Dict[int, AbstractState] = {}
    for n in order:
        st = state_in.get(n, AbstractState.bottom())
        block_out[n] = _run_block(tr, cfg.blocks[n], st, events, record)
    for b in cfg.blocks:
        state_in.setdefault(b.id, AbstractState.bottom())
    events.extend(_quotient_transfers(cfg, record, events))

    end = AbstractState.bottom()
    for n in cfg.terminal_blocks():
        end = end.join(block_out[n])
    return AnalysisResult(cfg, initial, state_in, record, end, events, visits, updates,
                          iterations, widenings, thresholds)


def _quotient_transfers(cfg: Cfg, record, events) -> List[AnalysisEvent]:
    """Transfers whose amount was defined by a division somewhere in the function."""
    divs = {e.loc: e for e in events if isinstance(e, DivisorInterval) and e.op == "div"}
    by_dest: Dict[Place, List[DivisorInterval]] = {}
    for (b, i, ins) in cfg.instructions():
        if isinstance(ins, BinOp) and ins.op == "div" and (b, i) in divs:
            by_dest.setdefault(ins.dest, []).append(divs[(b, i)])
    out = []
    for (b, i, ins) in cfg.instructions():
        if not isinstance(ins, ExternalTransfer) or not isinstance(ins.amount, Place):
            continue
        if not record.get((b, i), (AbstractState.bottom(),))[0].reachable:
            continue
        for d in by_dest.get(ins.amount, []):
            out.append(ValueTransferOfQuotient(ins.site, d.span, d.dividend, d.divisor, d.operands, d.texts))
    return out


# --- contracts -------------------------------------------------------------------------------


@dataclass
class ContractAnalysis:
    symbols: ContractSymbols
    cfgs: Dict[str, Cfg]
    results: Dict[str, AnalysisResult]
    post_constructor: AbstractState
    written_outside_constructor: FrozenSet[str] = field(default_factory=frozenset)

    @property
    def name(self) -> str:
        return self.symbols.contract.name


def entry_state(cfg: Cfg, storage: Dict[str, AbstractValue]) -> AbstractState:
    """State at function entry: storage, msg builtins, then parameters at top."""
    values: Dict[str, AbstractValue] = dict(storage)
    values[MSG_SENDER] = top_value(ADDRESS, True)
    msg_value = Interval(*bounds(UINT256)) if cfg.payable else FALSE
    values[MSG_VALUE] = Scalar(msg_value, bounds(UINT256), True)
    for key in cfg.params:
        values[key] = top_value(cfg.var_types[key], True)
    return AbstractState(values)


def written_roots(cfg: Cfg) -> set:
    roots = set()
    for _, _, ins in cfg.instructions():
        d = ins.dest_place()
        if d is not None:
            roots.add(d.root)
    return roots


def analyze_contract(symbols: ContractSymbols, widen_delay: int = DEFAULT_WIDEN_DELAY) -> ContractAnalysis:
    """Run the constructor, then every function from the resulting storage state."""
    cfgs = lower_contract(symbols)
    ctor = cfgs["constructor"]
    defaults = {key: default_value(ctor.var_types[key]) for key in ctor.state_vars}
    ctor_result = run_worklist(ctor, entry_state(ctor, defaults), widen_delay)
    post = ctor_result.end if ctor_result.end.reachable else AbstractState(defaults)

    written = set()
    for name, cfg in cfgs.items():
        if name != "constructor":
            written |= written_roots(cfg)
    storage = {}
    for key in ctor.state_vars:
        base = post.get(key) or defaults[key]
        if key in written:
            base = join(base, top_value(ctor.var_types[key], True))
        storage[key] = base

    results = {}
    if symbols.contract.constructor is not None or ctor.blocks[0].instrs:
        results["constructor"] = ctor_result
    for name, cfg in cfgs.items():
        if name != "constructor":
            results[name] = run_worklist(cfg, entry_state(cfg, storage), widen_delay)
    return ContractAnalysis(symbols, cfgs, results, post, frozenset(k for k in written if k in defaults))
