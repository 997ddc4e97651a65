"""Interval domain: big-integer intervals, recursive abstract values, lattice ops.

Arithmetic follows checked (Solidity >= 0.8) semantics: results outside the
result type's domain revert, so they are dropped from the result interval
and only reported through the `overflow` flag.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional, Tuple, Union

from minisol_iv.frontend.types import (
    UINT256, ArrayType, MappingType, MiniSolType, StructType, bounds, is_scalar,
)

Domain = Tuple[int, int]
UINT256_MAX = (1 << 256) - 1
LENGTH_DOMAIN: Domain = (0, UINT256_MAX)

# Enumeration budget for the exact mul/mod cases.
EXACT_BUDGET = 4096


@dataclass(frozen=True)
class Interval:
    lo: Optional[int] = None
    hi: Optional[int] = None

    def __post_init__(self):
        if (self.lo is None) != (self.hi is None):
            raise ValueError("half-bottom interval")
        if self.lo is not None and self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]; use BOTTOM")

    @staticmethod
    def of(lo: int, hi: int) -> "Interval":
        return Interval(lo, hi) if lo <= hi else BOTTOM

    @staticmethod
    def const(v: int) -> "Interval":
        return Interval(v, v)

    @property
    def is_bottom(self) -> bool:
        return self.lo is None

    @property
    def is_singleton(self) -> bool:
        return self.lo is not None and self.lo == self.hi

    def contains(self, v: int) -> bool:
        return self.lo is not None and self.lo <= v <= self.hi

    def join(self, other: "Interval") -> "Interval":
        if self.is_bottom:
            return other
        if other.is_bottom:
            return self
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def meet(self, other: "Interval") -> "Interval":
        if self.is_bottom or other.is_bottom:
            return BOTTOM
        return Interval.of(max(self.lo, other.lo), min(self.hi, other.hi))

    def leq(self, other: "Interval") -> bool:
        if self.is_bottom:
            return True
        if other.is_bottom:
            return False
        return other.lo <= self.lo and self.hi <= other.hi

    def clip(self, dom: Domain) -> "Interval":
        return self.meet(Interval(*dom))

    def __str__(self) -> str:
        return render(self)


BOTTOM = Interval()
BOOL_TOP = Interval(0, 1)
TRUE = Interval(1, 1)
FALSE = Interval(0, 0)


def render(iv: Interval, ascii_only: bool = False) -> str:
    """`[lo, hi]`; the uint256 maximum prints as `max`, Bottom as `⊥`."""
    if iv.is_bottom:
        return "bottom" if ascii_only else "⊥"

    def b(v: int) -> str:
        return "max" if v == UINT256_MAX else str(v)

    return f"[{b(iv.lo)}, {b(iv.hi)}]"


def widen_interval(old: Interval, new: Interval, thresholds: Iterable[int], dom: Domain) -> Interval:
    if old.is_bottom:
        return new
    if new.is_bottom:
        return old
    ts = sorted({t for t in thresholds if dom[0] <= t <= dom[1]} | _range_set(dom))
    lo, hi = new.lo, new.hi
    if new.lo < old.lo:
        lo = max(t for t in ts if t <= new.lo)
    if new.hi > old.hi:
        hi = min(t for t in ts if t >= new.hi)
    return Interval(lo, hi)


def _range_set(dom: Domain) -> set:
    return {t for t in (dom[0], 0, 1, dom[1]) if dom[0] <= t <= dom[1]}


# --- arithmetic ------------------------------------------------------------------------


def _trunc_div(x: int, y: int) -> int:
    q = abs(x) // abs(y)
    return q if (x >= 0) == (y > 0) else -q


def _trunc_mod(x: int, y: int) -> int:
    return x - y * _trunc_div(x, y)


def binop_in_domain(op: str, a: Interval, b: Interval, dom: Domain) -> Tuple[Interval, bool, bool]:
    """Result interval, overflow possible, division by zero possible."""
    if a.is_bottom or b.is_bottom:
        return BOTTOM, False, False
    if op in ("add", "sub"):
        if op == "add":
            raw = Interval(a.lo + b.lo, a.hi + b.hi)
        else:
            raw = Interval(a.lo - b.hi, a.hi - b.lo)
        return raw.clip(dom), not raw.leq(Interval(*dom)), False
    if op == "mul":
        corners = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi]
        raw = Interval(min(corners), max(corners))
        overflow = not raw.leq(Interval(*dom))
        if not overflow:
            return raw, False, False
        return _mul_feasible(a, b, dom), True, False
    if op in ("div", "mod"):
        divzero = b.contains(0)
        parts = []
        if b.lo < 0:
            parts.append(Interval(b.lo, min(b.hi, -1)))
        if b.hi > 0:
            parts.append(Interval(max(b.lo, 1), b.hi))
        if op == "div":
            res, overflow = BOTTOM, False
            for p in parts:
                r, o = _div_part(a, p, dom)
                res, overflow = res.join(r), overflow or o
            return res, overflow, divzero
        res = BOTTOM
        for p in parts:
            res = res.join(_mod_part(a, p))
        return res.clip(dom), False, divzero
    raise ValueError(f"unknown arithmetic operator {op}")


def _mul_feasible(a: Interval, b: Interval, dom: Domain) -> Interval:
    """Hull of the in-domain products; exact when one factor range is small."""
    if a.hi - a.lo > b.hi - b.lo:
        a, b = b, a
    if a.hi - a.lo >= EXACT_BUDGET:
        corners = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi]
        return Interval(min(corners), max(corners)).clip(dom)
    lo_d, hi_d = dom
    res = BOTTOM
    for x in range(a.lo, a.hi + 1):
        if x == 0:
            if lo_d <= 0 <= hi_d:
                res = res.join(FALSE)
            continue
        # y range keeping x*y inside the domain
        if x > 0:
            ylo, yhi = _ceil_div(lo_d, x), _floor_div(hi_d, x)
        else:
            ylo, yhi = _ceil_div(hi_d, x), _floor_div(lo_d, x)
        ylo, yhi = max(ylo, b.lo), min(yhi, b.hi)
        if ylo > yhi:
            continue
        p, q = x * ylo, x * yhi
        res = res.join(Interval(min(p, q), max(p, q)))
    return res


def _floor_div(n: int, d: int) -> int:
    return n // d


def _ceil_div(n: int, d: int) -> int:
    return -((-n) // d)


def _div_part(a: Interval, b: Interval, dom: Domain) -> Tuple[Interval, bool]:
    """Truncating division by a divisor range of one sign (0 excluded)."""
    overflow = False
    pieces = []
    if b.contains(-1) and a.contains(dom[0]) and -dom[0] > dom[1]:
        # Tmin / -1 overflows; treat that single point separately.
        overflow = True
        if a.lo < a.hi:
            pieces.append((Interval(a.lo + 1, a.hi), Interval(-1, -1)))
        if b.lo < -1:
            pieces.append((a, Interval(b.lo, -2)))
    else:
        pieces.append((a, b))
    res = BOTTOM
    for pa, pb in pieces:
        qs = [_trunc_div(x, y) for x in (pa.lo, pa.hi) for y in (pb.lo, pb.hi)]
        res = res.join(Interval(min(qs), max(qs)))
    return res.clip(dom), overflow


def _mod_range(p: int, q: int, m: int) -> Interval:
    """Hull of x mod m (m > 0) over 0 <= p <= x <= q."""
    if p // m == q // m:
        return Interval(p % m, q % m)
    return Interval(0, min(m - 1, q))


def _mod_part(a: Interval, b: Interval) -> Interval:
    """Hull of truncating x % y for x in a, y in b (b has one sign, 0 excluded)."""
    mlo, mhi = (b.lo, b.hi) if b.lo > 0 else (-b.hi, -b.lo)
    res = BOTTOM
    pos = a.meet(Interval(0, max(a.hi, 0))) if a.hi >= 0 else BOTTOM
    neg = a.meet(Interval(min(a.lo, -1), -1)) if a.lo < 0 else BOTTOM
    if mhi - mlo < EXACT_BUDGET:
        for m in range(mlo, mhi + 1):
            if not pos.is_bottom:
                res = res.join(_mod_range(pos.lo, pos.hi, m))
            if not neg.is_bottom:
                r = _mod_range(-neg.hi, -neg.lo, m)
                res = res.join(Interval(-r.hi, -r.lo))
        return res
    # Large divisor ranges: |x % y| <= min(|x|, |y| - 1).
    if not pos.is_bottom:
        if pos.hi < mlo:
            res = res.join(pos)
        else:
            res = res.join(Interval(0, min(pos.hi, mhi - 1)))
    if not neg.is_bottom:
        if -neg.lo < mlo:
            res = res.join(neg)
        else:
            res = res.join(Interval(-min(-neg.lo, mhi - 1), 0))
    return res


def interval_binop(op: str, a: Interval, b: Interval, result_type) -> Tuple[Interval, bool, bool]:
    """Checked arithmetic over intervals; `result_type` is a MiniSolType or a (lo, hi) domain."""
    dom = result_type if isinstance(result_type, tuple) else bounds(result_type)
    return binop_in_domain(op, a, b, dom)


def interval_compare(op: str, a: Interval, b: Interval) -> Interval:
    """Three-valued comparison: [1,1] always, [0,0] never, [0,1] otherwise."""
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    if op in ("gt", "ge"):
        a, b, op = b, a, {"gt": "lt", "ge": "le"}[op]
    if op == "lt":
        always, never = a.hi < b.lo, a.lo >= b.hi
    elif op == "le":
        always, never = a.hi <= b.lo, a.lo > b.hi
    elif op in ("eq", "ne"):
        always = a.is_singleton and b.is_singleton and a.lo == b.lo
        never = a.meet(b).is_bottom
        if op == "ne":
            always, never = never, always
    else:
        raise ValueError(f"unknown comparison {op}")
    if always:
        return TRUE
    if never:
        return FALSE
    return BOOL_TOP


def interval_logic(op: str, a: Interval, b: Optional[Interval] = None) -> Interval:
    """and / or / not over bool intervals."""
    if a.is_bottom or (b is not None and b.is_bottom):
        return BOTTOM
    if op == "not":
        return Interval(1 - a.hi, 1 - a.lo)
    if op == "and":
        return Interval(a.lo * b.lo, a.hi * b.hi)
    if op == "or":
        return Interval(max(a.lo, b.lo), max(a.hi, b.hi))
    raise ValueError(f"unknown logical operator {op}")


def interval_neg(a: Interval, dom: Domain) -> Tuple[Interval, bool]:
    if a.is_bottom:
        return BOTTOM, False
    raw = Interval(-a.hi, -a.lo)
    return raw.clip(dom), not raw.leq(Interval(*dom))


# --- abstract values -------------------------------------------------------------------


@dataclass(frozen=True)
class Scalar:
    iv: Interval
    dom: Domain
    assigned: bool = False


@dataclass(frozen=True)
class ArrayValue:
    length: Interval
    elem: "AbstractValue"
    assigned: bool = False


@dataclass(frozen=True)
class MappingValue:
    value: "AbstractValue"  # summary of every entry, absent keys included
    assigned: bool = False


@dataclass(frozen=True)
class StructValue:
    fields: Tuple[Tuple[str, "AbstractValue"], ...]
    assigned: bool = False

    def field(self, name: str) -> "AbstractValue":
        for n, v in self.fields:
            if n == name:
                return v
        raise KeyError(name)

    def with_field(self, name: str, value: "AbstractValue") -> "StructValue":
        return replace(self, fields=tuple((n, value if n == name else v) for n, v in self.fields))


AbstractValue = Union[Scalar, ArrayValue, MappingValue, StructValue]


class ShapeError(TypeError):
    """Two abstract values of different shapes were combined (an engine bug)."""


def _same_shape(a, b) -> None:
    if type(a) is not type(b):
        raise ShapeError(f"{type(a).__name__} vs {type(b).__name__}")


def join(a: AbstractValue, b: AbstractValue) -> AbstractValue:
    _same_shape(a, b)
    assigned = a.assigned or b.assigned
    if isinstance(a, Scalar):
        return Scalar(a.iv.join(b.iv), a.dom, assigned)
    if isinstance(a, ArrayValue):
        return ArrayValue(a.length.join(b.length), join(a.elem, b.elem), assigned)
    if isinstance(a, MappingValue):
        return MappingValue(join(a.value, b.value), assigned)
    return StructValue(tuple((n, join(x, y)) for (n, x), (_, y) in zip(a.fields, b.fields)), assigned)


def meet(a: AbstractValue, b: AbstractValue) -> AbstractValue:
    _same_shape(a, b)
    assigned = a.assigned and b.assigned
    if isinstance(a, Scalar):
        return Scalar(a.iv.meet(b.iv), a.dom, assigned)
    if isinstance(a, ArrayValue):
        return ArrayValue(a.length.meet(b.length), meet(a.elem, b.elem), assigned)
    if isinstance(a, MappingValue):
        return MappingValue(meet(a.value, b.value), assigned)
    return StructValue(tuple((n, meet(x, y)) for (n, x), (_, y) in zip(a.fields, b.fields)), assigned)


def leq(a: AbstractValue, b: AbstractValue) -> bool:
    _same_shape(a, b)
    if a.assigned and not b.assigned:
        return False
    if isinstance(a, Scalar):
        return a.iv.leq(b.iv)
    if isinstance(a, ArrayValue):
        return a.length.leq(b.length) and leq(a.elem, b.elem)
    if isinstance(a, MappingValue):
        return leq(a.value, b.value)
    return all(leq(x, y) for (_, x), (_, y) in zip(a.fields, b.fields))


def widen(old: AbstractValue, new: AbstractValue, thresholds: Iterable[int] = ()) -> AbstractValue:
    _same_shape(old, new)
    thresholds = tuple(thresholds)
    assigned = old.assigned or new.assigned
    if isinstance(old, Scalar):
        return Scalar(widen_interval(old.iv, new.iv, thresholds, old.dom), old.dom, assigned)
    if isinstance(old, ArrayValue):
        return ArrayValue(widen_interval(old.length, new.length, thresholds, LENGTH_DOMAIN),
                          widen(old.elem, new.elem, thresholds), assigned)
    if isinstance(old, MappingValue):
        return MappingValue(widen(old.value, new.value, thresholds), assigned)
    return StructValue(tuple((n, widen(x, y, thresholds)) for (n, x), (_, y) in zip(old.fields, new.fields)),
                       assigned)


def has_bottom_scalar(v: AbstractValue) -> bool:
    return isinstance(v, Scalar) and v.iv.is_bottom


def with_assigned(v: AbstractValue, flag: bool = True) -> AbstractValue:
    return v if v.assigned == flag else replace(v, assigned=flag)


def default_value(ty: MiniSolType) -> AbstractValue:
    """The zero value Solidity gives to fresh storage and locals."""
    if is_scalar(ty):
        return Scalar(FALSE, bounds(ty))
    if isinstance(ty, ArrayType):
        if ty.length is None:
            return ArrayValue(FALSE, bottom_value(ty.elem))
        return ArrayValue(Interval.const(ty.length), default_value(ty.elem))
    if isinstance(ty, MappingType):
        return MappingValue(default_value(ty.value))
    if isinstance(ty, StructType):
        return StructValue(tuple((n, default_value(t)) for n, t in ty.fields))
    raise TypeError(f"no abstract value for {ty}")


def top_value(ty: MiniSolType, assigned: bool = False) -> AbstractValue:
    """Every value the type admits."""
    if is_scalar(ty):
        return Scalar(Interval(*bounds(ty)), bounds(ty), assigned)
    if isinstance(ty, ArrayType):
        length = Interval(0, UINT256_MAX) if ty.length is None else Interval.const(ty.length)
        return ArrayValue(length, top_value(ty.elem, assigned), assigned)
    if isinstance(ty, MappingType):
        return MappingValue(top_value(ty.value, assigned), assigned)
    if isinstance(ty, StructType):
        return StructValue(tuple((n, top_value(t, assigned)) for n, t in ty.fields), assigned)
    raise TypeError(f"no abstract value for {ty}")


def bottom_value(ty: MiniSolType) -> AbstractValue:
    """Shape of `ty` with every interval empty (no concrete value)."""
    if is_scalar(ty):
        return Scalar(BOTTOM, bounds(ty))
    if isinstance(ty, ArrayType):
        return ArrayValue(BOTTOM, bottom_value(ty.elem))
    if isinstance(ty, MappingType):
        return MappingValue(bottom_value(ty.value))
    if isinstance(ty, StructType):
        return StructValue(tuple((n, bottom_value(t)) for n, t in ty.fields))
    raise TypeError(f"no abstract value for {ty}")


def coerce(v: AbstractValue, ty: MiniSolType) -> AbstractValue:
    """Re-home a value into the domains of `ty` (implicit widening conversions)."""
    if isinstance(v, Scalar):
        dom = bounds(ty)
        return v if v.dom == dom else Scalar(v.iv.clip(dom), dom, v.assigned)
    if isinstance(v, ArrayValue):
        assert isinstance(ty, ArrayType)
        return ArrayValue(v.length, coerce(v.elem, ty.elem), v.assigned)
    if isinstance(v, MappingValue):
        return MappingValue(coerce(v.value, ty.value), v.assigned)
    return StructValue(tuple((n, coerce(x, t)) for (n, x), (_, t) in zip(v.fields, ty.fields)), v.assigned)


def scalar(iv: Interval, ty: MiniSolType = UINT256, assigned: bool = True) -> Scalar:
    return Scalar(iv, bounds(ty), assigned)
