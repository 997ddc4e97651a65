"""Exhaustive brute-force check of interval arithmetic and comparisons.

Every interval with bounds in a small value range is paired with every other one.
The reference result is the set of concrete `x op y` values, built incrementally
(one new row or column at a time) so the whole sweep stays cheap.
"""

import operator

import pytest

from minisol_iv.domain import Interval, interval_binop, interval_compare

ARITH = ("add", "sub", "mul", "div", "mod")
COMPARE = ("lt", "le", "gt", "ge", "eq", "ne")


def _tdiv(x, y):
    q = abs(x) // abs(y)
    return q if (x >= 0) == (y > 0) else -q


CONCRETE = {
    "add": operator.add, "sub": operator.sub, "mul": operator.mul,
    "div": _tdiv, "mod": lambda x, y: x - y * _tdiv(x, y),
    "lt": operator.lt, "le": operator.le, "gt": operator.gt, "ge": operator.ge, "eq": operator.eq, "ne": operator.ne,
}

# Summary of a set of concrete outcomes: (min, max, overflow seen, zero divisor seen)
EMPTY = (None, None, False, False)


def _merge(s, t):
    lo = t[0] if s[0] is None else s[0] if t[0] is None else min(s[0], t[0])
    hi = t[1] if s[1] is None else s[1] if t[1] is None else max(s[1], t[1])
    return lo, hi, s[2] or t[2], s[3] or t[3]


def _point(op, x, y, dom):
    if op in ("div", "mod") and y == 0:
        return None, None, False, True
    r = CONCRETE[op](x, y)
    if op in COMPARE:
        r = int(r)
    elif not dom[0] <= r <= dom[1]:
        return None, None, True, False
    return r, r, False, False


def brute_table(op, values, dom):
    """{(alo, ahi, blo, bhi): summary} for every pair of intervals over `values`."""
    n = len(values)
    # Row summaries: a single x against every interval b.
    row = {}
    for x in values:
        for i in range(n):
            acc = EMPTY
            for j in range(i, n):
                acc = _merge(acc, _point(op, x, values[j], dom))
                row[(x, i, j)] = acc
    table = {}
    for i in range(n):
        for bi in range(n):
            for bj in range(bi, n):
                acc = EMPTY
                for j in range(i, n):
                    acc = _merge(acc, row[(values[j], bi, bj)])
                    table[(values[i], values[j], values[bi], values[bj])] = acc
    return table


def mismatches_arith(op, values, dom):
    bad = []
    for (alo, ahi, blo, bhi), (lo, hi, ovf, dz) in brute_table(op, values, dom).items():
        want = Interval() if lo is None else Interval(lo, hi)
        got = interval_binop(op, Interval(alo, ahi), Interval(blo, bhi), dom)
        if got != (want, ovf, dz):
            bad.append(((alo, ahi), (blo, bhi), got, (want, ovf, dz)))
    return bad


def mismatches_compare(op, values):
    bad = []
    for (alo, ahi, blo, bhi), (lo, hi, _, _) in brute_table(op, values, (0, 1)).items():
        want = Interval(lo, hi)
        got = interval_compare(op, Interval(alo, ahi), Interval(blo, bhi))
        if got != want:
            bad.append(((alo, ahi), (blo, bhi), got, want))
    return bad


SMALL_UNSIGNED = (list(range(0, 21)), (0, 255))


@pytest.mark.parametrize("op", ARITH)
def test_arith_exhaustive_0_to_20(op):
    values, dom = SMALL_UNSIGNED
    assert mismatches_arith(op, values, dom) == []


@pytest.mark.parametrize("op", COMPARE)
def test_compare_exhaustive_0_to_20(op):
    assert mismatches_compare(op, list(range(0, 21))) == []


@pytest.mark.parametrize("op", ARITH)
def test_arith_exhaustive_tight_domain(op):
    # The domain equals the value range, so every operator can overflow.
    assert mismatches_arith(op, list(range(0, 21)), (0, 20)) == []


@pytest.mark.parametrize("op", ARITH)
def test_arith_exhaustive_signed(op):
    # int4-like: truncating division, Tmin / -1 overflow, negative remainders.
    assert mismatches_arith(op, list(range(-8, 8)), (-8, 7)) == []


@pytest.mark.parametrize("op", COMPARE)
def test_compare_exhaustive_signed(op):
    assert mismatches_compare(op, list(range(-8, 8))) == []

