import pytest

from minisol_iv.domain import (
    BOTTOM, UINT256_MAX, ArrayValue, Interval, MappingValue, Scalar, ShapeError, StructValue, default_value,
    interval_binop, interval_compare, interval_logic, interval_neg, join, leq, meet, render, top_value, widen,
    widen_interval,
)
from minisol_iv.frontend.types import AddressType, ArrayType, BoolType, EnumType, IntType, MappingType, StructType

U256 = IntType(False, 256)
U8 = IntType(False, 8)
I8 = IntType(True, 8)
MAX = UINT256_MAX
iv = Interval


# --- interval arithmetic -----------------------------------------------------------------


@pytest.mark.parametrize("op,a,b,want", [
    ("add", iv(1, 3), iv(2, 5), (iv(3, 8), False, False)),
    ("div", iv(10, 10), iv(2, 5), (iv(2, 5), False, False)),
    ("div", iv(7, 9), iv(0, 3), (iv(2, 9), False, True)),
    ("mul", iv(2**255, 2**255), iv(2, 2), (BOTTOM, True, False)),
    ("mod", iv(5, 5), iv(3, 3), (iv(2, 2), False, False)),
    ("div", iv(1, 5), iv(0, 0), (BOTTOM, False, True)),
    ("sub", iv(0, 3), iv(1, 1), (iv(0, 2), True, False)),
    ("add", iv(MAX - 1, MAX), iv(1, 1), (iv(MAX, MAX), True, False)),
])
def test_binop_examples(op, a, b, want):
    assert interval_binop(op, a, b, U256) == want


def test_binop_bottom_propagates():
    assert interval_binop("add", BOTTOM, iv(1, 1), U256) == (BOTTOM, False, False)


def test_signed_division_overflow():
    # int8: -128 / -1 does not fit.
    assert interval_binop("div", iv(-128, -128), iv(-1, -1), I8) == (BOTTOM, True, False)
    assert interval_binop("div", iv(-128, -127), iv(-1, -1), I8) == (iv(127, 127), True, False)


def test_large_mul_stays_sound():
    a, b = iv(3, 2**200), iv(5, 2**100)
    got, ovf, _ = interval_binop("mul", a, b, U256)
    assert got.contains(15) and got.contains(2**200 * 2**50) and ovf


@pytest.mark.parametrize("op,a,b,want", [
    ("lt", iv(0, MAX), iv(0, 0), iv(0, 0)),
    ("ge", iv(0, MAX), iv(0, 0), iv(1, 1)),
    ("eq", iv(3, 5), iv(4, 6), iv(0, 1)),
    ("eq", iv(4, 4), iv(4, 4), iv(1, 1)),
    ("ne", iv(1, 2), iv(3, 4), iv(1, 1)),
    ("gt", iv(5, 9), iv(0, 4), iv(1, 1)),
])
def test_compare_examples(op, a, b, want):
    assert interval_compare(op, a, b) == want


def test_logic():
    t, f, u = iv(1, 1), iv(0, 0), iv(0, 1)
    assert interval_logic("and", t, u) == u and interval_logic("and", f, u) == f
    assert interval_logic("or", t, u) == t and interval_logic("or", f, f) == f
    assert interval_logic("not", u) == u and interval_logic("not", t) == f


def test_neg():
    assert interval_neg(iv(-128, 5), (-128, 127)) == (iv(-5, 127), True)
    assert interval_neg(iv(1, 2), (-128, 127)) == (iv(-2, -1), False)


# --- lattice examples --------------------------------------------------------------------


def s(lo, hi, dom=(0, MAX)):
    return Scalar(iv(lo, hi), dom)


def test_join_meet_examples():
    assert iv(1, 3).join(iv(5, 9)) == iv(1, 9)
    assert iv(1, 5).meet(iv(4, 9)) == iv(4, 5)
    assert iv(1, 2).meet(iv(5, 6)) == BOTTOM
    assert BOTTOM.join(iv(2, 2)) == iv(2, 2)
    assert BOTTOM.leq(iv(0, 0)) and not iv(0, 1).leq(iv(0, 0))


def test_assigned_flag_combines():
    a, b = Scalar(iv(0, 0), (0, 9), True), Scalar(iv(1, 1), (0, 9), False)
    assert join(a, b).assigned and not meet(a, b).assigned
    assert not leq(a, b) and leq(b, join(a, b))


def test_shape_mismatch_is_an_error():
    with pytest.raises(ShapeError):
        join(s(0, 0), MappingValue(s(0, 0)))


def test_composite_join_recurses():
    a = StructValue((("x", s(0, 1)), ("ys", ArrayValue(iv(0, 0), s(0, 0)))))
    b = StructValue((("x", s(5, 5)), ("ys", ArrayValue(iv(3, 3), s(7, 9)))))
    got = join(a, b)
    assert got.field("x").iv == iv(0, 5)
    assert got.field("ys").length == iv(0, 3) and got.field("ys").elem.iv == iv(0, 9)


# --- widening ----------------------------------------------------------------------------


DOM = (0, MAX)


def test_widen_examples():
    assert widen_interval(iv(0, 0), iv(0, 1), {0, 1, MAX}, DOM) == iv(0, 1)
    assert widen_interval(iv(0, 1), iv(0, 2), (), DOM) == iv(0, MAX)
    assert widen_interval(iv(5, 10), iv(5, 10), (), DOM) == iv(5, 10)


def test_widen_uses_harvested_literal():
    assert widen_interval(iv(0, 1), iv(0, 2), {10}, DOM) == iv(0, 10)
    assert widen_interval(iv(0, 10), iv(0, 11), {10}, DOM) == iv(0, MAX)


def test_widen_lower_bound_signed():
    assert widen_interval(iv(-1, 5), iv(-3, 5), {-2}, (-128, 127)) == iv(-128, 5)
    assert widen_interval(iv(3, 5), iv(2, 5), (), (-128, 127)) == iv(1, 5)


def test_widen_value_recurses():
    old = MappingValue(s(0, 1))
    assert widen(old, MappingValue(s(0, 2))).value.iv == iv(0, MAX)


# --- defaults ----------------------------------------------------------------------------


def test_default_values():
    assert default_value(AddressType()) == Scalar(iv(0, 0), (0, 2**160 - 1), False)
    assert default_value(U256).iv == iv(0, 0)
    dyn = default_value(ArrayType(U8, None))
    assert dyn.length == iv(0, 0) and dyn.elem.iv.is_bottom
    fixed = default_value(ArrayType(U8, 3))
    assert fixed.length == iv(3, 3) and fixed.elem.iv == iv(0, 0)
    st = default_value(StructType("S", (("a", BoolType()), ("m", MappingType(U256, U8)))))
    assert st.field("a").iv == iv(0, 0) and st.field("m").value.iv == iv(0, 0)


def test_top_values():
    enum3 = EnumType("Options", ("A", "B", "C"))
    assert top_value(enum3).iv == iv(0, 2)
    assert top_value(enum3, True).assigned
    assert top_value(I8).iv == iv(-128, 127)
    assert top_value(ArrayType(U8, None)).length == iv(0, MAX)


def test_render():
    assert render(iv(0, MAX)) == "[0, max]"
    assert render(iv(-3, 2)) == "[-3, 2]"
    assert render(BOTTOM) == "⊥" and render(BOTTOM, ascii_only=True) == "bottom"
