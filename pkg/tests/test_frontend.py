import pytest
from hypothesis import given, settings, strategies as st

from minisol_iv.errors import LexError, ParseError, ResolveError, TypeCheckError
from minisol_iv.frontend import TokenKind, parse_source, pretty, resolve, tokenize
from minisol_iv.frontend import ast
from minisol_iv.frontend.types import AddressType, BoolType, EnumType, IntType, bounds, elementary

from conftest import CORPUS, fixture


def kinds(src):
    return [(t.kind, t.lexeme) for t in tokenize(src) if t.kind is not TokenKind.EOF]


# --- lexer -------------------------------------------------------------------------------


def test_tokenize_declaration():
    assert kinds("uint x = 5;") == [
        (TokenKind.KEYWORD, "uint"), (TokenKind.IDENTIFIER, "x"), (TokenKind.PUNCT, "="),
        (TokenKind.INTEGER, "5"), (TokenKind.PUNCT, ";"),
    ]


def test_tokenize_member_division():
    assert [lex for _, lex in kinds("msg.value / recipients.length")] == [
        "msg", ".", "value", "/", "recipients", ".", "length"]
    assert kinds("msg.value")[0][0] is TokenKind.IDENTIFIER


def test_lex_error_offset():
    with pytest.raises(LexError) as exc:
        tokenize("uint@ y;")
    assert exc.value.span.start == 4


@pytest.mark.parametrize("src", ['string s = "abc', "/* never closed", "uint x = 0x;"])
def test_lex_errors(src):
    with pytest.raises(LexError):
        tokenize(src)


def test_comments_discarded():
    toks = kinds("a // line\n/* block\n */ b")
    assert [lex for _, lex in toks] == ["a", "b"]


def test_integer_literals_are_big():
    t = tokenize("115792089237316195423570985008687907853269984665640564039457584007913129639935 0xff 1_000")
    assert [x.value for x in t[:3]] == [2**256 - 1, 255, 1000]


@given(st.lists(st.sampled_from(["uint", "x", "=", "42", ";", "(", ")", "+", "&&", "a_b", "<=", "\n", "  "]),
                max_size=30))
@settings(max_examples=200)
def test_token_spans_increase(parts):
    src = " ".join(parts)
    toks = tokenize(src)
    for a, b in zip(toks, toks[1:]):
        assert a.span.end <= b.span.start
    for t in toks[:-1]:
        assert src[t.span.start:t.span.end] == t.lexeme


# --- parser ------------------------------------------------------------------------------


def test_parse_getter():
    unit = parse_source(fixture("vulnerable/unvalidated_index.sol").read_text())
    (c,) = unit.contracts
    (fn,) = c.functions
    assert fn.name == "getElement"
    idx = [n for n in fn.walk() if isinstance(n, ast.IndexExpr)]
    assert len(idx) == 1 and idx[0].base.name == "_array"


def test_parse_enum_contract():
    c = parse_source(fixture("vulnerable/unmatched_enum.sol").read_text()).contracts[0]
    assert len(c.enums) == 1 and len(c.enums[0].variants) == 3
    assert [type(v.type_name) for v in c.state_vars] == [ast.MappingTypeName, ast.MappingTypeName]
    assert len(c.functions) == 2


def test_parse_empty_contract():
    unit = parse_source("contract C { }")
    assert unit.contracts == [ast.ContractDef("C")]


@pytest.mark.parametrize("src", [
    "contract C is D { }",
    "contract C { event E(); }",
    "contract C { function f() external { uint x = ; } }",
    "contract C { function f() external { g(); } function g() internal { } }",
])
def test_parse_errors(src):
    with pytest.raises(ParseError):
        parse_source(src)


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_round_trip(path):
    unit = parse_source(path.read_text())
    again = parse_source(pretty(unit))
    assert again == unit
    assert pretty(again) == pretty(unit)


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_spans_inside_source(path):
    src = path.read_text()
    for node in parse_source(src).walk():
        assert 0 <= node.span.start <= node.span.end <= len(src.encode())


# --- resolver ----------------------------------------------------------------------------


def test_resolve_modifier_owner():
    unit = parse_source(fixture("vulnerable/uninitialized_owner.sol").read_text())
    resolve(unit)
    cond = unit.contracts[0].modifiers[0].body.stmts[0].cond
    assert isinstance(cond.ty, BoolType)
    assert cond.right.symbol.kind == "state" and isinstance(cond.right.symbol.ty, AddressType)


def test_resolve_enum_cast():
    unit = parse_source(fixture("vulnerable/unmatched_enum.sol").read_text())
    resolve(unit)
    cast = unit.contracts[0].functions[0].body.stmts[0].value
    assert cast.kind == "enum_cast"
    assert isinstance(cast.ty, EnumType) and len(cast.ty.variants) == 3
    assert cast.args[0].ty == IntType(False, 256)


def test_resolve_unknown_identifier():
    with pytest.raises(ResolveError):
        resolve(parse_source("contract C { function f() external returns (uint) { return undeclaredVar; } }"))


def test_resolve_type_mismatch():
    with pytest.raises(TypeCheckError):
        resolve(parse_source("contract C { function f(bool b) external returns (uint) { return b + 1; } }"))


def test_literal_adopts_operand_type():
    unit = parse_source("contract C { function f(uint8 x) external returns (bool) { return x > 300; } }")
    resolve(unit)


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_every_expression_typed(path):
    unit = parse_source(path.read_text())
    resolve(unit)
    for node in unit.walk():
        if isinstance(node, ast.Expr) and not isinstance(node, ast.StrLit):
            assert node.ty is not None, node


@pytest.mark.parametrize("name,lo,hi", [
    ("uint8", 0, 255), ("int8", -128, 127), ("uint", 0, 2**256 - 1), ("int256", -2**255, 2**255 - 1),
    ("bool", 0, 1), ("address", 0, 2**160 - 1),
])
def test_type_domains(name, lo, hi):
    assert bounds(elementary(name)) == (lo, hi)
