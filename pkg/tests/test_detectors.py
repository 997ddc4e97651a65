import pytest

from minisol_iv.detectors import (
    D1, D2, D3, D4, D5, D6, DETECTOR_IDS, DetectorConfig, Diagnostic, d1_tautology_contradiction,
    d2_division_by_zero, d5_unvalidated_input, d6_unmatched_type, detector_id, finalize, run_detectors,
)
from minisol_iv.domain import FALSE, TRUE, UINT256_MAX, Interval
from minisol_iv.engine import ConditionVerdict, DivisorInterval, EnumCastSource, IndexAccess
from minisol_iv.errors import ConfigError
from minisol_iv.frontend.span import Span

from conftest import PATCHED, VULNERABLE, analyze_fixture, analyze_source, fixture

MAX = UINT256_MAX
SP = Span(10, 20, 2, 3, 2, 13)


def findings(path, **kw):
    return run_detectors(analyze_fixture(path), DetectorConfig.parse(**kw))


def by_id(diags):
    return sorted((d.detector, d.severity) for d in diags)


# --- per-detector rules on synthetic events ----------------------------------------------


@pytest.mark.parametrize("verdict,want", [
    (FALSE, [("error", "contradiction: transaction can never complete")]),
    (TRUE, [("warning", "tautology: condition always true")]),
    (Interval(0, 1), []),
])
def test_d1_rules(verdict, want):
    ev = ConditionVerdict(SP, "require", verdict, "x > 5", None, (("x", Interval(0, MAX)),))
    assert [(d.severity, d.message) for d in d1_tautology_contradiction([ev])] == want


def test_d1_if_is_info_and_loops_ignored():
    evs = [ConditionVerdict(SP, "branch", TRUE, "c", "if"), ConditionVerdict(SP, "branch", TRUE, "c", "loop")]
    assert [d.severity for d in d1_tautology_contradiction(evs)] == ["info"]


@pytest.mark.parametrize("divisor,want", [
    (Interval(0, MAX), "warning"), (FALSE, "error"), (Interval(1, MAX), None), (Interval(), None),
])
def test_d2_rules(divisor, want):
    ev = DivisorInterval(SP, "div", Interval(0, 9), divisor, (None, None), ("a", "b"), (0, 0))
    got = d2_division_by_zero([ev])
    assert [d.severity for d in got] == ([want] if want else [])


@pytest.mark.parametrize("index,length,guarded,fires", [
    (Interval(0, MAX), Interval(5, 5), False, True),
    (Interval(0, 4), Interval(5, 5), False, False),
    (Interval(2, 2), Interval(5, 5), False, False),
    (Interval(0, 9), Interval(5, 9), False, True),
    (Interval(0, MAX), Interval(0, MAX), True, False),
])
def test_d5_rules(index, length, guarded, fires):
    ev = IndexAccess(SP, index, length, guarded, "i", "xs")
    assert bool(d5_unvalidated_input([ev])) == fires


@pytest.mark.parametrize("source,direct,fires", [
    (Interval(0, MAX), True, True), (Interval(0, 2), True, False), (Interval(1, 1), True, False),
    (Interval(0, MAX), False, False),
])
def test_d6_rules(source, direct, fires):
    ev = EnumCastSource(SP, source, 3, "Options", "option", direct)
    got = d6_unmatched_type([ev])
    assert bool(got) == fires
    if fires:
        assert dict(got[0].evidence) == {"option": "[0, max]", "enumRange": "[0, 2]"}


# --- corpus ------------------------------------------------------------------------------


EXPECTED = {
    "tautology_contradiction.sol": [(D1, "error"), (D1, "warning")],
    "division_by_zero.sol": [(D2, "warning")],
    "division_remainder.sol": [(D3, "info")],
    "uninitialized_owner.sol": [(D4, "error")],
    "unvalidated_index.sol": [(D5, "warning")],
    "unmatched_enum.sol": [(D6, "warning")],
}


@pytest.mark.parametrize("path", VULNERABLE, ids=lambda p: p.name)
def test_vulnerable_matrix(path):
    assert by_id(findings(path)) == sorted(EXPECTED[path.name])


def test_d4_message_and_evidence():
    (d,) = findings(fixture("vulnerable/uninitialized_owner.sol"))
    assert d.message == "owner stuck at zero address; onlyOwner can never pass for a real sender"
    assert dict(d.evidence) == {"owner": "[0, 0]"}
    assert d.span.line == 5


def test_d6_only_on_vote():
    (d,) = findings(fixture("vulnerable/unmatched_enum.sol"))
    assert d.function == "UnmatchedType.vote" and d.span.line == 9


@pytest.mark.parametrize("path", PATCHED, ids=lambda p: p.name)
def test_patched_suppresses(path):
    ids = {d.detector for d in findings(path)}
    assert not ids & {D2, D5, D6}


def test_d3_not_when_remainder_handled():
    assert findings(fixture("extra/remainder_handled.sol"), selection="d3") == []


def test_d3_exact_divisor_one():
    src = "contract C { function f(address payable r) external payable { r.transfer(msg.value / 1); } }"
    assert run_detectors(analyze_source(src)) == []


def test_d4_not_when_constructor_writes():
    assert findings(fixture("extra/owner_initialized.sol"), selection="d4") == []


def test_d4_unread_is_silent():
    src = "contract C { address private owner; function f() external pure returns (uint) { return 1; } }"
    assert run_detectors(analyze_source(src)) == []


def test_d4_warning_when_read_outside_checks():
    src = "contract C { uint private fee; function f() external view returns (uint) { return fee + 1; } }"
    (d,) = run_detectors(analyze_source(src))
    assert (d.detector, d.severity) == (D4, "warning") and "0" in d.message


def test_d5_guard_by_require():
    src = ("contract C { uint[] private xs = [1, 2, 3, 4, 5];"
           " function g(uint i) external view returns (uint) { require(i < 5); return xs[i]; } }")
    assert run_detectors(analyze_source(src)) == []


def test_d6_literal_cast_silent():
    src = "contract C { enum E { A, B, C } E private e; function f() external { e = E(1); } }"
    assert run_detectors(analyze_source(src)) == []


def test_empty_contract_clean():
    assert run_detectors(analyze_source("contract C { }")) == []


# --- config and ordering -----------------------------------------------------------------


def test_detector_id_parsing():
    assert detector_id("d1") == D1 and detector_id("D6") == D6 and detector_id(D3) == D3
    with pytest.raises(ConfigError):
        detector_id("d7")


def test_config_selection_and_overrides():
    cfg = DetectorConfig.parse("d1,d4", {"d4": "warning"})
    assert cfg.enabled == {D1, D4}
    (d,) = run_detectors(analyze_fixture(fixture("vulnerable/uninitialized_owner.sol")), cfg)
    assert d.severity == "warning"
    with pytest.raises(ConfigError):
        DetectorConfig.parse(None, {"d1": "fatal"})
    with pytest.raises(ConfigError):
        DetectorConfig.parse(" , ")
    assert set(DetectorConfig().enabled) == set(DETECTOR_IDS)


def test_finalize_dedupes_and_sorts():
    a = Diagnostic(D5, "warning", Span(30, 35, 3, 1, 3, 6), "m")
    b = Diagnostic(D2, "warning", Span(30, 35, 3, 1, 3, 6), "m")
    c = Diagnostic(D1, "error", Span(5, 8, 1, 6, 1, 9), "m")
    assert finalize([a, b, a, c]) == [c, b, a]


@pytest.mark.parametrize("path", VULNERABLE, ids=lambda p: p.name)
def test_spans_inside_source(path):
    size = len(path.read_bytes())
    for d in findings(path):
        assert 0 <= d.span.start < d.span.end <= size
