import pytest

from minisol_iv.cfg import loop_headers
from minisol_iv.domain import FALSE, TRUE, UINT256_MAX, Interval, Scalar
from minisol_iv.engine import (
    AbstractState, ConditionVerdict, DivisorInterval, EnumCastSource, IndexAccess, ValueTransferOfQuotient,
    refine_condition, run_worklist, transfer,
)
from minisol_iv.errors import IterationLimitExceeded

from conftest import CORPUS, analyze_fixture, analyze_source, fixture, wrap

MAX = UINT256_MAX
ADDR_MAX = 2**160 - 1


def iv_of(state, key):
    return state.get(key).iv


def events_of(result, cls):
    return [e for e in result.events if isinstance(e, cls)]


# --- transfer and refinement ---------------------------------------------------------------


def test_straight_line_constants():
    r = analyze_source(wrap("uint x = 1; uint y = x + 2;")).results["f"]
    assert iv_of(r.end, "y") == Interval(3, 3)


def test_contradiction_makes_bottom():
    r = analyze_fixture(fixture("vulnerable/tautology_contradiction.sol")).results["notGonnaExecute"]
    (ev,) = events_of(r, ConditionVerdict)
    assert ev.verdict == FALSE and ev.site == "require"
    assert not r.end.reachable


def test_tautology_verdict():
    r = analyze_fixture(fixture("vulnerable/tautology_contradiction.sol")).results["uselessAssertUint"]
    (ev,) = events_of(r, ConditionVerdict)
    assert ev.verdict == TRUE and r.end.reachable


def test_divisor_event_may_be_zero():
    r = analyze_fixture(fixture("vulnerable/division_by_zero.sol")).results["split"]
    (ev,) = events_of(r, DivisorInterval)
    assert ev.divisor == Interval(0, MAX) and ev.texts == ("msg.value", "recipients.length")


def test_require_refines_length():
    r = analyze_fixture(fixture("vulnerable/division_remainder.sol")).results["split"]
    (ev,) = events_of(r, DivisorInterval)
    assert ev.divisor == Interval(1, MAX)
    (q,) = events_of(r, ValueTransferOfQuotient)
    assert q.divisor == Interval(1, MAX)


def test_enum_cast_event_and_clip(vote_analysis):
    r = vote_analysis.results["vote"]
    first, second = events_of(r, EnumCastSource)
    assert first.source == Interval(0, MAX) and first.variants == 3
    assert first.assigned_to_variable and not second.assigned_to_variable
    assert r.end.get("_votes").value.iv == Interval(0, 2)
    assert iv_of(r.end, "option") == Interval(0, MAX)


def test_refine_equality_with_owner():
    ca = analyze_fixture(fixture("vulnerable/uninitialized_owner.sol"))
    r = ca.results["setFee"]
    assert iv_of(r.initial, "owner") == FALSE and not r.initial.get("owner").assigned
    assert iv_of(r.end, "msg.sender") == FALSE


def test_refine_condition_directly():
    r = analyze_source(wrap("require(a < 10);")).results["f"]
    g = r.cfg
    cond = g.blocks[0].instrs[-1].cond
    before = r.state_before(0, len(g.blocks[0].instrs) - 1)
    assert iv_of(refine_condition(before, cond, True, g), "a") == Interval(0, 9)
    assert iv_of(refine_condition(before, cond, False, g), "a") == Interval(10, MAX)


def test_condition_through_local_not_traced():
    # Only temporaries are traced back to their comparison; a named bool is opaque.
    r = analyze_source(wrap("bool c = a < 10; require(c);")).results["f"]
    assert iv_of(r.end, "c") == TRUE and iv_of(r.end, "a") == Interval(0, MAX)


def test_refine_negated_loop_exit():
    r = analyze_fixture(fixture("extra/counted_loop.sol")).results["count"]
    assert iv_of(r.end, "i") == Interval(10, 10)


@pytest.mark.parametrize("body,var,want", [
    ("require(a > 5 && b < 3);", "b", Interval(0, 2)),
    ("require(a > 5 && b < 3);", "a", Interval(6, MAX)),
    ("require(!(a >= 7));", "a", Interval(0, 6)),
    ("if (a < 4 || b < 4) { revert(); }", "a", Interval(4, MAX)),
    ("require(a == 3);", "a", Interval(3, 3)),
    ("require(a != 0);", "a", Interval(1, MAX)),
    ("require(b < 8); require(a <= b);", "a", Interval(0, 7)),
    ("require(a <= b); require(b < 8);", "a", Interval(0, MAX)),  # non-relational
])
def test_refinement_shapes(body, var, want):
    r = analyze_source(wrap(body)).results["f"]
    assert iv_of(r.end, var) == want


def test_short_circuit_right_operand_sees_left():
    src = "contract T { uint[4] xs; function f(uint n) external view returns (bool) { return n < 4 && xs[n] > 0; } }"
    r = analyze_source(src).results["f"]
    (acc,) = events_of(r, IndexAccess)
    assert acc.index == Interval(0, 3) and acc.length == Interval(4, 4)


def test_short_circuit_dead_right_operand():
    # `xs` is never written, so `n < xs.length` is false and `xs[n]` never runs.
    src = "contract T { uint[] xs; function f(uint n) external view returns (bool) { return n < xs.length && xs[n] > 0; } }"
    assert not events_of(analyze_source(src).results["f"], IndexAccess)


def test_index_event():
    r = analyze_fixture(fixture("vulnerable/unvalidated_index.sol")).results["getElement"]
    (acc,) = events_of(r, IndexAccess)
    assert acc.index == Interval(0, MAX) and acc.length == Interval(5, 5) and not acc.guarded


def test_loop_index_guarded_by_fact():
    r = analyze_fixture(fixture("vulnerable/division_by_zero.sol")).results["split"]
    assert all(a.guarded for a in events_of(r, IndexAccess))


def test_transfer_function_bottom_in_bottom_out():
    r = analyze_source(wrap("uint x = a + 1;")).results["f"]
    ins = r.cfg.blocks[0].instrs[0]
    out, evs = transfer(ins, AbstractState.bottom(), r.cfg)
    assert not out.reachable and evs == []


def test_checked_overflow_prunes():
    r = analyze_source(wrap("uint8 x = 200; uint8 y = x + uint8(b);")).results["f"]
    assert iv_of(r.end, "y") == Interval(200, 255)


# --- contract-level initialization --------------------------------------------------------


def test_array_initializer():
    r = analyze_fixture(fixture("vulnerable/unvalidated_index.sol")).results["getElement"]
    arr = r.initial.get("_array")
    assert arr.length == Interval(5, 5) and arr.elem.iv == Interval(10, 50)


def test_constructor_write_gives_top_owner():
    ca = analyze_fixture(fixture("extra/owner_initialized.sol"))
    owner = ca.results["setFee"].initial.get("owner")
    assert owner.iv == Interval(0, ADDR_MAX) and owner.assigned


def test_msg_value_by_payability():
    src = "contract T { function p() external payable { } function q() external { } }"
    ca = analyze_source(src)
    assert iv_of(ca.results["p"].initial, "msg.value") == Interval(0, MAX)
    assert iv_of(ca.results["q"].initial, "msg.value") == FALSE


def test_vote_end_state(vote_analysis):
    end = vote_analysis.results["vote"].end
    assert end.get("option") == Scalar(Interval(0, MAX), (0, MAX), True)


# --- fixpoint ------------------------------------------------------------------------------


def test_counted_loop_header():
    r = analyze_fixture(fixture("extra/counted_loop.sol")).results["count"]
    (h,) = loop_headers(r.cfg)
    assert iv_of(r.block_in[h], "i") == Interval(0, 10)
    assert 10 in r.thresholds and 11 in r.thresholds


def test_widening_stress():
    r = analyze_fixture(fixture("extra/widening_stress.sol")).results["spin"]
    (h,) = loop_headers(r.cfg)
    assert iv_of(r.block_in[h], "x").hi == MAX
    assert r.visits[h] <= 10 and r.widenings >= 1


def test_widen_delay_respected():
    r1 = analyze_fixture(fixture("extra/widening_stress.sol"), widen_delay=1).results["spin"]
    r5 = analyze_fixture(fixture("extra/widening_stress.sol"), widen_delay=5).results["spin"]
    (h,) = loop_headers(r1.cfg)
    assert r1.visits[h] < r5.visits[h]


def test_iteration_limit():
    r = analyze_fixture(fixture("extra/widening_stress.sol")).results["spin"]
    with pytest.raises(IterationLimitExceeded):
        run_worklist(r.cfg, r.initial, widen_delay=50, max_visits=5)


def test_bad_widen_delay():
    r = analyze_fixture(fixture("extra/widening_stress.sol")).results["spin"]
    with pytest.raises(ValueError):
        run_worklist(r.cfg, r.initial, widen_delay=0)


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_fixpoint_idempotent(path):
    for name, r in analyze_fixture(path).results.items():
        g = r.cfg
        for (b, i), (st_in, st_out) in r.instr_states.items():
            again, _ = transfer(g.blocks[b].instrs[i], st_in, g)
            assert again == st_out, (name, b, i)
        # Every block's in-state covers what its predecessors deliver.
        for e in g.edges:
            last = len(g.blocks[e.src].instrs)
            out = r.instr_states[(e.src, last - 1)][1] if last else r.block_in[e.src]
            if e.kind != "uncond":
                out = refine_condition(out, g.blocks[e.src].branch.cond, e.kind == "true", g)
            assert out.leq(r.block_in[e.dst]), (name, e)


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_analysis_deterministic(path):
    a, b = analyze_fixture(path), analyze_fixture(path)
    for name in a.results:
        assert a.results[name].events == b.results[name].events
        assert a.results[name].end == b.results[name].end


def test_events_only_from_reachable_points():
    r = analyze_source(wrap("require(a < 0); uint z = b / a;")).results["f"]
    assert not events_of(r, DivisorInterval)
