"""Reduction relations, strategies, traces, and stuck-state analysis."""
import pytest

from lmt.corpus import by_name
from lmt.parser import parse_program
from lmt.printer import to_text
from lmt.reduction import (InvariantViolation, ReductionError, Trace,
                           canon_relation, canon_strategy, classify_stuck,
                           enumerate_redexes, intermediate_programs,
                           read_trace, replay, run, write_trace)
from lmt.syntax import struct_equiv


def rules(res):
    return [s.rule for s in res.trace.steps]


# the get/apply/set sample program

def test_sample_cbv_gets_then_unboxes():
    e = by_name("get-apply-set")
    res = run(e.program(), e.region_depths(), "cbv", "cbv")
    assert rules(res) == ["get", "bang"]
    assert res.halted
    assert to_text(res.final) == r"set(#r, !(\x. x *) $(\x. x *))"


def test_sample_cbv_stuck_state_is_a_violation():
    # the leftover application has a !-term in function position; the
    # stuck shape is exactly why the program cannot be typed
    e = by_name("get-apply-set")
    res = run(e.program(), e.region_depths(), "cbv", "cbv")
    rep = classify_stuck(res.final)
    assert not rep.ok
    assert len(rep.violations) == 1


def test_sample_full_run_writes_back():
    e = by_name("get-apply-set")
    res = run(e.program(), e.region_depths(), "full", "cbv")
    assert rules(res) == ["get", "bang", "set"]
    assert to_text(res.final) == r"* || #r <= !(\x. x *) $(\x. x *)"
    assert res.halted


# rule-level behavior

def test_gc_erases_unit_thread():
    res = run(parse_program("* || *"), {}, "full", "cbv")
    assert rules(res) == ["gc"]
    assert to_text(res.final) == "*"


def test_no_gc_for_last_non_store_thread():
    res = run(parse_program("* || #r <= *"), {"r": 0}, "full", "cbv")
    assert rules(res) == []
    assert res.halted
    assert to_text(res.final) == "* || #r <= *"


def test_set_appends_a_store():
    res = run(parse_program("set(#r, *) || #r <= !*"), {"r": 0},
              "full", "cbv")
    assert rules(res) == ["set"]
    # both stores survive; the chain is kept in canonical order
    assert to_text(res.final) == "* || #r <= !* || #r <= *"


def test_set_waits_for_closed_argument():
    assert enumerate_redexes(parse_program("set(#r, x)"), {"r": 0},
                             "full") == []


def test_get_cannot_consume_its_own_store():
    p = parse_program("#r <= get(#r)")
    assert enumerate_redexes(p, {"r": 0}, "full") == []
    res = run(p, {"r": 0}, "full", "shallow")
    assert res.halted and rules(res) == []


def test_get_from_sibling_store():
    p = parse_program("get(#r) || #r <= get(#r)")
    res = run(p, {"r": 0}, "full", "shallow")
    assert rules(res) == ["get"]
    assert to_text(res.final) == "get(#r)"
    rep = classify_stuck(res.final)
    assert rep.ok and rep.blocked[0][1] == "r"


def test_store_body_may_read_other_store():
    p = parse_program("#r <= get(#s) || #s <= !*")
    res = run(p, {"r": 0, "s": 0}, "full", "shallow")
    assert rules(res) == ["get"]
    assert to_text(res.final) == "#r <= !*"


def test_one_get_redex_per_matching_store():
    p = parse_program("get(#r) || #r <= * || #r <= !*")
    rx = enumerate_redexes(p, {"r": 0}, "full")
    assert [x.rule for x in rx] == ["get", "get"]
    assert len({x.store_addr for x in rx}) == 2


# relations form a hierarchy

def test_relation_hierarchy():
    p = parse_program(r"let !x = !((\y. y) *) in !x")
    full = enumerate_redexes(p, {}, "full")
    outer = enumerate_redexes(p, {}, "outer_bang")
    cbv = enumerate_redexes(p, {}, "cbv")
    assert [(x.rule, x.depth) for x in full] == [("bang", 0), ("beta", 1)]
    assert [(x.rule, x.depth) for x in outer] == [("bang", 0)]
    assert cbv == []


def test_outer_bang_keeps_bang_interiors_frozen():
    # the beta lives inside a !-term, visible to the full relation only
    p = parse_program(r"!((\y. y) *)")
    assert enumerate_redexes(p, {}, "full")[0].rule == "beta"
    assert enumerate_redexes(p, {}, "outer_bang") == []


# strategies

def test_shallow_and_deep_orders():
    p = parse_program(r"let !x = !((\y. y) *) in !x")
    sh = run(p, {}, "full", "shallow")
    dp = run(p, {}, "full", "deepfirst")
    assert [(s.rule, s.depth) for s in sh.trace.steps] == \
        [("bang", 0), ("beta", 1)]
    assert [(s.rule, s.depth) for s in dp.trace.steps] == \
        [("beta", 1), ("bang", 0)]
    assert to_text(sh.final) == to_text(dp.final) == "!*"


def test_random_strategy_is_seed_deterministic():
    p = parse_program(r"let !x = !((\y. y) *) in !x")
    r1 = run(p, {}, "full", "random", seed=7)
    r2 = run(p, {}, "full", "random", seed=7)
    key = lambda r: [(s.rule, s.addr, s.program) for s in r.trace.steps]
    assert key(r1) == key(r2)
    assert [s.nrand for s in r1.trace.steps] == [1, 2]


def test_fuel_exhaustion_reported():
    p = parse_program(r"let !x = !((\y. y) *) in !x")
    res = run(p, {}, "full", "shallow", fuel=1)
    assert len(res.trace.steps) == 1
    assert not res.halted


# cbv syntax gate

def test_cbv_rejects_bang_over_non_value():
    p = parse_program(r"!((\y. y) *)")
    with pytest.raises(ReductionError, match="!-terms over values"):
        run(p, {}, "full", "cbv")


def test_cbv_rejects_non_value_store():
    p = parse_program("#r <= get(#r)")
    with pytest.raises(ReductionError, match="stores to hold values"):
        run(p, {"r": 0}, "cbv", "shallow")


def test_typing_scaffolding_must_be_erased():
    p = parse_program("gen t. *")
    with pytest.raises(ReductionError, match="erase annotations"):
        enumerate_redexes(p, {}, "full")


# relation and strategy aliases

def test_canonical_names():
    assert canon_relation("outer") == "outer_bang"
    assert canon_relation("f") == "outer_bang"
    assert canon_relation("v") == "cbv"
    assert canon_strategy("cbv_leftmost") == "cbv"
    assert canon_strategy("shallow_first") == "shallow"
    assert canon_strategy("deep_first") == "deepfirst"
    with pytest.raises(ReductionError):
        canon_relation("innermost")
    with pytest.raises(ReductionError):
        canon_strategy("eager")


# traces: persistence and replay

def test_trace_round_trip(tmp_path):
    e = by_name("get-apply-set")
    res = run(e.program(), e.region_depths(), "full", "cbv")
    path = tmp_path / "t.trace"
    write_trace(res.trace, str(path))
    back = read_trace(str(path))
    assert back.program == res.trace.program
    assert back.relation == "full" and back.strategy == "cbv"
    assert back.regions == {"r": 0}
    assert [(s.rule, s.addr, s.program) for s in back.steps] == \
        [(s.rule, s.addr, s.program) for s in res.trace.steps]
    assert struct_equiv(replay(back), res.final)


def test_replay_verifies_recorded_programs():
    e = by_name("get-apply-set")
    res = run(e.program(), e.region_depths(), "full", "cbv")
    res.trace.steps[1].program = "*"
    with pytest.raises(ReductionError, match="differs from the recorded"):
        replay(res.trace)


def test_replay_rejects_unavailable_redex():
    e = by_name("get-apply-set")
    res = run(e.program(), e.region_depths(), "full", "cbv")
    res.trace.steps[0].rule = "beta"
    with pytest.raises(ReductionError, match="not available"):
        replay(res.trace)


def test_intermediate_programs_include_endpoints():
    e = by_name("get-apply-set")
    res = run(e.program(), e.region_depths(), "full", "cbv")
    progs = intermediate_programs(res.trace)
    assert len(progs) == len(res.trace.steps) + 1
    assert struct_equiv(progs[0], e.program())
    assert struct_equiv(progs[-1], res.final)


def test_empty_trace_file_rejected(tmp_path):
    path = tmp_path / "empty.trace"
    path.write_text("\n")
    with pytest.raises(ReductionError, match="empty trace"):
        read_trace(str(path))
