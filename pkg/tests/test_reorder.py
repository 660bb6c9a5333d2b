"""Commuting deep-first step pairs into shallow-first order."""
import pytest

from lmt.corpus import by_name
from lmt.reduction import ReductionError, replay, run
from lmt.reorder import (NoSwapFound, depth_profile, is_shallow_first,
                         reorder_shallow_first, swap_adjacent)
from lmt.syntax import struct_equiv


def test_depth_shift_trace_reorders():
    # cbv performs the deep read before the shallow gc; the reorder
    # commutes them without touching the same-depth prefix
    e = by_name("depth-shift")
    res = run(e.program(), e.region_depths(), "cbv", "cbv")
    assert [(s.rule, s.depth) for s in res.trace.steps] == \
        [("beta", 0), ("set", 0), ("get", 1), ("gc", 0)]
    out = reorder_shallow_first(res.trace)
    assert [(s.rule, s.depth) for s in out.steps] == \
        [("beta", 0), ("set", 0), ("gc", 0), ("get", 1)]
    assert is_shallow_first(out)
    assert len(out.steps) == len(res.trace.steps)
    assert struct_equiv(replay(out), res.final)


def test_same_depth_order_is_preserved():
    e = by_name("depth-shift")
    res = run(e.program(), e.region_depths(), "cbv", "cbv")
    out = reorder_shallow_first(res.trace)
    stable = [s.rule for s in res.trace.steps if s.depth == 0]
    assert [s.rule for s in out.steps if s.depth == 0] == stable


def test_deepfirst_chain_reorders_to_sorted_profile():
    e = by_name("doubling-chain-2")
    res = run(e.erased(), e.region_depths(), "outer_bang", "deepfirst")
    assert not is_shallow_first(res.trace)
    out = reorder_shallow_first(res.trace)
    assert is_shallow_first(out)
    assert depth_profile(out) == sorted(depth_profile(res.trace))
    assert len(out.steps) == len(res.trace.steps)
    assert struct_equiv(replay(out), res.final)
    assert out.relation == "outer_bang"


def test_shallow_strategy_needs_no_reordering():
    e = by_name("doubling-chain-2")
    res = run(e.erased(), e.region_depths(), "outer_bang", "shallow")
    assert is_shallow_first(res.trace)
    out = reorder_shallow_first(res.trace)
    assert depth_profile(out) == depth_profile(res.trace)


def test_swap_requires_deep_first_pair():
    e = by_name("depth-shift")
    res = run(e.program(), e.region_depths(), "cbv", "cbv")
    s0, s1 = res.trace.steps[0], res.trace.steps[1]
    with pytest.raises(ReductionError, match="deep-first pair"):
        swap_adjacent(e.program(), s0, s1, e.region_depths())


def test_no_swap_error_is_detectable():
    assert issubclass(NoSwapFound, Exception)


def test_reorder_leaves_original_untouched():
    e = by_name("doubling-chain-1")
    res = run(e.erased(), e.region_depths(), "outer_bang", "deepfirst")
    before = [(s.rule, s.addr, s.program) for s in res.trace.steps]
    reorder_shallow_first(res.trace)
    assert [(s.rule, s.addr, s.program) for s in res.trace.steps] == before
