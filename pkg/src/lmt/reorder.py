"""Reordering reduction sequences into shallow-first ones.

Two consecutive steps applied deep-first (depth i then depth j < i) can
be commuted without changing the end program (up to renaming); bubbling
every such pair sorts a whole trace into nondecreasing depth order of
the same length with an equivalent final program.

The swap itself is found by oracle search: enumerate the depth-j
redexes of the starting program, then the depth-i redexes of each
result, and pick the first pair that reproduces the original outcome.
Steps of equal depth are never swapped, which preserves the relative
order of same-region reads and writes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .printer import to_text
from .reduction import (Redex, ReductionError, Trace, TraceStep, apply_redex,
                        enumerate_redexes, intermediate_programs)
from .syntax import LmtError, Term, struct_equiv


class NoSwapFound(LmtError):
    pass


def _as_redex(s: TraceStep) -> Redex:
    return Redex(s.addr, s.rule, s.depth, s.store_addr or None)


def swap_adjacent(p: Term, s1: TraceStep, s2: TraceStep,
                  regions: dict[str, int],
                  relation: str = "outer_bang") -> tuple[TraceStep, TraceStep,
                                                         Term, Term]:
    """Given p -s1-> p1 -s2-> p2 with s1.depth > s2.depth, find steps
    t1 (at s2's depth) and t2 (at s1's depth) with p -t1-> q1 -t2-> q2
    and q2 equivalent to p2.  Returns (t1, t2, q1, q2)."""
    if s1.depth <= s2.depth:
        raise ReductionError("swap requires a deep-first pair "
                             f"({s1.depth} then {s2.depth})")
    p1 = apply_redex(p, _as_redex(s1))
    p2 = apply_redex(p1, _as_redex(s2))

    shallow = [r for r in enumerate_redexes(p, regions, relation)
               if r.depth == s2.depth]
    for r1 in shallow:
        q1 = apply_redex(p, r1)
        deep = [r for r in enumerate_redexes(q1, regions, relation)
                if r.depth == s1.depth]
        for r2 in deep:
            q2 = apply_redex(q1, r2)
            if struct_equiv(q2, p2):
                t1 = TraceStep(s1.step, r1.rule, r1.addr, r1.depth,
                               to_text(q1), r1.store_addr)
                t2 = TraceStep(s2.step, r2.rule, r2.addr, r2.depth,
                               to_text(q2), r2.store_addr)
                return t1, t2, q1, q2
    raise NoSwapFound(
        f"no commuting pair for steps {s1.rule}@{s1.addr} (depth "
        f"{s1.depth}) then {s2.rule}@{s2.addr} (depth {s2.depth})")


def depth_profile(trace: Trace) -> list[int]:
    return [s.depth for s in trace.steps]


def is_shallow_first(trace: Trace) -> bool:
    ds = depth_profile(trace)
    return all(a <= b for a, b in zip(ds, ds[1:]))


def reorder_shallow_first(trace: Trace) -> Trace:
    """Bubble the trace into nondecreasing depth order.  The result has
    the same length and an equivalent final program; its steps replay
    under the outer_bang relation."""
    progs = intermediate_programs(trace)
    steps = [TraceStep(s.step, s.rule, s.addr, s.depth, s.program,
                       s.store_addr) for s in trace.steps]
    n = len(steps)
    changed = True
    while changed:
        changed = False
        for k in range(n - 1):
            if steps[k].depth > steps[k + 1].depth:
                t1, t2, q1, q2 = swap_adjacent(progs[k], steps[k],
                                               steps[k + 1], trace.regions)
                old_after = steps[k + 1].program
                steps[k], steps[k + 1] = t1, t2
                progs[k + 1], progs[k + 2] = q1, q2
                if t2.program != old_after:
                    # same shape, different bound names: rebuild the tail
                    cur = q2
                    for j in range(k + 2, n):
                        cur = apply_redex(cur, _as_redex(steps[j]))
                        steps[j] = TraceStep(steps[j].step, steps[j].rule,
                                             steps[j].addr, steps[j].depth,
                                             to_text(cur),
                                             steps[j].store_addr)
                        progs[j + 1] = cur
                changed = True
        # repeat until no deep-first pair remains
    out = Trace(trace.program, "outer_bang", trace.strategy, trace.seed,
                trace.fuel, dict(trace.regions))
    for i, s in enumerate(steps):
        s.step = i
        out.steps.append(s)
    if not struct_equiv(progs[-1], intermediate_programs(trace)[-1]):
        raise ReductionError("reordering changed the final program")
    return out
