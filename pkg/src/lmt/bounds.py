"""Size measures under unfolding and the polynomial bound certificate.

The unfolding at depth i statically duplicates whatever a depth-i
let-! redex would copy, using a Bag node so the copies are counted
rather than materialized.  Its weighted size is a non-increasing
measure along depth-i steps, which yields the squaring bound per
level and the n^(2^d) certificate for shallow-first runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .depthcheck import check_wf
from .reduction import (Redex, ReductionError, RunResult, canon_relation,
                        canon_strategy, run)
from .syntax import (App, Bag, Bang, Get, Lam, LetBang, LetPara, LmtError,
                     Nu, Par, Para, RegionConst, Set, Store, Term, Unit, Var,
                     count_free, count_free_total, depth, size, weighted_size)


class BoundViolation(LmtError):
    def __init__(self, msg: str, report: Optional["BoundReport"] = None):
        super().__init__(msg)
        self.report = report


def unfold(p: Term, i: int, region_depths: dict[str, int]) -> Term:
    """Unfolding at depth i.  A modality consumes one level, a store
    label consumes the depth of its region, matching how redex depths
    are counted; copying stops below level 0.  At level 0 a let-! of a
    bang becomes a Bag of fo(x, body) copies of the bound term.

    The result contains Bag nodes and is a measure, not a program:
    feeding it back to the reduction engine is rejected there.
    """
    if i < 0:
        return p
    match p:
        case Var() | RegionConst() | Unit() | Get():
            return p
        case Lam(b, body):
            return Lam(b, unfold(body, i, region_depths), p.ann)
        case App(fn, arg):
            return App(unfold(fn, i, region_depths),
                       unfold(arg, i, region_depths))
        case Bang(body):
            return Bang(unfold(body, i - 1, region_depths)) if i > 0 else p
        case Para(body):
            return Para(unfold(body, i - 1, region_depths)) if i > 0 else p
        case LetBang(x, bound, body) if i == 0 and isinstance(bound, Bang):
            nb = unfold(body, 0, region_depths)
            k = count_free(nb, x)
            return LetBang(x, Bag(k, bound), nb)
        case LetBang(x, bound, body):
            return LetBang(x, unfold(bound, i, region_depths),
                           unfold(body, i, region_depths))
        case LetPara(x, bound, body):
            return LetPara(x, unfold(bound, i, region_depths),
                           unfold(body, i, region_depths))
        case Set(target, arg, loc):
            return Set(target, unfold(arg, i, region_depths), loc)
        case Store(target, body, loc):
            j = i - region_depths.get(target, 0)
            return Store(target, unfold(body, j, region_depths), loc)
        case Par(left, right):
            return Par(unfold(left, i, region_depths),
                       unfold(right, i, region_depths))
        case Nu() | Bag():
            raise LmtError(f"cannot unfold a {type(p).__name__} node")
    raise LmtError(f"cannot unfold {type(p).__name__}")


def check_unfold_monotone(p: Term, redex: Redex,
                          region_depths: dict[str, int]) -> bool:
    """w(unfold(p', i)) <= w(unfold(p, i)) for the single step p -> p'
    at the redex's own depth i."""
    from .reduction import apply_redex

    i = redex.depth
    before = weighted_size(unfold(p, i, region_depths))
    after = weighted_size(unfold(apply_redex(p, redex), i, region_depths))
    return after <= before


def check_quadratic(p: Term, region_depths: dict[str, int]) -> bool:
    """For every level i up to d(p): the unfolding has at most n free
    occurrences and weighted size at most n*(n-1), where n = w(p).
    A single-node program unfolds to itself, so the quadratic part is
    only claimed from n >= 2 on."""
    n = weighted_size(p)
    d = depth(p, region_depths)
    for i in range(d + 1):
        u = unfold(p, i, region_depths)
        if count_free_total(u) > n:
            return False
        if n >= 2 and weighted_size(u) > n * (n - 1):
            return False
    return True


def exhaust_depth(p: Term, i: int, region_depths: dict[str, int],
                  relation: str = "full",
                  fuel: Optional[int] = None) -> tuple[Term, int]:
    """Fire depth-i redexes (lowest address first) until none remain.
    Returns (final program, step count)."""
    from .reduction import apply_redex, enumerate_redexes

    if fuel is None:
        fuel = weighted_size(p) + 1
    steps = 0
    while True:
        at_i = [r for r in enumerate_redexes(p, region_depths, relation)
                if r.depth == i]
        if not at_i:
            return p, steps
        if steps >= fuel:
            raise BoundViolation(
                f"depth-{i} reduction did not exhaust within {fuel} steps")
        p = apply_redex(p, min(at_i, key=lambda r: r.key()))
        steps += 1


def check_squaring(p: Term, i: int, region_depths: dict[str, int]) -> bool:
    """Exhausting depth-i redexes takes at most n steps and ends at
    weighted size at most n*(n-1), n = w(p).  The size part is only
    claimed from n >= 2 on (a redex-free single node stays size 1)."""
    n = weighted_size(p)
    try:
        final, steps = exhaust_depth(p, i, region_depths,
                                     fuel=n + 1)
    except BoundViolation:
        return False
    if steps > n:
        return False
    if n >= 2 and weighted_size(final) > n * (n - 1):
        return False
    return True


@dataclass(slots=True)
class BoundReport:
    initial_size: int        # weighted
    initial_plain: int
    depth: int
    bound: int               # initial_size ** (2 ** depth)
    final_size: int          # weighted
    final_plain: int
    steps: int
    max_size: int            # largest weighted size along the run
    halted: bool
    size_ok: bool
    steps_ok: bool

    @property
    def passed(self) -> bool:
        return self.halted and self.size_ok and self.steps_ok

    def render(self) -> str:
        lines = [
            f"initial-size {self.initial_size} (plain {self.initial_plain})",
            f"depth {self.depth}",
            f"bound {self.bound}",
            f"final-size {self.final_size} (plain {self.final_plain})",
            f"steps {self.steps}",
            f"max-size {self.max_size}",
            f"halted {'yes' if self.halted else 'no'}",
            f"size-ok {'yes' if self.size_ok else 'no'}",
            f"steps-ok {'yes' if self.steps_ok else 'no'}",
            f"verdict {'pass' if self.passed else 'FAIL'}",
        ]
        return "\n".join(lines)


def verify_bound(p: Term, region_depths: dict[str, int],
                 strategy: str = "shallow", relation: str = "outer_bang",
                 seed: Optional[int] = None,
                 raise_on_fail: bool = True) -> BoundReport:
    """Run p to termination and certify steps and every intermediate
    weighted size against n^(2^d).  Ill-formed programs are refused
    before anything runs; no bound is claimed for them."""
    strategy = canon_strategy(strategy)
    relation = canon_relation(relation)
    if strategy not in ("shallow", "cbv", "random"):
        raise ReductionError(f"no bound is certified for strategy "
                             f"{strategy!r}")
    if relation not in ("outer_bang", "cbv"):
        raise ReductionError(f"no bound is certified for relation "
                             f"{relation!r}")
    check_wf(p, region_depths)

    n = weighted_size(p)
    d = depth(p, region_depths)
    bound = n ** (2 ** d)
    res: RunResult = run(p, region_depths, relation=relation,
                         strategy=strategy, seed=seed, fuel=bound + 1)

    from .parser import parse_program

    sizes = [n]
    for s in res.trace.steps:
        sizes.append(weighted_size(parse_program(s.program)))
    report = BoundReport(
        initial_size=n,
        initial_plain=size(p),
        depth=d,
        bound=bound,
        final_size=weighted_size(res.final),
        final_plain=size(res.final),
        steps=len(res.trace.steps),
        max_size=max(sizes),
        halted=res.halted,
        size_ok=all(sz <= bound for sz in sizes),
        steps_ok=len(res.trace.steps) <= bound,
    )
    if raise_on_fail and not report.passed:
        raise BoundViolation("bound certificate failed:\n" + report.render(),
                             report)
    return report
