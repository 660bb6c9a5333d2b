"""Reduction: redex enumeration, strategies, traces, replay.

Three relations over the same six rules (beta, bang, para, get, set, gc):

  - full: contexts reach every position, including inside !-terms and
    store bodies;
  - outer_bang: every position except inside !-terms;
  - cbv: left-to-right call-by-value positions only (no descent under
    binders, let bodies, !-terms or stores), with value-restricted rules.

After every step the top-level parallel chain is flattened and sorted
into a canonical order, so structurally equivalent runs give identical
addresses and traces replay bit-exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional

from .syntax import (App, Bag, Bang, Gen, Get, Inst, Lam, LetBang, LetPara,
                     LmtError, Nu, Par, Para, RegionConst, Set, Store, Term,
                     Unit, Var, children, free_vars, par_chain, par_of_chain,
                     replace_at, sort_top_chain, substitute)


class ReductionError(LmtError):
    pass


class InvariantViolation(LmtError):
    """A redex appeared below the level a shallow-first run had reached."""


RELATIONS = ("full", "outer_bang", "cbv")
STRATEGIES = ("cbv", "shallow", "random", "deepfirst")


def canon_relation(name: str) -> str:
    alias = {"outer": "outer_bang", "f": "outer_bang", "v": "cbv"}
    name = alias.get(name, name)
    if name not in RELATIONS:
        raise ReductionError(f"unknown relation {name!r}")
    return name


def canon_strategy(name: str) -> str:
    alias = {"cbv_leftmost": "cbv", "shallow_first": "shallow",
             "deep_first": "deepfirst"}
    name = alias.get(name, name)
    if name not in STRATEGIES:
        raise ReductionError(f"unknown strategy {name!r}")
    return name


# --- values and cbv syntax ----------------------------------------------------

def is_value(t: Term) -> bool:
    match t:
        case Var() | Unit() | RegionConst() | Lam():
            return True
        case Bang(body) | Para(body):
            return is_value(body)
        case _:
            return False


def check_cbv_syntax(p: Term) -> None:
    """CBV programs build !M only over values and store only values."""
    match p:
        case Bang(body):
            if not is_value(body):
                raise ReductionError(
                    "cbv syntax requires !-terms over values, got "
                    "a !-term over a non-value")
        case Store(_, body, _):
            if not is_value(body):
                raise ReductionError("cbv syntax requires stores to hold "
                                     "values")
        case Gen(_, _) | Inst(_, _) | Nu(_, _, _) | Bag(_, _):
            raise ReductionError(
                f"{type(p).__name__} nodes do not belong to the region "
                f"reduction language")
    for k in children(p):
        check_cbv_syntax(k)


# --- redexes ------------------------------------------------------------------

@dataclass(slots=True, frozen=True)
class Redex:
    addr: str
    rule: str
    depth: int
    store_addr: Optional[str] = None

    def key(self) -> tuple:
        return (self.addr, self.rule, self.store_addr or "")


def _reject_foreign(t: Term) -> None:
    if type(t) in (Gen, Inst, Nu, Bag):
        raise ReductionError(
            f"{type(t).__name__} nodes do not belong to the region "
            f"reduction language (erase annotations or translate first)")


def enumerate_redexes(p: Term, region_depths: dict[str, int],
                      relation: str = "full") -> list[Redex]:
    """All redexes of p under the relation, sorted by (addr, rule,
    store_addr).  get redexes appear once per matching store."""
    relation = canon_relation(relation)
    out: list[Redex] = []
    # get occurrences pending pairing: (addr, region, depth, top element idx)
    gets: list[tuple[str, str, int, int]] = []

    top = par_chain(p)
    top_addrs: list[str] = []
    if type(p) is Par:
        # addresses of chain elements along the Par spine
        def spine(t: Term, addr: str) -> None:
            if type(t) is Par:
                spine(t.left, addr + "0")
                spine(t.right, addr + "1")
            else:
                top_addrs.append(addr)
        spine(p, "")
    else:
        top_addrs.append("")
    stores = [(i, top_addrs[i], e) for i, e in enumerate(top)
              if type(e) is Store]

    def rdepth(r: str, what: str) -> int:
        if r not in region_depths:
            raise ReductionError(
                f"region '#{r}' has no declared depth (needed for {what})")
        return region_depths[r]

    def walk(t: Term, addr: str, reach: bool, d: int, elem: int,
             parent_par: bool) -> None:
        _reject_foreign(t)
        match t:
            case App(fn, arg) if reach and type(fn) is Lam:
                if relation != "cbv" or is_value(arg):
                    out.append(Redex(addr, "beta", d))
            case LetBang(_, bound, _) if reach and type(bound) is Bang:
                if relation != "cbv" or is_value(bound.body):
                    out.append(Redex(addr, "bang", d))
            case LetPara(_, bound, _) if reach and type(bound) is Para:
                if relation != "cbv" or is_value(bound.body):
                    out.append(Redex(addr, "para", d))
            case Get(region, loc) if reach and not loc:
                gets.append((addr, region, d, elem))
            case Set(region, arg, loc) if reach and not loc:
                if not free_vars(arg) and (relation != "cbv" or
                                           is_value(arg)):
                    rdepth(region, f"set(#{region}, ...)")
                    out.append(Redex(addr, "set", d))
            case Par() if reach and not parent_par:
                chain: list[tuple[str, Term]] = []

                def flat(n: Term, a: str) -> None:
                    if type(n) is Par:
                        flat(n.left, a + "0")
                        flat(n.right, a + "1")
                    else:
                        chain.append((a, n))
                flat(t, addr)
                others = sum(1 for _, e in chain if type(e) is not Store)
                for a, e in chain:
                    if type(e) is Unit and others >= 2:
                        out.append(Redex(a, "gc", d))
        # descend
        kids = children(t)
        for i, k in enumerate(kids):
            kreach = reach
            kd = d
            kelem = elem
            match t:
                case Bang(_):
                    kd = d + 1
                    if relation in ("outer_bang", "cbv"):
                        kreach = False
                case Para(_):
                    kd = d + 1
                case Store(region, _, loc):
                    kd = d + (rdepth(region, f"#{region} <= ...")
                              if not loc else 0)
                    if relation == "cbv":
                        kreach = False
                case Lam(_, _, _):
                    if relation == "cbv":
                        kreach = False
                case App(fn, _):
                    if relation == "cbv" and i == 1 and not is_value(fn):
                        kreach = False
                case LetBang(_, _, _) | LetPara(_, _, _):
                    if relation == "cbv" and i == 1:
                        kreach = False
            walk(k, addr + str(i), kreach, kd, kelem, type(t) is Par)

    # walk from the root; top chain elements get their element index
    if type(p) is Par:
        # handle the top chain as the maximal par node
        chain_addrs = {a: i for i, a in enumerate(top_addrs)}
        others = sum(1 for e in top if type(e) is not Store)
        for a, e in zip(top_addrs, top):
            if type(e) is Unit and others >= 2:
                out.append(Redex(a, "gc", 0))
            walk(e, a, True, 0, chain_addrs[a], True)
    else:
        walk(p, "", True, 0, 0, False)

    # pair reads with stores: a get may not consume the store it sits in
    for addr, region, d, elem in gets:
        rdepth(region, f"get(#{region})")
        for i, saddr, s in stores:
            if s.target == region and not s.loc and i != elem:
                out.append(Redex(addr, "get", d, saddr))

    out.sort(key=Redex.key)
    return out


def apply_redex(p: Term, rx: Redex) -> Term:
    """One step; the result's top-level chain is re-sorted canonically."""
    from .syntax import subterm_at

    node = subterm_at(p, rx.addr)
    if rx.rule == "beta":
        assert type(node) is App and type(node.fn) is Lam
        new = substitute(node.fn.body, node.fn.binder, node.arg)
        result = replace_at(p, rx.addr, new)
    elif rx.rule in ("bang", "para"):
        assert type(node) in (LetBang, LetPara)
        new = substitute(node.body, node.binder, node.bound.body)
        result = replace_at(p, rx.addr, new)
    elif rx.rule == "set":
        assert type(node) is Set
        result = Par(replace_at(p, rx.addr, Unit()),
                     Store(node.target, node.arg, node.loc))
    elif rx.rule == "get":
        assert type(node) is Get and rx.store_addr is not None
        store = subterm_at(p, rx.store_addr)
        assert type(store) is Store and store.target == node.target
        filled = replace_at(p, rx.addr, store.body)
        # drop the consumed store from the top chain
        chain: list[tuple[str, Term]] = []

        def flat(n: Term, a: str) -> None:
            if type(n) is Par:
                flat(n.left, a + "0")
                flat(n.right, a + "1")
            else:
                chain.append((a, n))
        flat(filled, "")
        rest = [e for a, e in chain if a != rx.store_addr]
        if not rest:
            raise ReductionError("consuming the last parallel component")
        result = par_of_chain(rest)
    elif rx.rule == "gc":
        if type(node) is not Unit:
            raise ReductionError("gc address is not a unit chain element")
        # find the maximal Par above the unit element
        i = len(rx.addr)
        while i > 0 and type(subterm_at(p, rx.addr[:i - 1])) is Par:
            i -= 1
        if i == len(rx.addr):
            raise ReductionError("gc address does not sit in a chain")
        par_addr = rx.addr[:i]
        chain: list[tuple[str, Term]] = []

        def flat2(n: Term, a: str) -> None:
            if type(n) is Par:
                flat2(n.left, a + "0")
                flat2(n.right, a + "1")
            else:
                chain.append((a, n))
        flat2(subterm_at(p, par_addr), par_addr)
        rest = [e for a, e in chain if a != rx.addr]
        result = replace_at(p, par_addr, par_of_chain(rest))
    else:
        raise ReductionError(f"unknown rule {rx.rule!r}")
    return sort_top_chain(result)


# --- strategies, runs, traces -------------------------------------------------

@dataclass(slots=True)
class TraceStep:
    step: int
    rule: str
    addr: str
    depth: int
    program: str  # printed program after the step
    store_addr: Optional[str] = None
    choice: int = 0  # index picked among the sorted candidates
    nrand: int = 0   # RNG draws consumed so far (random strategy)


@dataclass(slots=True)
class Trace:
    program: str
    relation: str
    strategy: str
    seed: Optional[int]
    fuel: int
    regions: dict[str, int]
    steps: list[TraceStep] = field(default_factory=list)


@dataclass(slots=True)
class RunResult:
    trace: Trace
    final: Term
    halted: bool  # True when no redex remains, False when fuel ran out


def _pick(redexes: list[Redex], strategy: str, level: int,
          rng: Optional[random.Random]) -> tuple[Redex, int, int]:
    """Choose a redex; returns (redex, index, new level)."""
    if strategy == "cbv":
        i = min(range(len(redexes)), key=lambda j: redexes[j].key())
        return redexes[i], i, level
    if strategy == "shallow":
        dmin = min(r.depth for r in redexes)
        if dmin < level:
            raise InvariantViolation(
                f"redex at depth {dmin} appeared after the run reached "
                f"level {level}")
        level = max(level, dmin)
        cands = [j for j, r in enumerate(redexes) if r.depth == dmin]
        i = min(cands, key=lambda j: redexes[j].key())
        return redexes[i], i, level
    if strategy == "deepfirst":
        dmax = max(r.depth for r in redexes)
        cands = [j for j, r in enumerate(redexes) if r.depth == dmax]
        i = min(cands, key=lambda j: redexes[j].key())
        return redexes[i], i, level
    if strategy == "random":
        assert rng is not None
        i = rng.randrange(len(redexes))
        return redexes[i], i, level
    raise ReductionError(f"unknown strategy {strategy!r}")


def run(p: Term, region_depths: dict[str, int], relation: str = "full",
        strategy: str = "cbv", seed: Optional[int] = None,
        fuel: int = 10 ** 6) -> RunResult:
    """Reduce p until no redex remains or fuel runs out, recording a
    trace.  The random strategy requires a seed for reproducibility."""
    from .printer import to_text

    relation = canon_relation(relation)
    strategy = canon_strategy(strategy)
    if relation == "cbv" or strategy == "cbv":
        check_cbv_syntax(p)
    if strategy == "random" and seed is None:
        seed = 0
    rng = random.Random(seed) if strategy == "random" else None

    p = sort_top_chain(p)
    trace = Trace(to_text(p), relation, strategy, seed, fuel,
                  dict(region_depths))
    level = 0
    nrand = 0
    halted = False
    for step in range(fuel):
        redexes = enumerate_redexes(p, region_depths, relation)
        if not redexes:
            halted = True
            break
        rx, idx, level = _pick(redexes, strategy, level, rng)
        if rng is not None:
            nrand += 1
        p = apply_redex(p, rx)
        trace.steps.append(TraceStep(step, rx.rule, rx.addr, rx.depth,
                                     to_text(p), rx.store_addr, idx, nrand))
    else:
        halted = not enumerate_redexes(p, region_depths, relation)
    return RunResult(trace, p, halted)


def write_trace(trace: Trace, path: str) -> None:
    with open(path, "w") as fh:
        head = {"program": trace.program, "relation": trace.relation,
                "strategy": trace.strategy, "seed": trace.seed,
                "fuel": trace.fuel, "regions": trace.regions}
        fh.write(json.dumps(head) + "\n")
        for s in trace.steps:
            rec = {"step": s.step, "rule": s.rule, "addr": s.addr,
                   "depth": s.depth, "program": s.program,
                   "choice": s.choice, "nrand": s.nrand}
            if s.store_addr is not None:
                rec["store_addr"] = s.store_addr
            fh.write(json.dumps(rec) + "\n")


def read_trace(path: str) -> Trace:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ReductionError(f"empty trace file {path!r}")
    head = json.loads(lines[0])
    trace = Trace(head["program"], head["relation"], head["strategy"],
                  head.get("seed"), head.get("fuel", 10 ** 6),
                  {str(k): int(v) for k, v in head["regions"].items()})
    for ln in lines[1:]:
        d = json.loads(ln)
        trace.steps.append(TraceStep(d["step"], d["rule"], d["addr"],
                                     d["depth"], d["program"],
                                     d.get("store_addr"),
                                     d.get("choice", 0), d.get("nrand", 0)))
    return trace


def replay(trace: Trace) -> Term:
    """Re-apply the recorded steps, verifying rule, address, depth and the
    printed program after every step.  Returns the final program."""
    from .parser import parse_program
    from .printer import to_text

    p = sort_top_chain(parse_program(trace.program))
    for s in trace.steps:
        redexes = enumerate_redexes(p, trace.regions, trace.relation)
        match = [r for r in redexes
                 if r.addr == s.addr and r.rule == s.rule
                 and (r.store_addr or None) == (s.store_addr or None)]
        if not match:
            raise ReductionError(
                f"step {s.step}: recorded redex {s.rule}@{s.addr!r} is not "
                f"available")
        rx = match[0]
        if rx.depth != s.depth:
            raise ReductionError(
                f"step {s.step}: depth {rx.depth} != recorded {s.depth}")
        p = apply_redex(p, rx)
        if to_text(p) != s.program:
            raise ReductionError(
                f"step {s.step}: program after step differs from the "
                f"recorded one")
    return p


def intermediate_programs(trace: Trace) -> list[Term]:
    """Programs along the trace, starting with the initial one."""
    from .parser import parse_program

    out = [sort_top_chain(parse_program(trace.program))]
    for s in trace.steps:
        out.append(parse_program(s.program))
    return out


# --- stuck-state decomposition ------------------------------------------------

@dataclass(slots=True)
class StuckReport:
    """Threads of a non-reducing program, split by shape."""
    values: list[Term] = field(default_factory=list)
    blocked: list[tuple[Term, str]] = field(default_factory=list)
    stores: list[Term] = field(default_factory=list)
    violations: list[Term] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _blocked_region(t: Term) -> Optional[str]:
    """Region of the read this thread is waiting on, following the
    call-by-value evaluation spine; None if the thread fits no
    blocked-read shape."""
    match t:
        case Get(target, loc):
            return None if loc else target
        case App(fn, arg):
            if not is_value(fn):
                return _blocked_region(fn)
            if not is_value(arg):
                return _blocked_region(arg)
            return None  # App(V, V) that is no redex: head is not a lambda
        case Para(body):
            return _blocked_region(body) if not is_value(body) else None
        case LetBang(_, bound, _) | LetPara(_, bound, _):
            return _blocked_region(bound) if not is_value(bound) else None
        case Set(_, arg, _):
            return _blocked_region(arg) if not is_value(arg) else None
        case Par(left, right):
            return _blocked_region(left) or _blocked_region(right)
        case _:
            return None


def classify_stuck(p: Term) -> StuckReport:
    """Decompose a program with no cbv redex into value threads,
    reads blocked on an empty region, and stores.  Any thread fitting
    neither shape lands in violations (for a typable program that
    falsifies the progress property)."""
    check_cbv_syntax(p)
    report = StuckReport()
    for e in par_chain(p):
        if type(e) is Store:
            report.stores.append(e)
        elif is_value(e):
            report.values.append(e)
        else:
            r = _blocked_region(e)
            if r is None:
                report.violations.append(e)
            else:
                report.blocked.append((e, r))
    return report
