"""Higher-order references over the region language.

The reference front-end binds dynamic memory locations with
`nu x : #r. M`, reads them with `get(x)` (the stored value is copied)
and writes them with `set(x, M)` (the stored value is overwritten in
place).  Region constants do not occur in term positions.  A read or a
write on a location that was never assigned is blocked, not an error:
the run result reports it, mirroring reads on empty regions.

`translate` compiles references away: every location becomes its
region constant, and each read becomes a consume-then-duplicate
expansion `let !y = get(#r) in (set(#r, !y) || !y)`, which is why
locations must hold duplicable (!-typed) contents.  `check_simulation`
replays a recorded reference trace on the translated program and
verifies the step budget: one region step per write, several per read,
with states agreeing up to structural equivalence once superseded
stores (garbage the region side cannot drop) are accounted for.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .parser import parse_program
from .printer import to_text
from .reduction import apply_redex, enumerate_redexes, is_value
from .syntax import (App, Bag, Bang, Gen, Get, Inst, Lam, LetBang, LetPara,
                     LmtError, Nu, Par, Para, RegionConst, Set, Store, Term,
                     Unit, Var, children, free_vars, fresh_name, par_chain,
                     par_of_chain, rebuild, replace_at, struct_equiv,
                     substitute, subterm_at)
from .types import BangT, Type


class NuSyntaxError(LmtError):
    pass


class TranslateError(LmtError):
    pass


# --- normalized states -------------------------------------------------------

def split_nu(p: Term) -> tuple[list[tuple[str, Optional[str]]], Term]:
    """Strip the top binder prefix, returning ([(name, region)], body)."""
    binders: list[tuple[str, Optional[str]]] = []
    while isinstance(p, Nu):
        binders.append((p.binder, p.region))
        p = p.body
    return binders, p


def join_nu(binders: list[tuple[str, Optional[str]]], body: Term) -> Term:
    for b, r in reversed(binders):
        body = Nu(b, r, body)
    return body


def _chain_addrs(t: Term, addr: str = "") -> list[tuple[str, Term]]:
    """Parallel chain elements with their addresses, left to right."""
    if type(t) is Par:
        return (_chain_addrs(t.left, addr + "0")
                + _chain_addrs(t.right, addr + "1"))
    return [(addr, t)]


def _find_nu(body: Term) -> Optional[tuple[str, Nu]]:
    """First binder sitting at an evaluation position (scope extrusion
    target).  Binders buried under a lambda stay where they are."""
    for ea, e in _chain_addrs(body):
        sites: list[tuple[str, Term, frozenset[str]]] = []
        if isinstance(e, Nu):
            return ea, e
        _strict_sites(e, ea, sites)
        for sa, node, _ in sites:
            if isinstance(node, Nu):
                return sa, node
    return None


def normalize_nu(p: Term) -> tuple[list[tuple[str, Optional[str]]], Term]:
    """Pull every reachable binder to the top, freshening on collision."""
    binders, body = split_nu(p)
    taken = {b for b, _ in binders}
    while True:
        site = _find_nu(body)
        if site is None:
            return binders, body
        a, node = site
        b, r, inner = node.binder, node.region, node.body
        avoid = taken | free_vars(body)
        if b in avoid:
            nb = fresh_name(b, avoid | free_vars(inner))
            inner = substitute(inner, b, Var(nb))
            b = nb
        taken.add(b)
        binders.append((b, r))
        body = replace_at(body, a, inner) if a else inner


# --- syntax admission --------------------------------------------------------

def check_nu_syntax(p: Term, strict: bool = True) -> None:
    """Admission for reference programs.

    Always: no region constants or region-addressed get/set/stores, no
    typing scaffolding (gen/inst), no measure nodes, no shadowed
    location binders, stores only in the top parallel chain.  With
    `strict` (the call-by-value discipline), store and !-bodies must be
    values; demo runs that reduce under binders lift that.
    """
    def scopes(t: Term, nus: frozenset[str]) -> None:
        # only location-over-location shadowing is ambiguous; an ordinary
        # binder over a location name just makes inner targets inert
        if isinstance(t, Nu):
            if t.binder in nus:
                raise NuSyntaxError(
                    f"location {t.binder!r} shadows an enclosing location")
            scopes(t.body, nus | {t.binder})
            return
        for k in children(t):
            scopes(k, nus)

    scopes(p, frozenset())
    binders, body = normalize_nu(p)
    seen = {b for b, _ in binders}

    def walk(t: Term, top: bool, nus: frozenset[str]) -> None:
        match t:
            case RegionConst(r):
                raise NuSyntaxError(
                    f"region constant #{r} in a reference program")
            case Get(r, loc) | Set(r, _, loc) | Store(r, _, loc) \
                    if not loc:
                raise NuSyntaxError(
                    f"region-addressed operation on #{r} in a reference "
                    f"program")
            case Gen() | Inst():
                raise NuSyntaxError(
                    "gen/inst are typing scaffolding; erase before running")
            case Bag():
                raise NuSyntaxError("measure nodes cannot be run")
            case Nu(b, _, inner):
                if b in nus:
                    raise NuSyntaxError(f"location {b!r} is bound twice")
                walk(inner, False, nus | {b})
                return
            case Store(_, v, _):
                if not top:
                    raise NuSyntaxError(
                        "stores belong to the top parallel chain")
                if strict and not is_value(v):
                    raise NuSyntaxError(
                        f"store body {to_text(v)} is not a value")
            case Bang(v):
                if strict and not is_value(v):
                    raise NuSyntaxError(
                        f"!-body {to_text(v)} is not a value")
            case Par() if top:
                for _, e in _chain_addrs(t):
                    walk(e, True, nus)
                return
        for k in children(t):
            walk(k, False, nus)

    walk(body, True, frozenset(seen))


# --- redex search ------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class NuRedex:
    addr: str
    rule: str            # beta | bang | para | gc | get | set
    thread: int          # index into the top parallel chain
    loc: str = ""
    gc_index: int = -1


_EMPTY: frozenset[str] = frozenset()

# A site is (address, node, bound): `bound` is the set of ordinary
# binders crossed on the way, which shadow location names.

def _strict_sites(t: Term, addr: str,
                  out: list[tuple[str, Term, frozenset[str]]]) -> None:
    """Call-by-value evaluation sites within one thread.  The strict
    walk never crosses a binder, so its sites see no shadowing."""
    match t:
        case App(f, a):
            if not is_value(f):
                _strict_sites(f, addr + "0", out)
            elif not is_value(a):
                _strict_sites(a, addr + "1", out)
            else:
                out.append((addr, t, _EMPTY))
        case LetBang(_, bound, _) | LetPara(_, bound, _):
            if is_value(bound):
                out.append((addr, t, _EMPTY))
            else:
                _strict_sites(bound, addr + "0", out)
        case Para(body):
            if not is_value(body):
                _strict_sites(body, addr + "0", out)
        case Set(_, arg, True):
            if is_value(arg):
                out.append((addr, t, _EMPTY))
            else:
                _strict_sites(arg, addr + "0", out)
        case Get(_, True):
            out.append((addr, t, _EMPTY))
        case Par():
            out.append((addr, t, _EMPTY))
            for ea, e in _chain_addrs(t, addr):
                _strict_sites(e, ea, out)
        case Nu():
            out.append((addr, t, _EMPTY))


def _under_sites(t: Term, addr: str,
                 out: list[tuple[str, Term, frozenset[str]]],
                 bound: frozenset[str] = _EMPTY) -> None:
    """All positions outside !-boxes, preorder.  Parallel nodes are
    visited once per maximal chain."""
    match t:
        case Bang():
            return
        case Par():
            out.append((addr, t, bound))
            for ea, e in _chain_addrs(t, addr):
                _under_sites(e, ea, out, bound)
            return
        case App() | LetBang() | LetPara() | Get() | Set() | Nu():
            out.append((addr, t, bound))
    match t:
        case Lam(b, body, _):
            _under_sites(body, addr + "0", out, bound | {b})
        case LetBang(b, bnd, body) | LetPara(b, bnd, body):
            _under_sites(bnd, addr + "0", out, bound)
            _under_sites(body, addr + "1", out, bound | {b})
        case Nu(b, _, body):
            _under_sites(body, addr + "0", out, bound | {b})
        case _:
            for i, k in enumerate(children(t)):
                _under_sites(k, addr + str(i), out, bound)


def _closed_up_to(t: Term, locs: set[str]) -> bool:
    return free_vars(t) <= locs


def _reads_or_writes(t: Term, bound: frozenset[str] = frozenset()) -> bool:
    """Does t still perform location operations?  A write may only
    commit a thunk that is done reading, or copies would re-read."""
    match t:
        case Get(tg, True):
            return tg not in bound
        case Set(tg, arg, True):
            return tg not in bound or _reads_or_writes(arg, bound)
        case Lam(b, body, _) | Nu(b, _, body):
            return _reads_or_writes(body, bound | {b})
        case LetBang(b, bnd, body) | LetPara(b, bnd, body):
            return (_reads_or_writes(bnd, bound)
                    or _reads_or_writes(body, bound | {b}))
    return any(_reads_or_writes(k, bound) for k in children(t))


def _gc_redexes(addr: str, node: Term, thread: int) -> list[NuRedex]:
    elems = par_chain(node)
    out = []
    for k, e in enumerate(elems):
        if isinstance(e, Unit):
            rest = elems[:k] + elems[k + 1:]
            if any(not isinstance(x, Store) for x in rest):
                out.append(NuRedex(addr, "gc", thread, gc_index=k))
    return out


def enumerate_nu(body: Term, under_binders: bool = False,
                 loc_names: frozenset[str] = frozenset(),
                 ) -> tuple[list[NuRedex], list[tuple[str, str]],
                            list[tuple[str, Term]], dict]:
    """Enabled reference redexes of a normalized body.

    Returns (redexes, blocked, chain, stores): `blocked` lists (op,
    location) pairs that would fire if their location had a store,
    `stores` maps a location to (chain index, address, node).
    `loc_names` carries the top binder names so that the under-binders
    write condition can treat locations as closed.
    """
    chain = _chain_addrs(body)
    stores: dict[str, tuple[int, str, Store]] = {}
    locs: set[str] = set(loc_names)
    for i, (ea, e) in enumerate(chain):
        if isinstance(e, Store) and e.loc:
            if e.target in stores:
                raise NuSyntaxError(
                    f"two stores for location {e.target!r}")
            stores[e.target] = (i, ea, e)
            locs.add(e.target)

    redexes: list[NuRedex] = []
    blocked: list[tuple[str, str]] = []
    non_store = sum(1 for _, e in chain if not isinstance(e, Store))
    if len(chain) > 1:
        for k, (_, e) in enumerate(chain):
            if isinstance(e, Unit) and non_store >= 2:
                redexes.append(NuRedex("", "gc", k, gc_index=k))

    for i, (ea, e) in enumerate(chain):
        sites: list[tuple[str, Term]] = []
        if under_binders:
            _under_sites(e, ea, sites)
        elif not isinstance(e, Store):
            _strict_sites(e, ea, sites)
        for sa, node, shadow in sites:
            match node:
                case App(f, a):
                    if isinstance(f, Lam) and (under_binders
                                               or is_value(a)):
                        redexes.append(NuRedex(sa, "beta", i))
                case LetBang(_, bound, _):
                    if isinstance(bound, Bang) and (
                            under_binders or is_value(bound)):
                        redexes.append(NuRedex(sa, "bang", i))
                case LetPara(_, bound, _):
                    if isinstance(bound, Para) and (
                            under_binders or is_value(bound)):
                        redexes.append(NuRedex(sa, "para", i))
                case Get(x, True):
                    if x in shadow:
                        pass  # a bound name, not a location yet
                    elif x in stores:
                        redexes.append(NuRedex(sa, "get", i, loc=x))
                    else:
                        blocked.append(("get", x))
                case Set(x, arg, True):
                    if x in shadow:
                        continue
                    ok = (is_value(arg) if not under_binders
                          else (_closed_up_to(arg, locs)
                                and not _reads_or_writes(arg)))
                    if not ok:
                        continue
                    if x in stores:
                        redexes.append(NuRedex(sa, "set", i, loc=x))
                    else:
                        blocked.append(("set", x))
                case Par():
                    if sa != "":
                        redexes.extend(_gc_redexes(sa, node, i))
    return redexes, blocked, chain, stores


def apply_nu(body: Term, rx: NuRedex,
             stores: dict[str, tuple[int, str, Store]]) -> Term:
    if rx.rule == "gc":
        root = subterm_at(body, rx.addr) if rx.addr else body
        elems = par_chain(root)
        del elems[rx.gc_index]
        new = par_of_chain(elems)
        return replace_at(body, rx.addr, new) if rx.addr else new
    node = subterm_at(body, rx.addr)
    if rx.rule == "beta":
        assert isinstance(node, App) and isinstance(node.fn, Lam)
        return replace_at(body, rx.addr,
                          substitute(node.fn.body, node.fn.binder,
                                     node.arg))
    if rx.rule == "bang":
        assert isinstance(node, LetBang) and isinstance(node.bound, Bang)
        return replace_at(body, rx.addr,
                          substitute(node.body, node.binder,
                                     node.bound.body))
    if rx.rule == "para":
        assert isinstance(node, LetPara) and isinstance(node.bound, Para)
        return replace_at(body, rx.addr,
                          substitute(node.body, node.binder,
                                     node.bound.body))
    if rx.rule == "get":
        _, _, st = stores[rx.loc]
        return replace_at(body, rx.addr, st.body)
    if rx.rule == "set":
        assert isinstance(node, Set)
        _, sa, _ = stores[rx.loc]
        body = replace_at(body, rx.addr, Unit())
        return replace_at(body, sa, Store(rx.loc, node.arg, True))
    raise LmtError(f"unknown reference rule {rx.rule!r}")


# --- read-modify-write atomicity ---------------------------------------------

def _contains_get(t: Term, x: str) -> bool:
    match t:
        case Get(tg, True) if tg == x:
            return True
        case Lam(b, body, _) | Nu(b, _, body):
            return b != x and _contains_get(body, x)
        case LetBang(b, bnd, body) | LetPara(b, bnd, body):
            if _contains_get(bnd, x):
                return True
            return b != x and _contains_get(body, x)
    return any(_contains_get(k, x) for k in children(t))


def _in_flight(elem: Term, x: str) -> bool:
    """A write on x whose argument no longer reads x: the thread has
    taken its snapshot and not yet committed.  Binders shadowing x cut
    the scan; shadowed names are not the location."""
    match elem:
        case Set(tg, arg, True) if tg == x:
            return (not _contains_get(arg, x)) or _in_flight(arg, x)
        case Lam(b, body, _) | Nu(b, _, body):
            return b != x and _in_flight(body, x)
        case LetBang(b, bnd, body) | LetPara(b, bnd, body):
            if _in_flight(bnd, x):
                return True
            return b != x and _in_flight(body, x)
    return any(_in_flight(k, x) for k in children(elem))


def _mask_atomic(redexes: list[NuRedex],
                 chain: list[tuple[str, Term]]) -> list[NuRedex]:
    """Drop get/set redexes on locations where another thread has an
    uncommitted read-modify-write."""
    out = []
    for rx in redexes:
        if rx.rule in ("get", "set"):
            clash = any(
                _in_flight(e, rx.loc)
                for j, (_, e) in enumerate(chain)
                if j != rx.thread and not isinstance(e, Store))
            if clash:
                continue
        out.append(rx)
    return out if out else redexes


# --- runs --------------------------------------------------------------------

@dataclass(slots=True)
class NuStep:
    step: int
    rule: str
    thread: int
    addr: str
    loc: str
    program: str


@dataclass(slots=True)
class NuTrace:
    program: str
    strategy: str
    seed: Optional[int]
    under_binders: bool
    steps: list[NuStep] = field(default_factory=list)


@dataclass(slots=True)
class NuRunResult:
    trace: NuTrace
    final: Term
    halted: bool
    blocked: list[tuple[str, str]]


NU_STRATEGIES = ("cbv", "random", "update")


def run_nu(p: Term, strategy: str = "cbv", seed: Optional[int] = None,
           under_binders: bool = False, fuel: int = 10 ** 6,
           ) -> NuRunResult:
    """Run a reference program to a normal form.

    `cbv` takes the first redex in evaluation order; `random` draws
    uniformly among enabled redexes; `update` draws like random but
    keeps each read-modify-write atomic per location, which is the
    granularity at which concurrent increments commute.
    """
    if strategy not in NU_STRATEGIES:
        raise LmtError(f"unknown strategy {strategy!r}")
    check_nu_syntax(p, strict=not under_binders)
    binders, body = normalize_nu(p)
    rng = random.Random(seed)
    trace = NuTrace(to_text(join_nu(binders, body)), strategy, seed,
                    under_binders)
    blocked: list[tuple[str, str]] = []
    halted = False
    for n in range(fuel):
        names = frozenset(b for b, _ in binders)
        redexes, blocked, chain, stores = enumerate_nu(
            body, under_binders, names)
        if strategy == "update":
            redexes = _mask_atomic(redexes, chain)
        if not redexes:
            halted = True
            break
        if strategy == "cbv":
            rx = redexes[0]
        else:
            rx = rng.choice(redexes)
        body = apply_nu(body, rx, stores)
        binders, body = normalize_nu(join_nu(binders, body))
        trace.steps.append(NuStep(n, rx.rule, rx.thread, rx.addr, rx.loc,
                                  to_text(join_nu(binders, body))))
    final = join_nu(binders, body)
    return NuRunResult(trace, final, halted, sorted(set(blocked)))


def step_nu(p: Term, strategy: str = "cbv", seed: Optional[int] = None,
            under_binders: bool = False) -> Optional[Term]:
    """One reduction step, or None when the program is a normal form."""
    res = run_nu(p, strategy=strategy, seed=seed,
                 under_binders=under_binders, fuel=1)
    if not res.trace.steps:
        return None
    return res.final


# --- compiling references away -----------------------------------------------

def _loc_region_of_ann(ann: Optional[Type]) -> Optional[str]:
    from .types import RegT
    if isinstance(ann, RegT):
        return ann.region
    return None


def _boxed_region_of_ann(ann: Optional[Type]) -> Optional[str]:
    from .types import ParaT, RegT
    if isinstance(ann, (BangT, ParaT)) and isinstance(ann.body, RegT):
        return ann.body.region
    return None


def translate(p: Term, region_types: dict[str, Type],
              loc_regions: Optional[dict[str, str]] = None) -> Term:
    """Compile a reference program to the region language.

    Locations become their region constants; each read becomes the
    consume-then-duplicate expansion; binders over locations vanish.
    Free locations need an entry in `loc_regions`.  Every region a
    location maps to must hold !-typed contents.
    """
    used_names = set(free_vars(p))

    def note(t: Term) -> None:
        for k in children(t):
            note(k)
        if isinstance(t, (Lam, LetBang, LetPara, Nu)):
            used_names.add(t.binder)
        if isinstance(t, Var):
            used_names.add(t.name)

    note(p)

    def check_region(r: str, where: str) -> str:
        if r not in region_types:
            raise TranslateError(
                f"location {where} maps to undeclared region #{r}")
        if not isinstance(region_types[r], BangT):
            raise TranslateError(
                f"location {where} maps to region #{r} with "
                f"non-duplicable contents")
        return r

    def go(t: Term, env: dict[str, str], boxed: dict[str, str]) -> Term:
        match t:
            case Nu(x, r, inner):
                if r is None:
                    raise TranslateError(
                        f"location {x!r} has no region annotation")
                check_region(r, x)
                return go(inner, {**env, x: r},
                          {k: v for k, v in boxed.items() if k != x})
            case Var(x) if x in env:
                return RegionConst(env[x])
            case Get(x, True):
                if x not in env:
                    raise TranslateError(
                        f"cannot resolve the region of location {x!r}")
                r = env[x]
                y = fresh_name("y", frozenset(used_names))
                used_names.add(y)
                return LetBang(y, Get(r),
                               Par(Set(r, Bang(Var(y))), Bang(Var(y))))
            case Set(x, arg, True):
                if x not in env:
                    raise TranslateError(
                        f"cannot resolve the region of location {x!r}")
                return Set(env[x], go(arg, env, boxed))
            case Store(x, v, True):
                if x not in env:
                    raise TranslateError(
                        f"cannot resolve the region of location {x!r}")
                return Store(env[x], go(v, env, boxed))
            case Lam(x, inner, ann):
                r = _loc_region_of_ann(ann)
                env2 = {k: v for k, v in env.items() if k != x}
                boxed2 = {k: v for k, v in boxed.items() if k != x}
                if r is not None:
                    env2[x] = check_region(r, x)
                br = _boxed_region_of_ann(ann)
                if br is not None:
                    boxed2[x] = check_region(br, x)
                return Lam(x, go(inner, env2, boxed2), ann)
            case LetBang(x, bound, inner) | LetPara(x, bound, inner):
                cls = type(t)
                r = None
                if isinstance(bound, Var) and bound.name in boxed:
                    r = boxed[bound.name]
                elif (isinstance(bound, (Bang, Para))
                      and isinstance(bound.body, Var)
                      and bound.body.name in env):
                    r = env[bound.body.name]
                nbound = go(bound, env, boxed)
                env2 = {k: v for k, v in env.items() if k != x}
                boxed2 = {k: v for k, v in boxed.items() if k != x}
                if r is not None:
                    env2[x] = r
                return cls(x, nbound, go(inner, env2, boxed2))
            case _:
                kids = children(t)
                if not kids:
                    return t
                return rebuild(t, tuple(go(k, env, boxed) for k in kids))

    env0 = dict(loc_regions or {})
    for r in env0.values():
        check_region(r, "<free>")
    return go(p, env0, {})


# --- simulation --------------------------------------------------------------

@dataclass(slots=True)
class SimulationReport:
    per_step: list[tuple[str, int]]
    ok: bool
    reason: str = ""

    @property
    def get_steps(self) -> list[int]:
        return [n for r, n in self.per_step if r == "get"]

    @property
    def set_steps(self) -> list[int]:
        return [n for r, n in self.per_step if r == "set"]

    def render(self) -> str:
        if self.ok:
            gs = self.get_steps
            return (f"simulated {len(self.per_step)} steps "
                    f"(reads -> {sorted(set(gs)) or '[]'} region steps, "
                    f"writes -> 1)")
        return f"simulation failed: {self.reason}"


def _store_on(state: Term, loc: str) -> Optional[Store]:
    _, body = split_nu(state)
    for _, e in _chain_addrs(body):
        if isinstance(e, Store) and e.loc and e.target == loc:
            return e
    return None


def _nu_env(state: Term, loc_regions: Optional[dict[str, str]],
            ) -> dict[str, str]:
    binders, _ = split_nu(state)
    env = dict(loc_regions or {})
    for b, r in binders:
        if r is None:
            raise TranslateError(f"location {b!r} has no region annotation")
        env[b] = r
    return env


def check_simulation(trace: NuTrace, region_depths: dict[str, int],
                     region_types: dict[str, Type],
                     loc_regions: Optional[dict[str, str]] = None,
                     relation: str = "cbv") -> SimulationReport:
    """Replay a reference trace on the translated program.

    Every write must be matched by exactly one region write; every read
    by a bounded burst of region steps (consume, duplicate, restore,
    collect).  After each matched step the region state must be
    structurally equivalent to the translated reference state composed
    with the garbage multiset of superseded stores.
    """
    states = [parse_program(trace.program)]
    states += [parse_program(s.program) for s in trace.steps]
    cur = translate(states[0], region_types, loc_regions)
    garbage: list[Term] = []
    per: list[tuple[str, int]] = []

    seq_of = {"get": ["get", "bang", "set", "gc"], "set": ["set"]}

    for k, s in enumerate(trace.steps):
        before, after = states[k], states[k + 1]
        if s.rule == "set":
            old = _store_on(before, s.loc)
            if old is None:
                return SimulationReport(per, False,
                                        f"write to unassigned {s.loc!r}")
            env = _nu_env(before, loc_regions)
            garbage = garbage + [
                Store(env[s.loc],
                      translate(old.body, region_types, env))]
        _, tbody = split_nu(after)
        texpect = translate(tbody, region_types, _nu_env(after, loc_regions))
        expected = par_of_chain(par_chain(texpect) + garbage) \
            if garbage else texpect

        rules = seq_of.get(s.rule, [s.rule])
        frontier = [cur]
        for rule in rules:
            nxt: list[Term] = []
            for st in frontier:
                for rx in enumerate_redexes(st, region_depths, relation):
                    if rx.rule != rule:
                        continue
                    nxt.append(apply_redex(st, rx))
            frontier = nxt
            if not frontier:
                break
        match = next((st for st in frontier
                      if struct_equiv(st, expected)), None)
        if match is None:
            return SimulationReport(
                per, False,
                f"step {s.step} ({s.rule}) has no matching region "
                f"sequence {rules}")
        cur = match
        per.append((s.rule, len(rules)))
    return SimulationReport(per, True)
