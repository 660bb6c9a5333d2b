"""Checking the polynomial type system.

Judgements have the form R; G |-d P : T where R maps regions to
(depth, content type) and G carries (usage, type) entries.  Checking
is syntax-directed: lambdas carry annotations and the two
quantifier rules appear as explicit `gen t. M` and `M [B]` nodes.
Effects on arrows are parsed and printed but never constrain
checking; types are compared modulo effect erasure and renaming of
quantified variables.

The module also mirrors reduction steps on annotated programs so
that every state along a trace can be re-checked at the same type.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .printer import to_text, type_text
from .reduction import Redex, ReductionError, classify_stuck, run
from .syntax import (App, Bag, Bang, Gen, Get, Inst, Lam, LetBang, LetPara,
                     LmtError, Nu, Par, Para, RegionConst, Set, Store, Term,
                     Unit, Var, canon, children, count_free, free_vars,
                     par_chain, par_of_chain, rebuild, replace_at,
                     substitute, subterm_at)
from .types import (Arrow, BangT, Behaviour, Forall, One, ParaT, RegionCtx,
                    RegT, TVar, Type, free_tvars, is_result_type,
                    region_ctx_wf, tsubst, type_canon, type_equal, type_wf)

# re-exported context judgements
from .types import region_ctx_wf as check_region_ctx          # noqa: F401
from .types import type_wf as check_type                      # noqa: F401


class TypeCheckError(LmtError):
    def __init__(self, rule: str, msg: str, addr: str = ""):
        self.rule = rule
        self.addr = addr
        at = f" at {addr}" if addr else ""
        super().__init__(f"[{rule}]{at} {msg}")


# variable states: a binder's usage fixes how many modalities an
# occurrence must cross before it becomes available
_READY = "ready"      # usable here (lambda-usage)
_NEED1 = "need-one"   # must cross one ! or one $ first (let-! usage)
_NEEDS = "need-sec"   # must cross one $ first (let-$ usage)
_DEAD = "dead"        # crossed a modality its usage does not allow

_USAGE_STATE = {"lam": _READY, "bang": _NEED1, "para": _NEEDS}

_CROSS = {
    "!": {_READY: _DEAD, _NEED1: _READY, _NEEDS: _DEAD, _DEAD: _DEAD},
    "$": {_READY: _DEAD, _NEED1: _READY, _NEEDS: _READY, _DEAD: _DEAD},
}


@dataclass(slots=True, frozen=True)
class Bind:
    state: str
    ty: Type


Env = dict[str, Bind]


def make_env(entries: dict[str, tuple[str, Type]]) -> Env:
    """Build a checker context from {name: (usage, type)} with usage
    one of lam/bang/para."""
    out: Env = {}
    for name, (usage, ty) in entries.items():
        if usage not in _USAGE_STATE:
            raise TypeCheckError("ctx", f"unknown usage {usage!r}")
        out[name] = Bind(_USAGE_STATE[usage], ty)
    return out


def _cross_env(env: Env, mod: str) -> Env:
    table = _CROSS[mod]
    return {k: Bind(table[v.state], v.ty) for k, v in env.items()}


@dataclass(slots=True)
class TypeDerivation:
    rule: str
    delta: int
    term: str
    ty: Type
    children: list["TypeDerivation"] = field(default_factory=list)

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        line = (f"{pad}[{self.rule}] |-{self.delta} {self.term} : "
                f"{type_text(self.ty)}")
        return "\n".join([line] + [c.render(indent + 1)
                                   for c in self.children])


def _short(t: Term, n: int = 48) -> str:
    s = to_text(t)
    return s if len(s) <= n else s[:n - 3] + "..."


Cands = list[tuple[Type, TypeDerivation]]


def _dedupe(cands: Cands) -> Cands:
    seen: set[str] = set()
    out: Cands = []
    for ty, d in cands:
        key = type_canon(ty)
        if key not in seen:
            seen.add(key)
            out.append((ty, d))
    return out


def _region_entry(regions: RegionCtx, r: str, rule: str,
                  addr: str) -> tuple[int, Type]:
    if r not in regions:
        raise TypeCheckError(rule, f"region #{r} is not declared", addr)
    d, ty = regions[r]
    if ty is None:
        raise TypeCheckError(rule, f"region #{r} has no content type", addr)
    return d, ty


def _loc_entry(env: Env, regions: RegionCtx, name: str, rule: str,
               addr: str) -> tuple[str, int, Type]:
    """Resolve a location name to (region, depth, content type).

    Locations are names, not resources: compiling references away turns
    them into region constants, so they are exempt from the usage
    discipline and may appear at any depth, any number of times.  Their
    declared region must hold duplicable (!-typed) contents, which is
    what lets a read be decomposed into consume-then-duplicate."""
    b = env.get(name)
    if b is None:
        raise TypeCheckError(rule, f"unbound location {name!r}", addr)
    if not isinstance(b.ty, RegT):
        raise TypeCheckError(
            rule, f"{name!r} has type {type_text(b.ty)}, not a region "
            f"type", addr)
    reg = b.ty.region
    dr, cty = _region_entry(regions, reg, rule, addr)
    if not type_equal(b.ty.content, cty):
        raise TypeCheckError(
            rule, f"location {name!r} declares #{reg} contents "
            f"{type_text(b.ty.content)} but the region context holds "
            f"{type_text(cty)}", addr)
    if not isinstance(cty, BangT):
        raise TypeCheckError(
            rule, f"locations need duplicable contents; region #{reg} "
            f"holds {type_text(cty)}", addr)
    return reg, dr, cty


def _foa_nonloc(t: Term, env: Env) -> int:
    """Free occurrences as counted by the duplication discipline.
    Location names are constant-like and do not count."""
    total = 0
    for v in free_vars(t):
        b = env.get(v)
        if b is not None and isinstance(b.ty, RegT):
            continue
        total += count_free(t, v)
    return total


def _gen_fresh_tvars(env: Env, regions: RegionCtx) -> frozenset[str]:
    """Type variables that a `gen` at this point must avoid: those free
    in the region contents and in the types of still-available
    variables (dead entries are weakened away and do not count)."""
    out: set[str] = set()
    for _, ty in regions.values():
        if ty is not None:
            out |= free_tvars(ty)
    for b in env.values():
        if b.state != _DEAD:
            out |= free_tvars(b.ty)
    return frozenset(out)


def _synth(t: Term, regions: RegionCtx, env: Env, delta: int,
           addr: str) -> Cands:
    """All types derivable for t, with their derivations.  Only the
    parallel rules branch; everything else is directed by the syntax."""
    match t:
        case Var(name):
            b = env.get(name)
            if b is None:
                raise TypeCheckError("var", f"unbound variable {name!r}",
                                     addr)
            if isinstance(b.ty, RegT):
                # location name: constant-like, no usage discipline
                return [(b.ty, TypeDerivation("loc", delta, name, b.ty))]
            if b.state == _NEED1:
                raise TypeCheckError(
                    "var", f"{name!r} is bound by a let ! and must occur "
                    f"under a modality", addr)
            if b.state == _NEEDS:
                raise TypeCheckError(
                    "var", f"{name!r} is bound by a let $ and must occur "
                    f"under a paragraph", addr)
            if b.state == _DEAD:
                raise TypeCheckError(
                    "var", f"{name!r} is not available here (crossed a "
                    f"modality its binder does not allow)", addr)
            return [(b.ty, TypeDerivation("var", delta, name, b.ty))]

        case Unit():
            return [(One(), TypeDerivation("unit", delta, "*", One()))]

        case RegionConst(r):
            _, ty = _region_entry(regions, r, "region", addr)
            rt = RegT(r, ty)
            return [(rt, TypeDerivation("region", delta, f"#{r}", rt))]

        case Lam(x, body, ann):
            if ann is None:
                raise TypeCheckError(
                    "lam", f"missing annotation on \\{x} (checking needs "
                    f"\\{x} : A)", addr)
            if not is_result_type(ann):
                raise TypeCheckError(
                    "lam", f"argument type {type_text(ann)} is not a "
                    f"result type", addr)
            if not type_wf(regions, ann):
                raise TypeCheckError(
                    "lam", f"annotation {type_text(ann)} is not compatible "
                    f"with the region context", addr)
            if count_free(body, x) != 1:
                raise TypeCheckError(
                    "lam", f"\\{x} must bind exactly one occurrence "
                    f"(found {count_free(body, x)})", addr)
            env2 = {**env, x: Bind(_READY, ann)}
            out: Cands = []
            for bt, bd in _synth(body, regions, env2, delta, addr + "0"):
                ty = Arrow(ann, bt)
                out.append((ty, TypeDerivation("lam", delta, _short(t), ty,
                                               [bd])))
            return _dedupe(out)

        case App(fn, arg):
            fcands = _synth(fn, regions, env, delta, addr + "0")
            acands = _synth(arg, regions, env, delta, addr + "1")
            out = []
            arrows = [(ft, fd) for ft, fd in fcands
                      if isinstance(ft, Arrow)]
            if not arrows:
                got = ", ".join(type_text(ft) for ft, _ in fcands)
                hint = (" (instantiate the quantifier first)"
                        if any(isinstance(ft, Forall) for ft, _ in fcands)
                        else "")
                raise TypeCheckError(
                    "app", f"function position has type {got}, not an "
                    f"arrow{hint}", addr)
            for ft, fd in arrows:
                for at, ad in acands:
                    if type_equal(ft.dom, at):
                        out.append((ft.cod,
                                    TypeDerivation("app", delta, _short(t),
                                                   ft.cod, [fd, ad])))
            if not out:
                raise TypeCheckError(
                    "app", f"argument has type "
                    f"{', '.join(type_text(at) for at, _ in acands)} but "
                    f"the function expects "
                    f"{', '.join(type_text(ft.dom) for ft, _ in arrows)}",
                    addr)
            return _dedupe(out)

        case Bang(body):
            foa = _foa_nonloc(body, env)
            if foa > 1:
                raise TypeCheckError(
                    "bang", f"!-term has {foa} free "
                    f"occurrences (at most one allowed)", addr)
            inner = _cross_env(env, "!")
            out = []
            for bt, bd in _synth(body, regions, inner, delta + 1,
                                 addr + "0"):
                if not is_result_type(bt):
                    continue
                ty = BangT(bt)
                out.append((ty, TypeDerivation("bang", delta, _short(t), ty,
                                               [bd])))
            if not out:
                raise TypeCheckError(
                    "bang", "body types only as a behaviour; !-terms need "
                    "a result type", addr)
            return _dedupe(out)

        case Para(body):
            inner = _cross_env(env, "$")
            out = []
            for bt, bd in _synth(body, regions, inner, delta + 1,
                                 addr + "0"):
                if not is_result_type(bt):
                    continue
                ty = ParaT(bt)
                out.append((ty, TypeDerivation("para", delta, _short(t), ty,
                                               [bd])))
            if not out:
                raise TypeCheckError(
                    "para", "body types only as a behaviour; $-terms need "
                    "a result type", addr)
            return _dedupe(out)

        case LetBang(x, bound, body):
            n = count_free(body, x)
            if n < 1:
                raise TypeCheckError(
                    "let-bang", f"let ! must bind at least one occurrence "
                    f"of {x!r}", addr)
            bcands = _synth(bound, regions, env, delta, addr + "0")
            bangs = [(bt, bd) for bt, bd in bcands if isinstance(bt, BangT)]
            if not bangs:
                got = ", ".join(type_text(bt) for bt, _ in bcands)
                raise TypeCheckError(
                    "let-bang", f"bound term has type {got}, expected "
                    f"!A", addr)
            out = []
            for bt, bd in bangs:
                env2 = {**env, x: Bind(_NEED1, bt.body)}
                for nt, nd in _synth(body, regions, env2, delta,
                                     addr + "1"):
                    out.append((nt, TypeDerivation("let-bang", delta,
                                                   _short(t), nt, [bd, nd])))
            return _dedupe(out)

        case LetPara(x, bound, body):
            n = count_free(body, x)
            if n != 1:
                raise TypeCheckError(
                    "let-para", f"let $ must bind exactly one occurrence "
                    f"of {x!r} (found {n})", addr)
            bcands = _synth(bound, regions, env, delta, addr + "0")
            paras = [(bt, bd) for bt, bd in bcands if isinstance(bt, ParaT)]
            if not paras:
                got = ", ".join(type_text(bt) for bt, _ in bcands)
                raise TypeCheckError(
                    "let-para", f"bound term has type {got}, expected "
                    f"$A", addr)
            out = []
            for bt, bd in paras:
                env2 = {**env, x: Bind(_NEEDS, bt.body)}
                for nt, nd in _synth(body, regions, env2, delta,
                                     addr + "1"):
                    out.append((nt, TypeDerivation("let-para", delta,
                                                   _short(t), nt, [bd, nd])))
            return _dedupe(out)

        case Gen(tv, body):
            if tv in _gen_fresh_tvars(env, regions):
                raise TypeCheckError(
                    "gen", f"type variable {tv} occurs free in the "
                    f"context", addr)
            out = []
            for bt, bd in _synth(body, regions, env, delta, addr + "0"):
                if not is_result_type(bt):
                    continue
                ty = Forall(tv, bt)
                out.append((ty, TypeDerivation("gen", delta, _short(t), ty,
                                               [bd])))
            if not out:
                raise TypeCheckError(
                    "gen", "cannot quantify a behaviour type", addr)
            return _dedupe(out)

        case Inst(body, b):
            if not is_result_type(b):
                raise TypeCheckError(
                    "inst", f"{type_text(b)} is not a result type", addr)
            if not type_wf(regions, b):
                raise TypeCheckError(
                    "inst", f"{type_text(b)} is not compatible with the "
                    f"region context", addr)
            bcands = _synth(body, regions, env, delta, addr + "0")
            out = []
            for bt, bd in bcands:
                if isinstance(bt, Forall):
                    ty = tsubst(bt.body, bt.tvar, b)
                    out.append((ty, TypeDerivation("inst", delta, _short(t),
                                                   ty, [bd])))
            if not out:
                got = ", ".join(type_text(bt) for bt, _ in bcands)
                raise TypeCheckError(
                    "inst", f"instantiated term has type {got}, expected "
                    f"a forall", addr)
            return _dedupe(out)

        case Get(r, loc):
            if loc:
                reg, dr, cty = _loc_entry(env, regions, r, "get", addr)
                if delta != dr:
                    raise TypeCheckError(
                        "get", f"get({r}) at depth {delta}, its region "
                        f"#{reg} is declared at depth {dr}", addr)
                return [(cty, TypeDerivation("get-loc", delta, _short(t),
                                             cty))]
            dr, ty = _region_entry(regions, r, "get", addr)
            if delta != dr:
                raise TypeCheckError(
                    "get", f"get(#{r}) at depth {delta}, region declared "
                    f"at depth {dr}", addr)
            return [(ty, TypeDerivation("get", delta, _short(t), ty))]

        case Set(r, arg, loc):
            if loc:
                reg, dr, cty = _loc_entry(env, regions, r, "set", addr)
                if delta != dr:
                    raise TypeCheckError(
                        "set", f"set({r}, ..) at depth {delta}, its region "
                        f"#{reg} is declared at depth {dr}", addr)
                acands = _synth(arg, regions, env, delta, addr + "0")
                for at, ad in acands:
                    if type_equal(at, cty):
                        return [(One(), TypeDerivation(
                            "set-loc", delta, _short(t), One(), [ad]))]
                raise TypeCheckError(
                    "set", f"assigned value has type "
                    f"{', '.join(type_text(at) for at, _ in acands)}, "
                    f"location {r} holds {type_text(cty)}", addr)
            dr, ty = _region_entry(regions, r, "set", addr)
            if delta != dr:
                raise TypeCheckError(
                    "set", f"set(#{r}) at depth {delta}, region declared "
                    f"at depth {dr}", addr)
            acands = _synth(arg, regions, env, delta, addr + "0")
            for at, ad in acands:
                if type_equal(at, ty):
                    return [(One(), TypeDerivation("set", delta, _short(t),
                                                   One(), [ad]))]
            raise TypeCheckError(
                "set", f"stored value has type "
                f"{', '.join(type_text(at) for at, _ in acands)}, region "
                f"#{r} holds {type_text(ty)}", addr)

        case Store(r, body, loc):
            if loc:
                if delta != 0:
                    raise TypeCheckError(
                        "store", f"stores are global: judged at depth 0, "
                        f"not {delta}", addr)
                reg, dr, cty = _loc_entry(env, regions, r, "store", addr)
                bcands = _synth(body, regions, env, dr, addr + "0")
                for bt, bd in bcands:
                    if type_equal(bt, cty):
                        beh = Behaviour()
                        return [(beh, TypeDerivation(
                            "store-loc", delta, _short(t), beh, [bd]))]
                raise TypeCheckError(
                    "store", f"store body has type "
                    f"{', '.join(type_text(bt) for bt, _ in bcands)}, "
                    f"location {r} holds {type_text(cty)}", addr)
            if delta != 0:
                raise TypeCheckError(
                    "store", f"stores are global: judged at depth 0, "
                    f"not {delta}", addr)
            dr, ty = _region_entry(regions, r, "store", addr)
            bcands = _synth(body, regions, env, dr, addr + "0")
            for bt, bd in bcands:
                if type_equal(bt, ty):
                    beh = Behaviour()
                    return [(beh, TypeDerivation("store", delta, _short(t),
                                                 beh, [bd]))]
            raise TypeCheckError(
                "store", f"store body has type "
                f"{', '.join(type_text(bt) for bt, _ in bcands)}, region "
                f"#{r} holds {type_text(ty)}", addr)

        case Par(left, right):
            lcands = _synth(left, regions, env, delta, addr + "0")
            rcands = _synth(right, regions, env, delta, addr + "1")
            out = []
            left_discard = (type(left) is Store
                            or any(type_equal(lt, One()) for lt, _ in lcands))
            right_discard = (type(right) is Store
                             or any(type_equal(rt, One())
                                    for rt, _ in rcands))
            if left_discard:
                for rt, rd in rcands:
                    out.append((rt, TypeDerivation("par-left", delta,
                                                   _short(t), rt,
                                                   [lcands[0][1], rd])))
            if right_discard:
                for lt, ld in lcands:
                    out.append((lt, TypeDerivation("par-left-sym", delta,
                                                   _short(t), lt,
                                                   [ld, rcands[0][1]])))
            beh = Behaviour()
            out.append((beh, TypeDerivation("par-right", delta, _short(t),
                                            beh,
                                            [lcands[0][1], rcands[0][1]])))
            return _dedupe(out)

        case Nu(x, reg, body):
            if reg is None:
                raise TypeCheckError(
                    "nu", f"location {x!r} has no region annotation", addr)
            dr, cty = _region_entry(regions, reg, "nu", addr)
            if not isinstance(cty, BangT):
                raise TypeCheckError(
                    "nu", f"locations need duplicable contents; region "
                    f"#{reg} holds {type_text(cty)}", addr)
            env2 = {**env, x: Bind(_READY, RegT(reg, cty))}
            out = []
            for bt, bd in _synth(body, regions, env2, delta, addr + "0"):
                out.append((bt, TypeDerivation("nu", delta, _short(t), bt,
                                               [bd])))
            return _dedupe(out)

        case Bag():
            raise TypeCheckError(
                "syntax", "unfolded terms are measure-only and are not "
                "typed", addr)

    raise TypeCheckError("syntax", f"cannot type {type(t).__name__}", addr)


def typecheck(p: Term, regions: RegionCtx,
              env: Optional[dict[str, tuple[str, Type]]] = None,
              delta: int = 0,
              expect: Optional[Type] = None) -> TypeDerivation:
    """Check p under the given region context, returning a derivation.
    With `expect` the derivation of that exact type is returned (or a
    TypeCheckError listing what was derivable)."""
    if not region_ctx_wf(regions):
        raise TypeCheckError("region-ctx", "a declared content type is not "
                             "compatible with the region context")
    e = make_env(env or {})
    for name, b in e.items():
        if not type_wf(regions, b.ty):
            raise TypeCheckError(
                "ctx", f"type of {name!r} is not compatible with the "
                f"region context")
    cands = _synth(p, regions, e, delta, "")
    if expect is None:
        return cands[0][1]
    for ty, d in cands:
        if type_equal(ty, expect):
            return d
    raise TypeCheckError(
        "goal", f"program types as "
        f"{', '.join(type_text(ty) for ty, _ in cands)}, not as "
        f"{type_text(expect)}")


def typeable(p: Term, regions: RegionCtx,
             env: Optional[dict[str, tuple[str, Type]]] = None,
             delta: int = 0, expect: Optional[Type] = None) -> bool:
    try:
        typecheck(p, regions, env, delta, expect)
        return True
    except TypeCheckError:
        return False


# re-exported type-level substitution (quantifier instantiation)
def subst_type(a: Type, b: Type, tv: str) -> Type:
    return tsubst(a, tv, b)


# --- erasure and mirrored stepping -------------------------------------------

def erase(t: Term) -> Term:
    """Strip quantifier nodes and binder annotations, leaving the plain
    program the reduction engine runs."""
    match t:
        case Gen(_, body):
            return erase(body)
        case Inst(body, _):
            return erase(body)
        case Lam(x, body, _):
            return Lam(x, erase(body))
        case _:
            kids = children(t)
            if not kids:
                return t
            return rebuild(t, [erase(k) for k in kids])


def _ann_tsubst(t: Term, tv: str, b: Type) -> Term:
    """Substitute a type for tv inside every annotation of t."""
    match t:
        case Lam(x, body, ann):
            na = tsubst(ann, tv, b) if ann is not None else None
            return Lam(x, _ann_tsubst(body, tv, b), na)
        case Gen(tv2, body):
            if tv2 == tv:
                return t
            if tv2 in free_tvars(b):
                fresh = tv2
                while fresh in free_tvars(b):
                    fresh += "'"
                body = _ann_tsubst(body, tv2, TVar(fresh))
                return Gen(fresh, _ann_tsubst(body, tv, b))
            return Gen(tv2, _ann_tsubst(body, tv, b))
        case Inst(body, ty):
            return Inst(_ann_tsubst(body, tv, b), tsubst(ty, tv, b))
        case _:
            kids = children(t)
            if not kids:
                return t
            return rebuild(t, [_ann_tsubst(k, tv, b) for k in kids])


def fuse(t: Term) -> Term:
    """Eliminate `(gen t. M)[B]` pairs by substituting B into M's
    annotations.  Typed programs keep their types; afterwards no
    quantifier node sits between a redex and its head."""
    kids = children(t)
    if kids:
        t = rebuild(t, [fuse(k) for k in kids])
    match t:
        case Inst(Gen(tv, body), b):
            return fuse(_ann_tsubst(body, tv, b))
        case _:
            return t


def lift_addr(ta: Term, addr: str) -> str:
    """Map an address in erase(ta) to the corresponding address in ta
    (quantifier wrappers add a 0 step each)."""
    out: list[str] = []
    node = ta
    for d in addr:
        while type(node) in (Gen, Inst):
            out.append("0")
            node = node.body if type(node) is Gen else node.body
        kids = children(node)
        i = int(d)
        if i >= len(kids):
            raise ReductionError(f"address {addr!r} does not lift")
        out.append(d)
        node = kids[i]
    while type(node) in (Gen, Inst):
        out.append("0")
        node = node.body
    return "".join(out)


def _sort_top_by_erasure(ta: Term) -> Term:
    if type(ta) is not Par:
        return ta
    elems = par_chain(ta)
    elems = sorted(elems, key=lambda e: (type(e) is Store, canon(erase(e))))
    return par_of_chain(elems)


def typed_step(ta: Term, rx: Redex) -> Term:
    """Apply a redex recorded on erase(ta) to the annotated program,
    keeping annotations and quantifier nodes intact."""
    addr = lift_addr(ta, rx.addr)
    node = subterm_at(ta, addr)
    match rx.rule:
        case "beta":
            match node:
                case App(Lam(x, body, _), arg):
                    out = replace_at(ta, addr, substitute(body, x, arg))
                case _:
                    raise ReductionError(
                        f"no beta redex at {addr!r} (run fuse first if the "
                        f"head is quantified)")
        case "bang":
            match node:
                case LetBang(x, Bang(b), body):
                    out = replace_at(ta, addr, substitute(body, x, b))
                case _:
                    raise ReductionError(f"no bang redex at {addr!r}")
        case "para":
            match node:
                case LetPara(x, Para(b), body):
                    out = replace_at(ta, addr, substitute(body, x, b))
                case _:
                    raise ReductionError(f"no para redex at {addr!r}")
        case "set":
            match node:
                case Set(r, arg, False):
                    filled = replace_at(ta, addr, Unit())
                    out = par_of_chain(par_chain(filled) + [Store(r, arg)])
                case _:
                    raise ReductionError(f"no set redex at {addr!r}")
        case "get":
            if rx.store_addr is None:
                raise ReductionError("get step lacks a store address")
            saddr = lift_addr(ta, rx.store_addr)
            store = subterm_at(ta, saddr)
            if type(store) is not Store:
                raise ReductionError(f"no store at {saddr!r}")
            filled = replace_at(ta, addr, store.body)
            elems = par_chain(filled)
            idx = _chain_index(filled, saddr)
            del elems[idx]
            out = par_of_chain(elems)
        case "gc":
            # drop the parallel component holding this unit (wrappers
            # included) from its own maximal chain, which may be nested
            elem = addr
            while elem:
                parent = subterm_at(ta, elem[:-1])
                if type(parent) is Par:
                    break
                if type(parent) in (Gen, Inst):
                    elem = elem[:-1]
                    continue
                raise ReductionError(f"unit at {addr!r} is not a parallel "
                                     f"component")
            if not elem:
                raise ReductionError("cannot erase the whole program")
            root = elem[:-1]
            while root and type(subterm_at(ta, root[:-1])) is Par:
                root = root[:-1]
            chain = subterm_at(ta, root)
            target = subterm_at(ta, elem)
            elems = [e for e in par_chain(chain) if e is not target]
            out = replace_at(ta, root, par_of_chain(elems)) if root \
                else par_of_chain(elems)
        case _:
            raise ReductionError(f"unknown rule {rx.rule!r}")
    return _sort_top_by_erasure(out)


def _chain_index(ta: Term, addr: str) -> int:
    """Index in the flattened top chain of the element at addr (which
    must be a spine position)."""
    elems = par_chain(ta)
    node = ta
    path = ""
    for d in addr:
        if type(node) is not Par:
            raise ReductionError(f"{addr!r} is not a top-chain position")
        node = node.left if d == "0" else node.right
        path += d
    target = subterm_at(ta, path)
    for i, e in enumerate(elems):
        if e is target:
            return i
    raise ReductionError(f"{addr!r} is not a top-chain element")


# --- trace-level properties ---------------------------------------------------

@dataclass(slots=True)
class PreservationReport:
    steps: int
    halted: bool
    final: Term              # annotated final state
    final_erased: Term


def check_preservation(ta: Term, regions: RegionCtx, expect: Type,
                       relation: str = "cbv", strategy: str = "cbv",
                       seed: Optional[int] = None,
                       fuel: int = 10 ** 6) -> PreservationReport:
    """Run the erasure of ta and re-check every intermediate state at
    the expected type, mirroring each step on the annotated program.
    Raises on the first state that stops typing."""
    ta = fuse(ta)
    rdepths = {r: d for r, (d, _) in regions.items()}
    typecheck(ta, regions, expect=expect)
    p = erase(ta)
    res = run(p, rdepths, relation=relation, strategy=strategy, seed=seed,
              fuel=fuel)
    ta = _sort_top_by_erasure(ta)
    for s in res.trace.steps:
        ta = typed_step(ta, Redex(s.addr, s.rule, s.depth,
                                  s.store_addr or None))
        if to_text(erase(ta)) != s.program:
            raise ReductionError(
                f"mirrored step {s.step} diverged from the trace")
        typecheck(ta, regions, expect=expect)
    return PreservationReport(len(res.trace.steps), res.halted, ta,
                              erase(ta))


@dataclass(slots=True)
class ProgressReport:
    values: int
    blocked: list[str]       # regions of blocked reads
    stores: int
    violations: list[str]    # printed threads fitting neither shape

    @property
    def ok(self) -> bool:
        return not self.violations


def progress_check(p: Term, regions: RegionCtx,
                   expect: Optional[Type] = None) -> ProgressReport:
    """For a typable program with no cbv redex: every thread must be a
    value or a read blocked on an empty region."""
    typecheck(p, regions, expect=expect)
    rep = classify_stuck(p)
    return ProgressReport(len(rep.values), [r for _, r in rep.blocked],
                          len(rep.stores), [to_text(v)
                                            for v in rep.violations])
