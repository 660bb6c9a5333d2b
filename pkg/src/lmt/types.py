"""Type syntax and the judgements relating types to region contexts.

Arrow effect annotations are carried through parsing and printing but
never constrain checking; equality is modulo effects and alpha.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .syntax import LmtError


class TypeError_(LmtError):
    pass


@dataclass(frozen=True, slots=True)
class Type:
    pass


@dataclass(frozen=True, slots=True)
class TVar(Type):
    name: str


@dataclass(frozen=True, slots=True)
class One(Type):
    pass


@dataclass(frozen=True, slots=True)
class Behaviour(Type):
    pass


@dataclass(frozen=True, slots=True)
class Arrow(Type):
    dom: Type
    cod: Type
    # two effect sets; compared modulo these
    eff: tuple[frozenset[str], frozenset[str]] = field(
        default=(frozenset(), frozenset()))


@dataclass(frozen=True, slots=True)
class BangT(Type):
    body: Type


@dataclass(frozen=True, slots=True)
class ParaT(Type):
    body: Type


@dataclass(frozen=True, slots=True)
class Forall(Type):
    tvar: str
    body: Type


@dataclass(frozen=True, slots=True)
class RegT(Type):
    region: str
    content: Type


# A region context maps region name -> (depth, content type).
RegionCtx = dict[str, tuple[int, Type]]


def type_children(a: Type) -> tuple[Type, ...]:
    match a:
        case TVar() | One() | Behaviour():
            return ()
        case Arrow(dom, cod, _):
            return (dom, cod)
        case BangT(body) | ParaT(body) | Forall(_, body):
            return (body,)
        case RegT(_, content):
            return (content,)
    raise TypeError(f"not a type: {a!r}")


def free_tvars(a: Type) -> frozenset[str]:
    match a:
        case TVar(name):
            return frozenset((name,))
        case Forall(t, body):
            return free_tvars(body) - {t}
        case _:
            out: frozenset[str] = frozenset()
            for k in type_children(a):
                out |= free_tvars(k)
            return out


def type_regions(a: Type) -> frozenset[str]:
    """Region constants occurring anywhere in a."""
    match a:
        case RegT(region, content):
            return type_regions(content) | {region}
        case _:
            out: frozenset[str] = frozenset()
            for k in type_children(a):
                out |= type_regions(k)
            return out


def tsubst(a: Type, t: str, b: Type) -> Type:
    """a[b/t], capture avoiding over forall binders."""
    fv_b = free_tvars(b)
    match a:
        case TVar(name):
            return b if name == t else a
        case One() | Behaviour():
            return a
        case Arrow(dom, cod, eff):
            return Arrow(tsubst(dom, t, b), tsubst(cod, t, b), eff)
        case BangT(body):
            return BangT(tsubst(body, t, b))
        case ParaT(body):
            return ParaT(tsubst(body, t, b))
        case Forall(tv, body):
            if tv == t:
                return a
            if tv in fv_b:
                fresh = tv
                avoid = fv_b | free_tvars(body)
                while fresh in avoid:
                    fresh += "'"
                body = tsubst(body, tv, TVar(fresh))
                tv = fresh
            return Forall(tv, tsubst(body, t, b))
        case RegT(region, content):
            return RegT(region, tsubst(content, t, b))
    raise TypeError(f"not a type: {a!r}")


def type_canon(a: Type) -> str:
    """Canonical string: forall binders numbered, effects dropped."""
    def go(x: Type, env: dict[str, int], lvl: int) -> str:
        match x:
            case TVar(name):
                i = env.get(name)
                return f"b{lvl - i}" if i is not None else f"f:{name}"
            case One():
                return "1"
            case Behaviour():
                return "B"
            case Arrow(dom, cod, _):
                return f"({go(dom, env, lvl)}>{go(cod, env, lvl)})"
            case BangT(body):
                return f"!{go(body, env, lvl)}"
            case ParaT(body):
                return f"${go(body, env, lvl)}"
            case Forall(t, body):
                return f"V({go(body, {**env, t: lvl + 1}, lvl + 1)})"
            case RegT(region, content):
                return f"R({region},{go(content, env, lvl)})"
        raise TypeError(f"not a type: {x!r}")
    return go(a, {}, 0)


def type_equal(a: Type, b: Type) -> bool:
    """Equality modulo alpha on forall binders and modulo effects."""
    return a is b or type_canon(a) == type_canon(b)


def is_result_type(a: Type) -> bool:
    return not isinstance(a, Behaviour)


# --- compatibility and well-formedness ---------------------------------------

def compat(R: RegionCtx, a: Type) -> bool:
    """R and a are compatible: every Reg type in a names a declared region
    whose declared content matches syntactically, and quantified variables
    stay out of R."""
    match a:
        case TVar() | One() | Behaviour():
            return True
        case Arrow(dom, cod, _):
            return compat(R, dom) and compat(R, cod)
        case BangT(body) | ParaT(body):
            return compat(R, body)
        case RegT(region, content):
            if region not in R:
                return False
            _, declared = R[region]
            return type_equal(declared, content)
        case Forall(t, body):
            if any(t in free_tvars(c) for _, c in R.values()):
                return False
            return compat(R, body)
    raise TypeError(f"not a type: {a!r}")


def region_ctx_wf(R: RegionCtx) -> bool:
    """R is well-formed when every declared content type is compatible
    with R itself.  Regions declared without a content type do not
    constrain anything until used."""
    return all(compat(R, c) for _, c in R.values() if c is not None)


def type_wf(R: RegionCtx, a: Type) -> bool:
    return region_ctx_wf(R) and compat(R, a)


def ctx_regions_ok(R: RegionCtx, types: list[Type]) -> bool:
    return all(type_wf(R, a) for a in types)
