"""Round-trip printer for programs and types."""

from __future__ import annotations

from .syntax import (App, Bag, Bang, Gen, Get, Inst, Lam, LetBang, LetPara,
                     Nu, Par, Para, RegionConst, Set, Store, Term, Unit, Var,
                     par_chain)
from .types import (Arrow, BangT, Behaviour, Forall, One, ParaT, RegT, TVar,
                    Type)

# precedence levels
_PROG, _TERM, _APP, _TIGHT = 0, 1, 2, 3


def type_text(a: Type, prec: int = 0) -> str:
    # 0 = forall/arrow position, 1 = modal operand, 2 = Reg content / atom
    match a:
        case TVar(name):
            return name
        case One():
            return "1"
        case Behaviour():
            return "B"
        case Forall(t, body):
            s = f"forall {t}. {type_text(body)}"
            return f"({s})" if prec > 0 else s
        case Arrow(dom, cod, (e1, e2)):
            arrow = "-o"
            if e1 or e2:
                arrow += ("{" + ", ".join(f"#{r}" for r in sorted(e1)) + "; "
                          + ", ".join(f"#{r}" for r in sorted(e2)) + "}")
            s = f"{type_text(dom, 1)} {arrow} {type_text(cod)}"
            return f"({s})" if prec > 0 else s
        case BangT(body):
            return f"!{type_text(body, 2)}"
        case ParaT(body):
            return f"${type_text(body, 2)}"
        case RegT(region, content):
            s = f"Reg #{region} {type_text(content, 2)}"
            return f"({s})" if prec > 1 else s
    raise TypeError(f"not a type: {a!r}")


def _atomish(t: Term) -> bool:
    """Self-delimiting at tight position."""
    return type(t) in (Var, Unit, RegionConst, Get, Set, Bang, Para, Inst)


def to_text(t: Term, prec: int = _PROG) -> str:
    match t:
        case Var(name):
            return name
        case RegionConst(region):
            return f"#{region}"
        case Unit():
            return "*"
        case Get(target, loc):
            return f"get({target if loc else '#' + target})"
        case Set(target, arg, loc):
            tgt = target if loc else "#" + target
            return f"set({tgt}, {to_text(arg, _PROG)})"
        case Store(target, body, loc):
            tgt = target if loc else "#" + target
            s = f"{tgt} <= {to_text(body, _TERM)}"
            return f"({s})" if prec > _PROG else s
        case Par():
            s = " || ".join(to_text(e, _TERM) if type(e) is not Store
                            else to_text(e, _PROG)
                            for e in par_chain(t))
            return f"({s})" if prec > _PROG else s
        case Lam(x, body, ann):
            a = f" : {type_text(ann)}" if ann is not None else ""
            s = f"\\{x}{a}. {to_text(body, _TERM)}"
            return f"({s})" if prec > _TERM else s
        case LetBang(x, bound, body):
            s = f"let !{x} = {to_text(bound, _TERM)} in {to_text(body, _TERM)}"
            return f"({s})" if prec > _TERM else s
        case LetPara(x, bound, body):
            s = f"let ${x} = {to_text(bound, _TERM)} in {to_text(body, _TERM)}"
            return f"({s})" if prec > _TERM else s
        case Nu(x, region, body):
            r = f" : #{region}" if region is not None else ""
            s = f"nu {x}{r}. {to_text(body, _TERM)}"
            return f"({s})" if prec > _TERM else s
        case Gen(tv, body):
            s = f"gen {tv}. {to_text(body, _TERM)}"
            return f"({s})" if prec > _TERM else s
        case App(fn, arg):
            s = f"{to_text(fn, _APP)} {to_text(arg, _TIGHT)}"
            return f"({s})" if prec > _APP else s
        case Bang(body):
            inner = (to_text(body, _TIGHT) if _atomish(body)
                     else f"({to_text(body)})")
            return f"!{inner}"
        case Para(body):
            inner = (to_text(body, _TIGHT) if _atomish(body)
                     else f"({to_text(body)})")
            return f"${inner}"
        case Inst(body, ty):
            # a bare !/$ head would swallow the brackets on re-parse
            tight = _atomish(body) and type(body) not in (Bang, Para)
            inner = to_text(body, _TIGHT) if tight else f"({to_text(body)})"
            return f"{inner}[{type_text(ty)}]"
        case Bag(n, item):
            # measure-only node; not part of the surface grammar
            return f"<bag {n} of {to_text(item, _TERM)}>"
    raise TypeError(f"not a term: {t!r}")


def header_text(region_depths: dict[str, int],
                region_types: dict[str, Type] | None = None) -> str:
    region_types = region_types or {}
    lines = []
    for r, d in sorted(region_depths.items()):
        line = f"region #{r} : depth = {d}"
        if r in region_types:
            line += f", type = {type_text(region_types[r])}"
        lines.append(line)
    return "\n".join(lines)


def source_text(program: Term, region_depths: dict[str, int],
                region_types: dict[str, Type] | None = None) -> str:
    head = header_text(region_depths, region_types)
    body = to_text(program)
    return (head + "\n\n" + body + "\n") if head else (body + "\n")
