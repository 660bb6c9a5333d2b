"""Well-formedness: the polynomial depth system.

A program is well-formed when the judgement R; Gamma |-d P is derivable.
The checker walks the tree once, tracking the judgement depth and the
usage state of every bound variable:

  - a \\-bound variable must occur exactly once, across no modality;
  - a let-!-bound variable must occur at least once, each occurrence
    across exactly one modality (either ! or $);
  - a let-$-bound variable must occur exactly once, across exactly one
    $ (never inside a !-term);
  - a !-term may contain at most one free variable occurrence in total;
  - get/set on r require judgement depth R(r); stores sit at depth 0
    and their bodies are judged at depth R(r).

Free variables of the whole program are admitted whenever some usage
assignment works: all occurrences across no modality (usage \\), or all
across exactly one (usage ! or $, where an occurrence inside a !-term
forces usage !).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (App, Bag, Bang, Gen, Get, Inst, Lam, LetBang, LetPara,
                     LmtError, Nu, Par, Para, RegionConst, Set, Store, Term,
                     Unit, Var, SyntaxViolation, check_store_positions,
                     children, count_free, count_free_total)


class DepthError(LmtError):
    """Rejection by the depth system, naming the violated rule."""

    def __init__(self, rule: str, msg: str):
        super().__init__(f"[{rule}] {msg}")
        self.rule = rule


@dataclass(slots=True)
class Derivation:
    rule: str
    delta: int
    conclusion: str
    children: list["Derivation"] = field(default_factory=list)

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        lines = [f"{pad}{self.rule}: |-{self.delta} {self.conclusion}"]
        for c in self.children:
            lines.append(c.render(indent + 1))
        return "\n".join(lines)


def _short(t: Term, limit: int = 60) -> str:
    from .printer import to_text
    s = to_text(t)
    return s if len(s) <= limit else s[:limit - 3] + "..."


def infer_top_depth(p: Term, region_depths: dict[str, int]) -> int:
    """Pick the judgement depth of the root: 0 when the program contains a
    store or no region access at all, otherwise the depth that aligns the
    get/set occurrences with their regions."""
    constraints: set[int] = set()
    has_store = False

    def walk(t: Term, d: int) -> None:
        nonlocal has_store
        match t:
            case Store(region, body, loc):
                has_store = True
                walk(body, region_depths.get(region, 0) if not loc else d)
                return
            case Get(region, loc):
                if not loc and region in region_depths:
                    constraints.add(region_depths[region] - d)
                return
            case Set(region, _, loc):
                if not loc and region in region_depths:
                    constraints.add(region_depths[region] - d)
            case Bang(_) | Para(_):
                for k in children(t):
                    walk(k, d + 1)
                return
        for k in children(t):
            walk(k, d)

    walk(p, 0)
    if has_store or not constraints:
        return 0
    # with conflicting constraints any choice fails; pick one and let the
    # checker point at the offending occurrence
    return max(min(constraints), 0)


# usage states for bound variables
_LAM, _BANG, _PARA, _DEAD = "\\", "!", "$", "dead"

# requirement classes for free-variable occurrences
_REQ_BY_CROSSING = {(): frozenset("L"), ("!",): frozenset("B"),
                    ("$",): frozenset("BP")}


def check_wf(p: Term, region_depths: dict[str, int],
             delta: int | None = None) -> Derivation:
    """Return a derivation of R; Gamma |-delta p, or raise DepthError.
    delta=None infers the root judgement depth."""
    if delta is None:
        delta = infer_top_depth(p, region_depths)

    # free variable -> set of usages still satisfying all its occurrences
    free_reqs: dict[str, frozenset[str]] = {}

    def region_depth(r: str, what: str) -> int:
        if r not in region_depths:
            raise DepthError("region", f"region '#{r}' is not declared "
                                       f"(used in {what})")
        return region_depths[r]

    def cross(env: dict[str, str], kind: str) -> dict[str, str]:
        """Usage reclassing at a modality: ! keeps !-usage, $ keeps ! and
        $ usages; kept variables become \\-usage inside, the rest die."""
        keep = (_BANG,) if kind == "!" else (_BANG, _PARA)
        return {x: (_LAM if u in keep else _DEAD) for x, u in env.items()}

    def note_free(name: str, mods: tuple[str, ...]) -> None:
        req = _REQ_BY_CROSSING.get(mods[:1] if len(mods) == 1 else mods)
        if req is None:
            raise DepthError(
                "var", f"free variable '{name}' occurs across "
                f"{len(mods)} modalities (at most one possible)")
        have = free_reqs.get(name, frozenset("LBP"))
        have &= req
        if not have:
            raise DepthError(
                "var", f"no usage fits all occurrences of free variable "
                f"'{name}'")
        free_reqs[name] = have

    def check(t: Term, d: int, env: dict[str, str],
              mods: tuple[str, ...]) -> Derivation:
        match t:
            case Var(name):
                if name in env:
                    u = env[name]
                    if u == _BANG:
                        raise DepthError(
                            "var", f"variable '{name}' is bound by a let ! "
                            f"but occurs across no modality")
                    if u == _PARA:
                        raise DepthError(
                            "var", f"variable '{name}' is bound by a let $ "
                            f"but occurs across no modality")
                    if u == _DEAD:
                        raise DepthError(
                            "var", f"variable '{name}' occurs across a "
                            f"modality its usage cannot pass")
                else:
                    note_free(name, mods)
                return Derivation("var", d, name)
            case RegionConst(region):
                region_depth(region, "a term position")
                return Derivation("reg", d, f"#{region}")
            case Unit():
                return Derivation("unit", d, "*")
            case Lam(x, body, _):
                n = count_free(body, x)
                if n != 1:
                    raise DepthError(
                        "lam", f"'\\{x}' must bind exactly one occurrence, "
                        f"found {n} in {_short(body)}")
                sub = check(body, d, {**env, x: _LAM}, mods)
                return Derivation("lam", d, _short(t), [sub])
            case App(fn, arg):
                return Derivation("app", d, _short(t),
                                  [check(fn, d, env, mods),
                                   check(arg, d, env, mods)])
            case Bang(body):
                foa = count_free_total(body)
                if foa > 1:
                    raise DepthError(
                        "bang", f"!-term has {foa} free variable occurrences "
                        f"(at most one allowed): {_short(t)}")
                sub = check(body, d + 1, cross(env, "!"), mods + ("!",))
                return Derivation("bang", d, _short(t), [sub])
            case Para(body):
                sub = check(body, d + 1, cross(env, "$"), mods + ("$",))
                return Derivation("para", d, _short(t), [sub])
            case LetBang(x, bound, body):
                n = count_free(body, x)
                if n < 1:
                    raise DepthError(
                        "let!", f"'let !{x}' must bind at least one "
                        f"occurrence, found 0 in {_short(body)}")
                l = check(bound, d, env, mods)
                r = check(body, d, {**env, x: _BANG}, mods)
                return Derivation("let!", d, _short(t), [l, r])
            case LetPara(x, bound, body):
                n = count_free(body, x)
                if n != 1:
                    raise DepthError(
                        "let$", f"'let ${x}' must bind exactly one "
                        f"occurrence, found {n} in {_short(body)}")
                l = check(bound, d, env, mods)
                r = check(body, d, {**env, x: _PARA}, mods)
                return Derivation("let$", d, _short(t), [l, r])
            case Get(region, loc):
                if loc:
                    raise DepthError(
                        "get", "location variables are not part of the "
                        "region language (translate references first)")
                rd = region_depth(region, f"get(#{region})")
                if rd != d:
                    raise DepthError(
                        "stratification", f"get(#{region}) occurs at depth "
                        f"{d} but region '#{region}' is declared at depth "
                        f"{rd}")
                return Derivation("get", d, _short(t))
            case Set(region, arg, loc):
                if loc:
                    raise DepthError(
                        "set", "location variables are not part of the "
                        "region language (translate references first)")
                rd = region_depth(region, f"set(#{region}, ...)")
                if rd != d:
                    raise DepthError(
                        "stratification", f"set(#{region}, ...) occurs at "
                        f"depth {d} but region '#{region}' is declared at "
                        f"depth {rd}")
                sub = check(arg, d, env, mods)
                return Derivation("set", d, _short(t), [sub])
            case Store(region, body, loc):
                if loc:
                    raise DepthError(
                        "store", "location stores are not part of the "
                        "region language (translate references first)")
                if d != 0:
                    raise DepthError(
                        "store", f"store '#{region} <= ...' judged at depth "
                        f"{d}; stores are global and sit at depth 0")
                rd = region_depth(region, f"#{region} <= ...")
                sub = check(body, rd, env, mods)
                return Derivation("store", d, _short(t), [sub])
            case Par(left, right):
                return Derivation("par", d, _short(t),
                                  [check(left, d, env, mods),
                                   check(right, d, env, mods)])
            case Gen(_, body):
                # typing artifact, transparent for depths
                return Derivation("gen", d, _short(t),
                                  [check(body, d, env, mods)])
            case Inst(body, _):
                return Derivation("inst", d, _short(t),
                                  [check(body, d, env, mods)])
            case Nu(_, _, _):
                raise DepthError(
                    "syntax", "nu binders are not part of the region "
                    "language (translate references first)")
            case Bag(_, _):
                raise DepthError("syntax",
                                 "unfolded programs cannot be checked")
        raise TypeError(f"not a term: {t!r}")

    try:
        check_store_positions(p)
    except SyntaxViolation as e:
        raise DepthError("store", str(e)) from None
    return check(p, delta, {}, ())


def is_wf(p: Term, region_depths: dict[str, int],
          delta: int | None = None) -> bool:
    try:
        check_wf(p, region_depths, delta)
        return True
    except DepthError:
        return False
