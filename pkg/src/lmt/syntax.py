"""Term syntax: nodes, addresses, measures, substitution, structural equivalence.

Programs are trees of the node classes below.  Every node is treated as
immutable after construction; measure caches rely on that.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional


class LmtError(Exception):
    """Base for all analysis / evaluation errors."""


class SyntaxViolation(LmtError):
    pass


class SubstitutionError(LmtError):
    pass


# --- nodes ------------------------------------------------------------------

# Shared mutable-cache slots (_w weighted size, _sp plain size, _sh shape
# hash) are written at most once per node, so sharing subtrees is safe.

_CACHE_SLOTS = ("_w", "_sp", "_sh")


@dataclass(eq=False, slots=True)
class Term:
    pass


@dataclass(eq=False, slots=True)
class Var(Term):
    name: str
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class RegionConst(Term):
    """A region constant appearing in term position."""
    region: str
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class Unit(Term):
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class Lam(Term):
    binder: str
    body: Term
    ann: Optional[object] = None  # optional type annotation, erased for evaluation
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class App(Term):
    fn: Term
    arg: Term
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class Bang(Term):
    body: Term
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class Para(Term):
    """The paragraph modality (written `$M` in the surface syntax)."""
    body: Term
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class LetBang(Term):
    binder: str
    bound: Term
    body: Term
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class LetPara(Term):
    binder: str
    bound: Term
    body: Term
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class Get(Term):
    """Read a location.  `target` is a region name when `loc` is False,
    otherwise a location variable (reference syntax)."""
    target: str
    loc: bool = False
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class Set(Term):
    target: str
    arg: Term
    loc: bool = False
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class Store(Term):
    """A store `r <= M` (or `x <= M` with loc=True).  Top level only."""
    target: str
    body: Term
    loc: bool = False
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class Par(Term):
    left: Term
    right: Term
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class Nu(Term):
    """Reference binder `nu x : #r . M`; region names the target used when
    compiling references away."""
    binder: str
    region: Optional[str]
    body: Term
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class Gen(Term):
    """Type generalization `gen t. M`."""
    tvar: str
    body: Term
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class Inst(Term):
    """Type instantiation `M [A]`."""
    body: Term
    ty: object
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


@dataclass(eq=False, slots=True)
class Bag(Term):
    """`count` indistinguishable copies of `item`.  Produced only by
    unfolding; never evaluated."""
    count: int
    item: Term
    _w: Optional[int] = field(default=None, repr=False)
    _sp: Optional[int] = field(default=None, repr=False)
    _sh: Optional[int] = field(default=None, repr=False)


# --- children / rebuild -----------------------------------------------------

def children(t: Term) -> tuple[Term, ...]:
    """Subterm children in address order.  let-binders put the bound term
    at child 0 and the body at child 1; get is a leaf."""
    match t:
        case Var() | RegionConst() | Unit() | Get():
            return ()
        case Lam(_, body) | Bang(body) | Para(body):
            return (body,)
        case App(fn, arg):
            return (fn, arg)
        case LetBang(_, bound, body) | LetPara(_, bound, body):
            return (bound, body)
        case Set(_, arg):
            return (arg,)
        case Store(_, body):
            return (body,)
        case Par(left, right):
            return (left, right)
        case Nu(_, _, body) | Gen(_, body):
            return (body,)
        case Inst(body, _):
            return (body,)
        case Bag(_, item):
            return (item,)
    raise TypeError(f"not a term: {t!r}")


def rebuild(t: Term, kids: tuple[Term, ...]) -> Term:
    """Copy of t with children replaced (same arity)."""
    match t:
        case Var() | RegionConst() | Unit() | Get():
            return t
        case Lam(b, _, ann):
            return Lam(b, kids[0], ann)
        case App():
            return App(kids[0], kids[1])
        case Bang():
            return Bang(kids[0])
        case Para():
            return Para(kids[0])
        case LetBang(b, _, _):
            return LetBang(b, kids[0], kids[1])
        case LetPara(b, _, _):
            return LetPara(b, kids[0], kids[1])
        case Set(r, _, loc):
            return Set(r, kids[0], loc)
        case Store(r, _, loc):
            return Store(r, kids[0], loc)
        case Par():
            return Par(kids[0], kids[1])
        case Nu(b, r, _):
            return Nu(b, r, kids[0])
        case Gen(tv, _):
            return Gen(tv, kids[0])
        case Inst(_, ty):
            return Inst(kids[0], ty)
        case Bag(n, _):
            return Bag(n, kids[0])
    raise TypeError(f"not a term: {t!r}")


# --- addresses --------------------------------------------------------------
# An address is a string over {'0','1'}: '' is the root, unary children are
# at '0', binary children at '0' and '1'.

def subterm_at(t: Term, addr: str) -> Term:
    for c in addr:
        kids = children(t)
        i = int(c)
        if i >= len(kids):
            raise KeyError(f"no subterm at address {addr!r}")
        t = kids[i]
    return t


def replace_at(t: Term, addr: str, new: Term) -> Term:
    if addr == "":
        return new
    kids = children(t)
    i = int(addr[0])
    if i >= len(kids):
        raise KeyError(f"no subterm at address {addr!r}")
    replaced = replace_at(kids[i], addr[1:], new)
    return rebuild(t, kids[:i] + (replaced,) + kids[i + 1:])


def addresses(t: Term) -> Iterator[tuple[str, Term]]:
    """All (address, subterm) pairs, preorder, lexicographic by address."""
    stack = [("", t)]
    while stack:
        addr, node = stack.pop()
        yield addr, node
        kids = children(node)
        for i in range(len(kids) - 1, -1, -1):
            stack.append((addr + str(i), kids[i]))


# --- revised depth ----------------------------------------------------------

def depth_of(t: Term, addr: str, region_depths: dict[str, int]) -> int:
    """Depth of the occurrence at addr: modal constructors (! and $)
    strictly above it each add 1, and crossing a store on region r adds
    the declared depth of r."""
    d = 0
    node = t
    for c in addr:
        match node:
            case Bang() | Para():
                d += 1
            case Store(target, _, loc):
                if loc:
                    raise LmtError("location store has no declared depth")
                if target not in region_depths:
                    raise LmtError(f"region {target!r} has no declared depth")
                d += region_depths[target]
        node = children(node)[int(c)]
    return d


def depth(t: Term, region_depths: dict[str, int]) -> int:
    """Maximum occurrence depth over the whole program."""
    best = 0
    stack = [(t, 0)]
    while stack:
        node, d = stack.pop()
        if d > best:
            best = d
        bump = 0
        match node:
            case Bang() | Para():
                bump = 1
            case Store(target, _, loc):
                if loc:
                    raise LmtError("location store has no declared depth")
                if target not in region_depths:
                    raise LmtError(f"region {target!r} has no declared depth")
                bump = region_depths[target]
        for k in children(node):
            stack.append((k, d + bump))
    return best


# --- sizes ------------------------------------------------------------------

def size(t: Term) -> int:
    """Plain size: every node counts 1.  A Bag of k items counts k times
    its item."""
    if t._sp is not None:
        return t._sp
    match t:
        case Bag(n, item):
            s = n * size(item)
        case _:
            s = 1 + sum(size(k) for k in children(t))
    t._sp = s
    return s


def weighted_size(t: Term) -> int:
    """Weighted size: parallel and store nodes count 0, set counts 2,
    everything else 1.  Bags multiply."""
    if t._w is not None:
        return t._w
    match t:
        case Par() | Store():
            w = sum(weighted_size(k) for k in children(t))
        case Set():
            w = 2 + sum(weighted_size(k) for k in children(t))
        case Bag(n, item):
            w = n * weighted_size(item)
        case _:
            w = 1 + sum(weighted_size(k) for k in children(t))
    t._w = w
    return w


# --- free variables and occurrence counts -----------------------------------

def free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(name):
            return frozenset((name,))
        case Lam(b, body):
            return free_vars(body) - {b}
        case LetBang(b, bound, body) | LetPara(b, bound, body):
            return free_vars(bound) | (free_vars(body) - {b})
        case Nu(b, _, body):
            return free_vars(body) - {b}
        case Get(target, loc) if loc:
            return frozenset((target,))
        case Set(target, arg, loc):
            fv = free_vars(arg)
            return fv | {target} if loc else fv
        case Store(target, body, loc):
            fv = free_vars(body)
            return fv | {target} if loc else fv
        case _:
            out: frozenset[str] = frozenset()
            for k in children(t):
                out |= free_vars(k)
            return out


def count_free(t: Term, x: str) -> int:
    """Number of free occurrences of x (location positions in get/set/store
    count as occurrences)."""
    match t:
        case Var(name):
            return 1 if name == x else 0
        case Lam(b, body):
            return 0 if b == x else count_free(body, x)
        case LetBang(b, bound, body) | LetPara(b, bound, body):
            n = count_free(bound, x)
            if b != x:
                n += count_free(body, x)
            return n
        case Nu(b, _, body):
            return 0 if b == x else count_free(body, x)
        case Get(target, loc):
            return 1 if loc and target == x else 0
        case Set(target, arg, loc):
            n = count_free(arg, x)
            if loc and target == x:
                n += 1
            return n
        case Store(target, body, loc):
            n = count_free(body, x)
            if loc and target == x:
                n += 1
            return n
        case Bag(n, item):
            return n * count_free(item, x)
        case _:
            return sum(count_free(k, x) for k in children(t))


def count_free_total(t: Term) -> int:
    """Total number of free-variable occurrences in t (the `foa` measure).
    Occurrences inside a Bag of k items count k times."""
    total = 0
    # (term, set of bound names in scope, multiplicity)
    stack: list[tuple[Term, frozenset[str], int]] = [(t, frozenset(), 1)]
    while stack:
        node, bound, mul = stack.pop()
        match node:
            case Var(name):
                if name not in bound:
                    total += mul
            case Lam(b, body):
                stack.append((body, bound | {b}, mul))
            case LetBang(b, bnd, body) | LetPara(b, bnd, body):
                stack.append((bnd, bound, mul))
                stack.append((body, bound | {b}, mul))
            case Nu(b, _, body):
                stack.append((body, bound | {b}, mul))
            case Get(target, loc):
                if loc and target not in bound:
                    total += mul
            case Set(target, arg, loc):
                if loc and target not in bound:
                    total += mul
                stack.append((arg, bound, mul))
            case Store(target, body, loc):
                if loc and target not in bound:
                    total += mul
                stack.append((body, bound, mul))
            case Bag(n, item):
                stack.append((item, bound, mul * n))
            case _:
                for k in children(node):
                    stack.append((k, bound, mul))
    return total


# --- substitution -----------------------------------------------------------

def fresh_name(base: str, avoid: frozenset[str]) -> str:
    n = base
    while n in avoid:
        n += "'"
    return n


def _subst_target(target: str, loc: bool, x: str, v: Term) -> tuple[str, bool]:
    """Substitute into a get/set/store target position.  Only a variable or
    region constant may land there."""
    if not (loc and target == x):
        return target, loc
    match v:
        case Var(name):
            return name, True
        case RegionConst(region):
            return region, False
        case _:
            raise SubstitutionError(
                f"cannot substitute a compound term for location {x!r}")


def substitute(t: Term, x: str, v: Term) -> Term:
    """t[v/x], capture avoiding.  Binders shadowing x stop the walk; binders
    whose name occurs free in v are renamed with appended apostrophes."""
    fv_v = free_vars(v)

    def go(node: Term) -> Term:
        match node:
            case Var(name):
                return v if name == x else node
            case Lam(b, body, ann):
                if b == x:
                    return node
                if b in fv_v:
                    # the fresh name must also dodge x, or go() captures it
                    nb = fresh_name(b, fv_v | free_vars(body) | {x})
                    body = substitute(body, b, Var(nb))
                    b = nb
                return Lam(b, go(body), ann)
            case LetBang(b, bound, body) | LetPara(b, bound, body):
                cls = type(node)
                nbound = go(bound)
                if b == x:
                    return cls(b, nbound, body)
                if b in fv_v:
                    nb = fresh_name(b, fv_v | free_vars(body) | {x})
                    body = substitute(body, b, Var(nb))
                    b = nb
                return cls(b, nbound, go(body))
            case Nu(b, r, body):
                if b == x:
                    return node
                if b in fv_v:
                    nb = fresh_name(b, fv_v | free_vars(body) | {x})
                    body = substitute(body, b, Var(nb))
                    b = nb
                return Nu(b, r, go(body))
            case Get(target, loc):
                nt, nl = _subst_target(target, loc, x, v)
                return Get(nt, nl) if (nt, nl) != (target, loc) else node
            case Set(target, arg, loc):
                nt, nl = _subst_target(target, loc, x, v)
                return Set(nt, go(arg), nl)
            case Store(target, body, loc):
                nt, nl = _subst_target(target, loc, x, v)
                return Store(nt, go(body), nl)
            case _:
                kids = children(node)
                if not kids:
                    return node
                return rebuild(node, tuple(go(k) for k in kids))

    return go(t)


# --- structural equivalence -------------------------------------------------
# Terms are compared modulo alpha renaming and modulo commutativity and
# associativity of parallel composition at every position.

def par_chain(t: Term) -> list[Term]:
    """Flatten nested Par nodes into a list of non-Par elements."""
    out: list[Term] = []
    stack = [t]
    while stack:
        n = stack.pop()
        if type(n) is Par:
            stack.append(n.right)
            stack.append(n.left)
        else:
            out.append(n)
    return out


def par_of_chain(elems: list[Term]) -> Term:
    """Right-nested Par of a nonempty chain."""
    if not elems:
        raise ValueError("empty parallel chain")
    t = elems[-1]
    for e in reversed(elems[:-1]):
        t = Par(e, t)
    return t


def shape_hash(t: Term) -> int:
    """Name-blind hash invariant under alpha and parallel reshuffling:
    parallel chains combine children by sum."""
    if t._sh is not None:
        return t._sh
    match t:
        case Par():
            h = sum(shape_hash(e) for e in par_chain(t)) & 0x7FFFFFFFFFFFFFFF
            h = hash(("par", h))
        case Var():
            h = hash("var")
        case RegionConst(region):
            h = hash(("reg", region))
        case Get(target, loc):
            h = hash(("get", None if loc else target))
        case Set(target, _, loc):
            h = hash(("set", None if loc else target, shape_hash(t.arg)))
        case Store(target, _, loc):
            h = hash(("store", None if loc else target, shape_hash(t.body)))
        case Bag(n, item):
            h = hash(("bag", n, shape_hash(item)))
        case Inst(body, _):
            h = hash(("inst", shape_hash(body)))
        case _:
            h = hash((type(t).__name__,) + tuple(shape_hash(k) for k in children(t)))
    t._sh = h
    return h


def canon(t: Term) -> str:
    """Canonical string: de Bruijn binders, parallel chains sorted."""
    def go(node: Term, env: dict[str, int], lvl: int) -> str:
        match node:
            case Var(name):
                i = env.get(name)
                return f"b{lvl - i}" if i is not None else f"f:{name}"
            case RegionConst(region):
                return f"#r:{region}"
            case Unit():
                return "*"
            case Lam(b, body):
                return f"L({go(body, {**env, b: lvl + 1}, lvl + 1)})"
            case App(fn, arg):
                return f"A({go(fn, env, lvl)},{go(arg, env, lvl)})"
            case Bang(body):
                return f"!({go(body, env, lvl)})"
            case Para(body):
                return f"$({go(body, env, lvl)})"
            case LetBang(b, bound, body):
                return (f"LB({go(bound, env, lvl)},"
                        f"{go(body, {**env, b: lvl + 1}, lvl + 1)})")
            case LetPara(b, bound, body):
                return (f"LP({go(bound, env, lvl)},"
                        f"{go(body, {**env, b: lvl + 1}, lvl + 1)})")
            case Get(target, loc):
                tgt = go(Var(target), env, lvl) if loc else f"#{target}"
                return f"G({tgt})"
            case Set(target, arg, loc):
                tgt = go(Var(target), env, lvl) if loc else f"#{target}"
                return f"S({tgt},{go(arg, env, lvl)})"
            case Store(target, body, loc):
                tgt = go(Var(target), env, lvl) if loc else f"#{target}"
                return f"W({tgt},{go(body, env, lvl)})"
            case Par():
                parts = sorted(go(e, env, lvl) for e in par_chain(node))
                return "P(" + ",".join(parts) + ")"
            case Nu(b, r, body):
                return f"N({r},{go(body, {**env, b: lvl + 1}, lvl + 1)})"
            case Gen(tv, body):
                return f"Gn({tv},{go(body, env, lvl)})"
            case Inst(body, ty):
                return f"I({go(body, env, lvl)},{ty})"
            case Bag(n, item):
                return f"Bg({n},{go(item, env, lvl)})"
        raise TypeError(f"not a term: {node!r}")

    return go(t, {}, 0)


def _exact_eq(a: Term, b: Term) -> bool:
    """Name-sensitive structural equality (no alpha, no parallel shuffle)."""
    if a is b:
        return True
    if type(a) is not type(b):
        return False
    match a:
        case Var(n):
            return n == b.name
        case RegionConst(r):
            return r == b.region
        case Unit():
            return True
        case Lam(bn, _, _):
            if bn != b.binder:
                return False
        case LetBang(bn, _, _) | LetPara(bn, _, _):
            if bn != b.binder:
                return False
        case Get(tg, lc):
            return tg == b.target and lc == b.loc
        case Set(tg, _, lc) | Store(tg, _, lc):
            if tg != b.target or lc != b.loc:
                return False
        case Nu(bn, r, _):
            if bn != b.binder or r != b.region:
                return False
        case Gen(tv, _):
            if tv != b.tvar:
                return False
        case Inst(_, ty):
            if ty != b.ty:
                return False
        case Bag(n, _):
            if n != b.count:
                return False
    ka, kb = children(a), children(b)
    return len(ka) == len(kb) and all(_exact_eq(x, y) for x, y in zip(ka, kb))


def struct_equiv(a: Term, b: Term) -> bool:
    """Equality modulo alpha and parallel commutativity/associativity.
    Cheap tiers first: identity, cached sizes, shape hash, exact named
    compare, then canonical strings."""
    if a is b:
        return True
    if weighted_size(a) != weighted_size(b) or size(a) != size(b):
        return False
    if shape_hash(a) != shape_hash(b):
        return False
    if _exact_eq(a, b):
        return True
    return canon(a) == canon(b)


def sort_top_chain(t: Term) -> Term:
    """Canonical order for the top-level parallel chain (stores after plain
    terms, then by canonical string).  Identity on non-parallel programs."""
    if type(t) is not Par:
        return t
    elems = par_chain(t)
    elems = sorted(elems, key=lambda e: (type(e) is Store, canon(e)))
    return par_of_chain(elems)


def is_store(t: Term) -> bool:
    return type(t) is Store


def store_free(t: Term) -> bool:
    """True when no Store node occurs anywhere in t."""
    return all(not is_store(n) for _, n in addresses(t))


def check_store_positions(t: Term) -> None:
    """Stores may appear only in the top-level parallel chain.  Raises
    SyntaxViolation otherwise."""
    for e in par_chain(t):
        if is_store(e):
            if not store_free(e.body):
                raise SyntaxViolation("store nested inside a store body")
        else:
            if not store_free(e):
                raise SyntaxViolation("store below an operator")
