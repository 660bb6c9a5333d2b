"""Church-style data and the concurrent update demos.

Builders return source text so the same artifacts can be parsed, put in
corpus files, typechecked (typed=True emits annotations, `gen` and type
applications) or run (typed=False, or erase the typed form).  Numbers
iterate a !-boxed step function under one paragraph, so arithmetic
stays inside the depth discipline; lists fold the same way.

The update demos bind locations holding boxed numbers, read them, and
write back the read value plus two.  Because writes store the unevaluated
sum, stores end up holding nested thunks; `decode_stores` normalizes
them away.
"""

from __future__ import annotations

from typing import Optional

from .parser import parse_program
from .reduction import run
from .syntax import (App, Bang, LetBang, Lam, Para, Store, Term, Var)
from .typecheck import erase
from .refs import split_nu, _chain_addrs


def nat_type_src(tv: str = "t") -> str:
    return f"forall {tv}. !({tv} -o {tv}) -o $({tv} -o {tv})"


def word_type_src(tv: str = "t") -> str:
    return (f"forall {tv}. !({tv} -o {tv}) -o !({tv} -o {tv}) "
            f"-o $({tv} -o {tv})")


def list_type_src(elem_ty: str, tv: str = "s") -> str:
    return f"forall {tv}. !(({elem_ty}) -o {tv} -o {tv}) -o $({tv} -o {tv})"


def _iterate(fn: str, n: int, base: str) -> str:
    out = base
    for _ in range(n):
        out = f"{fn} ({out})" if " " in out else f"{fn} {out}"
    return out


def church_nat(n: int, typed: bool = True) -> str:
    """n as an iterator: apply the boxed step n times under a paragraph.

    Zero never uses its step function, so zero is runnable but falls
    outside the well-formedness discipline (binders must be used)."""
    spine = _iterate("f", n, "x")
    if not typed:
        return f"\\!f. $(\\x. {spine})"
    return (f"gen t. \\!f : !(t -o t). $(\\x : t. {spine})")


def nat_add(typed: bool = True) -> str:
    """Addition: run both numbers on the same boxed step and compose."""
    if not typed:
        return ("\\m. \\n. \\!f. let $y = m !f in let $z = n !f in "
                "$(\\x. y (z x))")
    nat = nat_type_src()
    return (f"\\m : {nat}. \\n : {nat}. gen t. \\!f : !(t -o t). "
            f"let $y = m [t] !f in let $z = n [t] !f in "
            f"$(\\x : t. y (z x))")


def bin_word(bits: str, typed: bool = True) -> str:
    """A binary word over two boxed steps, one per letter.  The empty
    word uses neither and is not well formed, like zero."""
    assert set(bits) <= {"0", "1"}
    spine = "x"
    for b in reversed(bits):
        fn = "a" if b == "0" else "b"
        spine = f"{fn} ({spine})" if " " in spine else f"{fn} {spine}"
    if not typed:
        return f"\\!a. \\!b. $(\\x. {spine})"
    return (f"gen t. \\!a : !(t -o t). \\!b : !(t -o t). "
            f"$(\\x : t. {spine})")


def church_list(elems: list[str], elem_ty: str = "1",
                typed: bool = True) -> str:
    """A list as its own fold: feed each element to the boxed cons.
    The accumulator binder is `acc` so element sources may mention x."""
    spine = "acc"
    for e in reversed(elems):
        spine = f"f ({e}) ({spine})"
    if not typed:
        return f"\\!f. $(\\acc. {spine})"
    return (f"gen s. \\!f : !(({elem_ty}) -o s -o s). "
            f"$(\\acc : s. {spine})")


def list_iter(typed: bool = True) -> str:
    """Fold a list from a paragraphed seed: the iterator of the fold
    encoding."""
    if not typed:
        return "\\f. \\l. \\$x. let $y = l f in $(y x)"
    return ("gen u. gen t. \\f : !(u -o t -o t). "
            f"\\l : {list_type_src('u')}. \\$x : $t. "
            "let $y = l [t] f in $(y x)")


# --- the concurrent update demos ---------------------------------------------

def loc_update(typed: bool = True, region: str = "r") -> str:
    """A writer thread: read a location holding a boxed number, write
    back the number plus two, and release the continuation running in
    parallel.  The store receives the sum as a thunk."""
    if not typed:
        add, two = nat_add(False), church_nat(2, False)
        return (f"\\!x. \\$z. $(set(x, let !y = get(x) in "
                f"!(({add}) ({two}) y)) || z)")
    add, two = nat_add(True), church_nat(2, True)
    nat = nat_type_src()
    return (f"\\!x : !Reg #{region} !({nat}). \\$z : $1. "
            f"$(set(x, let !y = get(x) in !(({add}) ({two}) y)) || z)")


def _loc_list(typed: bool, region: str) -> str:
    et = f"!Reg #{region} !({nat_type_src()})" if typed else "1"
    return church_list(["!x", "!y", "!z"], et, typed)


def update_run(typed: bool = True, region: str = "r") -> str:
    """Update three locations in sequence by folding the writer over
    the location list."""
    lit, upd = list_iter(typed), loc_update(typed, region)
    lst = _loc_list(typed, region)
    if not typed:
        return f"({lit}) !({upd}) ({lst}) ($$*)"
    et = f"!Reg #{region} !({nat_type_src()})"
    return f"({lit}) [{et}] [$1] !({upd}) ({lst}) ($$*)"


def spawn3(typed: bool = True) -> str:
    """Apply a boxed function to a boxed argument on three threads."""
    if not typed:
        return "\\!f. \\!x. ($(f x) || $(f x) || $(f x))"
    return ("gen t. gen u. \\!f : !(t -o u). \\!x : !t. "
            "($(f x) || $(f x) || $(f x))")


def iter_update(typed: bool = True, region: str = "r") -> str:
    """The location-list fold packaged as a function of the list."""
    lit, upd = list_iter(typed), loc_update(typed, region)
    if not typed:
        return f"\\l. ({lit}) !({upd}) l ($$*)"
    et = f"!Reg #{region} !({nat_type_src()})"
    return (f"\\l : {list_type_src(et)}. "
            f"({lit}) [{et}] [$1] !({upd}) l ($$*)")


def threads_run(typed: bool = True, region: str = "r") -> str:
    """Three threads each folding the writer over the same locations:
    with atomic updates every location gains six."""
    sp = spawn3(typed)
    f = iter_update(typed, region)
    lst = _loc_list(typed, region)
    if not typed:
        return f"({sp}) !({f}) !({lst})"
    et = f"!Reg #{region} !({nat_type_src()})"
    return f"({sp}) [{list_type_src(et)}] [$$1] !({f}) !({lst})"


def _with_stores(body: str, m: int, n: int, p: int, region: str,
                 typed: bool = False) -> str:
    return (f"nu x : #{region}. nu y : #{region}. nu z : #{region}. "
            f"(({body}) "
            f"|| x <= !({church_nat(m, typed)}) "
            f"|| y <= !({church_nat(n, typed)}) "
            f"|| z <= !({church_nat(p, typed)}))")


def update_run_program(m: int, n: int, p: int, region: str = "r",
                       typed: bool = False) -> str:
    """The single-thread demo closed under its location binders, with
    stores holding m, n, p.  Typed sources carry the annotations the
    region rendering needs; plain ones are what the runner executes."""
    return _with_stores(update_run(typed, region), m, n, p, region, typed)


def threads_run_program(m: int, n: int, p: int, region: str = "r",
                        typed: bool = False) -> str:
    """The three-thread demo closed under its location binders."""
    return _with_stores(threads_run(typed, region), m, n, p, region, typed)


# --- decoding ----------------------------------------------------------------

def decode_nat(t: Term, fuel: int = 10 ** 5) -> Optional[int]:
    """Normalize fully and read off an iterator-shaped numeral."""
    res = run(erase(t), {}, relation="full", strategy="shallow", fuel=fuel)
    if not res.halted:
        return None
    nf = res.final
    match nf:
        case Lam(f0, LetBang(f, Var(g), Para(Lam(x, spine)))) if g == f0:
            n = 0
            while isinstance(spine, App) and isinstance(spine.fn, Var) \
                    and spine.fn.name == f:
                n += 1
                spine = spine.arg
            if isinstance(spine, Var) and spine.name == x:
                return n
    return None


def decode_boxed_nat(t: Term, fuel: int = 10 ** 5) -> Optional[int]:
    if isinstance(t, Bang):
        return decode_nat(t.body, fuel)
    return None


def decode_stores(result: Term, fuel: int = 10 ** 5) -> dict[str, int]:
    """Decode every location store of a run result that holds a boxed
    number (possibly an unevaluated sum)."""
    _, body = split_nu(result)
    out: dict[str, int] = {}
    for _, e in _chain_addrs(body):
        if isinstance(e, Store) and e.loc:
            v = decode_boxed_nat(e.body, fuel)
            if v is not None:
                out[e.target] = v
    return out


def nat_term(n: int, typed: bool = False) -> Term:
    return parse_program(church_nat(n, typed))
