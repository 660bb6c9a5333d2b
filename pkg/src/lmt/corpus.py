"""Tagged sample programs exercising every analysis in the package.

Each entry is a complete source file (region header plus program) with
expectations recorded next to it: `wf` is the depth-checker verdict on
the erased program, `cbv_ok` says whether the erased program fits the
value-restricted syntax, `typed`/`type_src` give the expected typing
judgement, and `decode` carries a numeric oracle for encoded data.
The test-suite and the demo scripts run the corpus uniformly off these
tags, so a new program only needs an Entry here to be swept by all
checkers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .encodings import (bin_word, church_list, church_nat, list_iter,
                        list_type_src, nat_add, nat_type_src, spawn3,
                        threads_run_program, update_run_program,
                        word_type_src)
from .parser import SourceFile, parse_file, parse_type
from .printer import to_text, type_text
from .refs import translate
from .syntax import Term
from .typecheck import erase
from .types import Type

NAT = nat_type_src()


@dataclass(frozen=True)
class Entry:
    name: str
    source: str
    wf: bool = True
    cbv_ok: bool = True
    typed: bool = False
    type_src: str = ""
    decode: Optional[int] = None   # erased program normalizes to this numeral
    boxed: bool = False            # numeral sits under one box in the result
    notes: str = ""

    def file(self) -> SourceFile:
        return parse_file(self.source)

    def program(self) -> Term:
        return self.file().program

    def erased(self) -> Term:
        return erase(self.program())

    def region_depths(self) -> dict[str, int]:
        return self.file().region_depths

    def region_ctx(self) -> dict[str, tuple[int, Type]]:
        f = self.file()
        return {r: (f.region_depths[r], ty) for r, ty in f.region_types.items()}

    def expected_type(self) -> Optional[Type]:
        return parse_type(self.type_src) if self.type_src else None


@dataclass(frozen=True)
class NuEntry:
    """A location program: runs strictly, translates, and simulates."""
    name: str
    source: str
    type_src: str
    notes: str = ""

    def file(self) -> SourceFile:
        return parse_file(self.source)

    def program(self) -> Term:
        return self.file().program

    def region_depths(self) -> dict[str, int]:
        return self.file().region_depths

    def region_types(self) -> dict[str, Type]:
        return self.file().region_types

    def region_ctx(self) -> dict[str, tuple[int, Type]]:
        f = self.file()
        return {r: (f.region_depths[r], ty) for r, ty in f.region_types.items()}

    def expected_type(self) -> Type:
        return parse_type(self.type_src)


# --- named counterexamples ----------------------------------------------------

def dup_bang_src() -> str:
    """Self-application under a bang: two occurrences inside one !-term,
    so iterating it would square the size at every stage."""
    return r"\x. let !x = x in !(x x)"


def dup_para_src() -> str:
    """Self-application under a paragraph: accepted by the depth system
    because a $-term cannot be copied again."""
    return r"\x. let !x = x in $(x x)"


def depth_shift_src() -> str:
    """Writes a region at depth 0 but reads it at depth 1; no region
    context satisfies both, so the depth checker must refuse."""
    return ("region #r : depth = 0\n"
            r"(\x. (set(#r, x) || $(get(#r)))) !(\w. w)")


def stage_src() -> str:
    """One doubling stage: park the boxed argument, write it, read it
    back under a bang.  The parked value lands in a junk region."""
    return (r"\x. let $w = x in "
            r"((\z. (set(#gr, z) || !(get(#r)))) ($(set(#r, w))))")


def doubling_src() -> str:
    """Duplicator whose copies pass through a region: depth-checks fine,
    yet deep-first scheduling doubles the stored term at every stage."""
    return rf"\x. let !x = x in ({stage_src()}) $(x x)"


def doubling_chain_src(n: int) -> str:
    """n doubling stages over !*.  Deep-first full reduction normalizes
    each read before it is copied and explodes; shallow-first leaves the
    reads blocked and stays linear."""
    assert n >= 1
    t = "!*"
    for _ in range(n):
        t = f"({doubling_src()}) ({t})"
    return f"region #r : depth = 1\nregion #gr : depth = 0\n{t}"


# --- corpus construction helpers ----------------------------------------------

def _header(f: SourceFile) -> str:
    lines = []
    for r, d in f.region_depths.items():
        ty = f.region_types.get(r)
        suffix = f", type = {type_text(ty)}" if ty is not None else ""
        lines.append(f"region #{r} : depth = {d}{suffix}")
    return "".join(line + "\n" for line in lines)


def translated_source(src: str) -> str:
    """Re-render a location program as a region source file."""
    f = parse_file(src)
    body = translate(f.program, f.region_types)
    return _header(f) + to_text(body)


def _nat(n: int) -> str:
    return f"({church_nat(n)})"


def _fold_sum_src() -> str:
    lst = church_list([_nat(2), _nat(3)], elem_ty=NAT)
    return (f"({list_iter()}) [({NAT})] [({NAT})] !({nat_add()}) "
            f"({lst}) $({church_nat(1)})")


NU_CORPUS: list[NuEntry] = [
    NuEntry(
        "read-copy",
        "region #r : depth = 0, type = !1\n"
        "nu a : #r. (get(a) || a <= !*)",
        "!1",
        notes="one read; the store survives"),
    NuEntry(
        "overwrite",
        "region #r : depth = 0, type = !1\n"
        "nu a : #r. (set(a, !*) || a <= !*)",
        "1",
        notes="one write; the old store is replaced in place"),
    NuEntry(
        "read-apply",
        "region #r : depth = 0, type = !1\n"
        r"nu a : #r. ((\w : !1. w) (get(a)) || a <= !*)",
        "!1"),
    NuEntry(
        "read-write-pair",
        "region #r : depth = 0, type = !1\n"
        "region #s : depth = 0, type = !1\n"
        r"nu a : #r. nu b : #s. ((\w : !1. set(b, w)) (get(a)) "
        "|| a <= !* || b <= !*)",
        "B",
        notes="value read from one location is written to another"),
    NuEntry(
        "read-discard",
        "region #r : depth = 0, type = !1\n"
        "nu a : #r. (* || get(a) || a <= !*)",
        "!1",
        notes="the unit thread is collected next to the read"),
    NuEntry(
        "boxed-read",
        "region #r : depth = 1, type = !1\n"
        "nu a : #r. ($(get(a)) || a <= !*)",
        "$!1",
        notes="read happens one level down, matching the region depth"),
    NuEntry(
        "shared-read",
        "region #r : depth = 0, type = !(1 -o 1)\n"
        r"nu a : #r. ((let !w = get(a) in (!w || !w)) || a <= !(\c : 1. c))",
        "B",
        notes="the read value is duplicated by the surrounding let-!"),
    NuEntry(
        "write-twice",
        "region #r : depth = 0, type = !(1 -o 1)\n"
        r"nu a : #r. ((\u : 1. (u || set(a, !(\c : 1. c)))) "
        r"(set(a, !(\d : 1. d))) || a <= !(\e : 1. e))",
        "1",
        notes="two sequenced writes; each one replaces the store"),
    NuEntry(
        "scoped-alias",
        "region #r : depth = 0, type = !1\n"
        "region #s : depth = 0, type = !1\n"
        r"nu a : #r. ((\w : !1. nu b : #s. w) (get(a)) || a <= !*)",
        "!1",
        notes="a fresh binder surfaces mid-run and floats to the top"),
    NuEntry(
        "three-readers",
        "region #r : depth = 0, type = !1\n"
        "region #s : depth = 0, type = !1\n"
        "region #q : depth = 0, type = !1\n"
        "nu a : #r. nu b : #s. nu c : #q. "
        "(get(a) || get(b) || get(c) || a <= !* || b <= !* || c <= !*)",
        "B"),
]


def _build_corpus() -> list[Entry]:
    E = Entry
    out = [
        # plain terms, no regions
        E("unit", "*", typed=True, type_src="1"),
        E("id-redex", r"(\x : 1. x) *", typed=True, type_src="1"),
        E("id-fun", r"\x : 1. x", typed=True, type_src="1 -o 1"),
        E("bang-id", r"!(\x : 1. x)", typed=True, type_src="!(1 -o 1)"),
        E("para-redex", r"$((\x : 1. x) *)", typed=True, type_src="$1"),
        E("let-bang", r"let !x = !(\w : 1. w) in !x",
          typed=True, type_src="!(1 -o 1)"),
        E("let-para", r"let $y = $((\w : 1. w) *) in $y",
          typed=True, type_src="$1"),
        E("par-unit-redex", r"* || (\x : 1. x) *", typed=True, type_src="1"),
        E("par-two-bangs", r"!(\x : 1. x) || !(\w : 1. w)",
          typed=True, type_src="B"),
        E("nested-app", r"(\f : 1 -o 1. f *) (\x : 1. x)",
          typed=True, type_src="1"),
        E("para-nested", r"$((\f : 1 -o 1. f *) (\x : 1. x))",
          typed=True, type_src="$1"),
        E("bang-under-let", r"let !f = !(\x : 1. x) in !(f *)",
          cbv_ok=False, typed=True, type_src="!1",
          notes="builds a bang over a redex, so only the unrestricted "
                "relations may run it"),
        E("two-step", r"(\x : 1. x) ((\w : 1. w) *)",
          typed=True, type_src="1"),
        E("gc-pair", "* || *", typed=True, type_src="1"),

        # regions
        E("get-apply-set",
          "region #r : depth = 0, type = forall t. !((1 -o t) -o t)\n"
          r"let !x = get(#r) in set(#r, (!x) ($x)) || #r <= !(\x. x *)",
          typed=False,
          notes="read a stored function-former, apply a boxed copy to a "
                "paragraphed copy, write the application back; the write "
                "does not retype at the declared content type"),
        E("get-store",
          "region #r : depth = 0, type = !(1 -o 1)\n"
          r"get(#r) || #r <= !(\x : 1. x)",
          typed=True, type_src="!(1 -o 1)"),
        E("set-store",
          "region #r : depth = 0, type = !1\nset(#r, !*) || #r <= !*",
          typed=True, type_src="1"),
        E("read-write-back",
          "region #r : depth = 0, type = !(1 -o 1)\n"
          r"let !x = get(#r) in set(#r, !x) || #r <= !(\w : 1. w)",
          typed=True, type_src="1"),
        E("get-expansion",
          "region #r : depth = 0, type = !1\n"
          "let !y = get(#r) in (set(#r, !y) || !y) || #r <= !*",
          typed=True, type_src="!1",
          notes="read that restores the store and hands out a copy"),
        E("para-get",
          "region #r : depth = 1, type = !1\n$(get(#r)) || #r <= !*",
          typed=True, type_src="$!1"),
        E("blocked-get",
          "region #r : depth = 0, type = !1\nget(#r)",
          typed=True, type_src="!1",
          notes="no store to read: stuck but well behaved"),
        E("store-only",
          "region #r : depth = 0, type = !1\n#r <= !*",
          typed=True, type_src="B"),
        E("two-regions",
          "region #r : depth = 0, type = !(1 -o 1)\n"
          "region #s : depth = 0, type = !1\n"
          r"get(#r) || set(#s, !*) || #r <= !(\c : 1. c) || #s <= !*",
          typed=True, type_src="B"),

        # duplication gates
        E("dup-para", dup_para_src(), typed=False,
          notes="depth-checks, but no type makes the body reusable"),
        E("dup-bang", dup_bang_src(), wf=False, cbv_ok=False, typed=False,
          notes="two occurrences under one bang"),
        E("depth-shift", depth_shift_src(), wf=False, typed=False,
          notes="read and write of the same region at different depths"),
        E("doubling-stage",
          "region #r : depth = 1\nregion #gr : depth = 0\n" + stage_src(),
          cbv_ok=False, typed=False,
          notes="reads back under a bang, so value-restricted syntax "
                "refuses it"),
    ]
    for n in (1, 2, 3):
        out.append(E(f"doubling-chain-{n}", doubling_chain_src(n),
                     cbv_ok=False, typed=False))

    # encoded data
    for n in (1, 2, 3, 5):
        out.append(E(f"nat-{n}", church_nat(n), typed=True, type_src=NAT,
                     decode=n))
    out.append(E("add-fn", nat_add(), typed=True,
                 type_src=f"({NAT}) -o ({NAT}) -o ({NAT})"))
    out.append(E("add-2-3", f"({nat_add()}) {_nat(2)} {_nat(3)}",
                 typed=True, type_src=NAT, decode=5))
    out.append(E("add-assoc",
                 f"({nat_add()}) (({nat_add()}) {_nat(1)} {_nat(2)}) {_nat(4)}",
                 typed=True, type_src=NAT, decode=7))
    out.append(E("word-01", bin_word("01"), typed=True,
                 type_src=word_type_src()))
    out.append(E("word-100", bin_word("100"), typed=True,
                 type_src=word_type_src()))
    out.append(E("list-2-3", church_list([_nat(2), _nat(3)], elem_ty=NAT),
                 typed=True, type_src=list_type_src(f"({NAT})")))
    out.append(E("fold-sum", _fold_sum_src(), typed=True,
                 type_src=f"$({NAT})", decode=6, boxed=True,
                 notes="folds addition over a two-element list from a "
                       "boxed seed of one"))
    out.append(E("list-iter-fn", list_iter(), typed=True,
                 type_src="forall u. forall t. !(u -o t -o t) -o "
                          "(forall s. !(u -o s -o s) -o $(s -o s)) -o "
                          "$t -o $t"))
    out.append(E("spawn3-fn", spawn3(), typed=True,
                 type_src="forall t. forall u. !(t -o u) -o !t -o B"))

    # the location demos, rendered down to regions
    counter_header = f"region #r : depth = 3, type = !({NAT})\n"
    out.append(E("counter-run-rt",
                 translated_source(
                     counter_header + update_run_program(0, 1, 2, typed=True)),
                 wf=False, cbv_ok=False, typed=False,
                 notes="location binders survive as unused lambdas, which "
                       "the one-use rule refuses; runs under the "
                       "unrestricted relations only"))
    out.append(E("counter-threads-rt",
                 translated_source(
                     counter_header + threads_run_program(6, 7, 8, typed=True)),
                 wf=False, cbv_ok=False, typed=False,
                 notes="same caveat as counter-run-rt"))
    for ne in NU_CORPUS:
        out.append(E(f"{ne.name}-rt", translated_source(ne.source),
                     typed=True, type_src=ne.type_src,
                     notes="region rendering of the location program"))
    return out


CORPUS: list[Entry] = _build_corpus()
_BY_NAME = {e.name: e for e in CORPUS}
assert len(_BY_NAME) == len(CORPUS), "duplicate corpus names"


def by_name(name: str) -> Entry:
    return _BY_NAME[name]


def wf_entries() -> list[Entry]:
    return [e for e in CORPUS if e.wf]


def cbv_entries() -> list[Entry]:
    return [e for e in CORPUS if e.cbv_ok]


def typed_entries() -> list[Entry]:
    return [e for e in CORPUS if e.typed]
