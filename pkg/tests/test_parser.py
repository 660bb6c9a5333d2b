"""Surface syntax: round trips, sugar, headers, and rejection messages."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lmt.parser import ParseError, parse_file, parse_program, parse_type
from lmt.printer import to_text, type_text
from lmt.syntax import (App, Bang, Gen, Get, Inst, Lam, LetBang, LetPara, Nu,
                        Par, Para, RegionConst, Set, Store, Unit, Var,
                        struct_equiv)
from lmt.types import Arrow, BangT, Behaviour, Forall, One, ParaT, RegT, TVar

NAMES = st.sampled_from(("x", "y", "z", "w", "f"))
REGIONS = st.sampled_from(("r", "s"))
TVARS = st.sampled_from(("t", "u"))


def types_strategy():
    base = st.one_of(
        st.just(One()),
        st.just(Behaviour()),
        st.builds(TVar, TVARS),
    )

    def extend(inner):
        return st.one_of(
            st.builds(BangT, inner),
            st.builds(ParaT, inner),
            st.builds(Arrow, inner, inner,
                      st.just((frozenset(), frozenset()))),
            st.builds(Forall, TVARS, inner),
            st.builds(RegT, REGIONS, inner),
        )

    return st.recursive(base, extend, max_leaves=6)


TYPES = types_strategy()


def terms_strategy():
    base = st.one_of(
        st.builds(Var, NAMES),
        st.just(Unit()),
        st.builds(RegionConst, REGIONS),
        st.builds(Get, REGIONS, st.just(False)),
        st.builds(Get, NAMES, st.just(True)),
    )
    ann = st.one_of(st.none(), TYPES)

    def extend(inner):
        return st.one_of(
            st.builds(Lam, NAMES, inner, ann),
            st.builds(App, inner, inner),
            st.builds(Bang, inner),
            st.builds(Para, inner),
            st.builds(LetBang, NAMES, inner, inner),
            st.builds(LetPara, NAMES, inner, inner),
            st.builds(Set, REGIONS, inner, st.just(False)),
            st.builds(Set, NAMES, inner, st.just(True)),
            st.builds(Store, REGIONS, inner, st.just(False)),
            st.builds(Par, inner, inner),
            st.builds(Nu, NAMES, st.one_of(st.none(), REGIONS), inner),
            st.builds(Gen, TVARS, inner),
            st.builds(Inst, inner, TYPES),
        )

    return st.recursive(base, extend, max_leaves=25)


TERMS = terms_strategy()


# Terms compare by identity (mutable size caches), so the round trip is
# checked on the printed text and up to struct_equiv.
@given(TERMS)
@settings(max_examples=300, deadline=None)
def test_term_round_trip(t):
    src = to_text(t)
    back = parse_program(src)
    assert to_text(back) == src
    assert struct_equiv(back, t)


@given(TYPES)
@settings(max_examples=300, deadline=None)
def test_type_round_trip(a):
    assert parse_type(type_text(a)) == a


def test_bang_lambda_sugar():
    t = parse_program(r"\!x. x x")
    assert isinstance(t, Lam)
    inner = t.body
    assert isinstance(inner, LetBang)
    assert inner.binder == "x"
    assert isinstance(inner.bound, Var) and inner.bound.name == t.binder
    assert t.binder != "x"


def test_para_lambda_sugar():
    t = parse_program(r"\$x : $1. x")
    assert isinstance(t, Lam)
    assert t.ann == ParaT(One())
    assert isinstance(t.body, LetPara)


def test_application_is_left_associative():
    t = parse_program("f x y")
    assert struct_equiv(t, App(App(Var("f"), Var("x")), Var("y")))


def test_arrow_is_right_associative():
    a = parse_type("1 -o 1 -o B")
    assert a == Arrow(One(), Arrow(One(), Behaviour(),
                                   (frozenset(), frozenset())),
                      (frozenset(), frozenset()))


def test_effect_annotations_parse():
    a = parse_type("1 -o {#r; #r, #s} 1")
    assert isinstance(a, Arrow)
    assert a.eff == (frozenset({"r"}), frozenset({"r", "s"}))


def test_region_header():
    f = parse_file("region #r : depth = 2, type = !1\n"
                   "region #s : depth = 0\n"
                   "get(#r)")
    assert f.region_depths == {"r": 2, "s": 0}
    assert f.region_types == {"r": BangT(One())}


def test_header_rejects_duplicate_region():
    with pytest.raises(ParseError, match="declared twice"):
        parse_file("region #r : depth = 0\nregion #r : depth = 1\n*")


def test_header_rejects_undeclared_use():
    with pytest.raises(ParseError, match="undeclared region"):
        parse_file("region #r : depth = 0\nget(#s)")


def test_bare_programs_skip_region_check():
    t = parse_program("get(#anything)")
    assert isinstance(t, Get) and t.target == "anything" and not t.loc


def test_parse_error_carries_position():
    with pytest.raises(ParseError):
        parse_program("let !x = in x")


def test_nu_with_and_without_region():
    t = parse_program("nu a : #r. get(a)")
    assert isinstance(t, Nu) and t.binder == "a" and t.region == "r"
    assert isinstance(t.body, Get) and t.body.target == "a" and t.body.loc
    t2 = parse_program("nu a. *")
    assert isinstance(t2, Nu) and t2.region is None
    assert isinstance(t2.body, Unit)
