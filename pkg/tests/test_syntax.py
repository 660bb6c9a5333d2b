"""Core term facts: addressing, depths, sizes, substitution, equivalence."""
import pytest

from lmt.corpus import by_name
from lmt.parser import parse_program
from lmt.reduction import run
from lmt.syntax import (App, Bag, Bang, Lam, Par, Para, Set, Store, Unit, Var,
                        addresses, count_free, depth, depth_of, free_vars,
                        fresh_name, par_chain, par_of_chain, size,
                        struct_equiv, substitute, weighted_size)

SHOWCASE = by_name("get-apply-set")


def test_showcase_sizes():
    p = SHOWCASE.program()
    assert size(p) == 15
    assert weighted_size(p) == 14


def test_showcase_depth_and_address_table():
    p = SHOWCASE.program()
    R = SHOWCASE.region_depths()
    assert depth(p, R) == 1
    deep = {addr for addr, _ in addresses(p)
            if depth_of(p, addr, R) == 1}
    # the two copies of the read value, and everything inside the store
    assert deep == {"01000", "01010", "100", "1000", "10000", "10001"}
    assert depth_of(p, "10", R) == 0   # store body sits at the region depth


def test_depth_counts_region_crossings():
    p = parse_program("$(get(#r)) || #r <= !*")
    assert depth_of(p, "00", {"r": 1}) == 1    # under one $
    assert depth_of(p, "10", {"r": 1}) == 1    # store label adds R(r)
    assert depth(p, {"r": 1}) == 2             # the * under store and !


def test_weighted_size_conventions():
    assert weighted_size(Par(Unit(), Unit())) == 2          # par itself free
    assert weighted_size(Store("r", Unit(), False)) == 1    # store label free
    assert weighted_size(Set("r", Unit(), False)) == 3      # set counts twice
    assert weighted_size(Bag(3, Unit())) == 3               # multiplicity
    assert size(Bag(3, Unit())) == 3


def test_struct_equiv_alpha():
    a = parse_program(r"\x : 1. x")
    b = parse_program(r"\y : 1. y")
    assert struct_equiv(a, b)
    assert not struct_equiv(a, parse_program(r"\x : 1. *"))


def test_struct_equiv_par_ac():
    a = parse_program("* || !* || #r <= !*")
    b = parse_program("#r <= !* || * || !*")
    assert struct_equiv(a, b)
    chain = par_chain(a)
    assert len(chain) == 3
    assert struct_equiv(par_of_chain(chain), a)


def test_substitution_basics():
    t = parse_program(r"\y : 1. x")
    out = substitute(t, "x", Unit())
    assert struct_equiv(out, parse_program(r"\y : 1. *"))
    assert free_vars(out) == frozenset()


def test_substitution_avoids_capture():
    # binder y must move out of the way of the free y we substitute in
    t = parse_program(r"\y : 1. x y")
    out = substitute(t, "x", Var("y"))
    assert isinstance(out, Lam)
    assert out.binder != "y"
    assert count_free(out, "y") == 1


def test_substitution_rename_dodges_the_substituted_name():
    # the bound pair below must still point at the let-binder after the
    # outer beta brings in a free f; a bad rename once captured it
    p = parse_program(r"(\g. let !f = g in $(f (f *))) !f")
    res = run(p, {}, relation="full", strategy="shallow", fuel=10)
    assert res.halted
    assert struct_equiv(res.final, parse_program("$(f (f *))"))
    assert free_vars(res.final) == frozenset({"f"})


def test_fresh_name():
    assert fresh_name("x", frozenset()) == "x"
    got = fresh_name("x", frozenset({"x", "x'"}))
    assert got not in {"x", "x'"}


def test_addresses_cover_all_nodes():
    p = SHOWCASE.program()
    addrs = list(addresses(p))
    assert len(addrs) == size(p)
    assert addrs[0][0] == ""


def test_par_chain_flattens_nested():
    p = parse_program("(* || *) || (* || *)")
    assert len(par_chain(p)) == 4
