"""Depth system: per-rule accepts and rejections, inference, derivations."""
import pytest

from lmt.corpus import by_name
from lmt.depthcheck import DepthError, check_wf, infer_top_depth, is_wf
from lmt.parser import parse_file, parse_program


def wf(src, depths=None, delta=None):
    return check_wf(parse_program(src), depths or {}, delta)


def rejects(src, rule, pattern, depths=None, delta=None):
    with pytest.raises(DepthError, match=pattern) as exc:
        wf(src, depths, delta)
    assert exc.value.rule == rule


# accepted forms, one per rule

def test_linear_lambda():
    d = wf(r"\x. x")
    assert d.rule == "lam" and d.delta == 0


def test_let_bang_allows_contraction():
    # two uses, each crossing its own !
    d = wf(r"let !x = !* in (!x || !x)")
    assert d.rule == "let!"


def test_let_para_single_use():
    wf(r"let $x = $* in $x")


def test_bang_with_one_free_occurrence():
    wf(r"\x. let !x = x in !(x)")


def test_store_body_judged_at_region_depth():
    f = parse_file("region #r : depth = 2\n#r <= get(#r)")
    check_wf(f.program, f.region_depths)


def test_free_variable_usage_is_inferred():
    # both occurrences cross a single !, so usage ! fits
    wf(r"!x || !x")


def test_gen_inst_are_transparent():
    d = wf(r"gen t. (\x. x)[1]")
    assert d.rule == "gen"
    assert d.children[0].rule == "inst"


# rejections, with the violated rule named in the message

def test_lambda_rejects_zero_uses():
    rejects(r"\x. *", "lam", "exactly one occurrence, found 0")


def test_lambda_rejects_duplication():
    rejects(r"\x. x x", "lam", "exactly one occurrence, found 2")


def test_bang_rejects_two_free_occurrences():
    e = by_name("dup-bang")
    with pytest.raises(DepthError, match="2 free variable occurrences"):
        check_wf(e.program(), e.region_depths())


def test_para_body_may_duplicate():
    e = by_name("dup-para")
    check_wf(e.program(), e.region_depths())


def test_let_bang_rejects_dead_binding():
    rejects(r"let !x = !* in *", "let!", "at least one occurrence, found 0")


def test_let_para_rejects_contraction():
    rejects(r"let $x = $* in x x", "let$", "exactly one occurrence, found 2")


def test_let_bang_variable_needs_modality():
    rejects(r"let !x = !* in x", "var", "occurs across no modality")


def test_let_para_variable_cannot_cross_bang():
    rejects(r"let $x = $* in !x", "var", "cannot pass")


def test_free_variable_two_modalities():
    rejects(r"!(!x)", "var", "occurs across 2 modalities")


def test_free_variable_conflicting_usages():
    rejects(r"x || !x", "var", "no usage fits all occurrences")


def test_undeclared_region():
    rejects(r"get(#s)", "region", "not declared")


def test_get_depth_must_match_region():
    e = by_name("depth-shift")
    with pytest.raises(DepthError, match=r"get\(#r\) occurs at depth 1 but "
                                         r"region '#r' is declared at depth 0"):
        check_wf(e.program(), e.region_depths())
    assert not e.wf


def test_set_depth_must_match_region():
    rejects(r"set(#r, *)", "stratification",
            r"set\(#r, \.\.\.\) occurs at depth 0", depths={"r": 1}, delta=0)


def test_store_sits_at_depth_zero():
    rejects(r"#r <= *", "store", "judged at depth 1", depths={"r": 0},
            delta=1)


def test_store_not_under_binders():
    rejects(r"!(#r <= *)", "store", "below an operator", depths={"r": 0})


def test_location_ops_rejected():
    rejects(r"get(a)", "get", "translate references first")
    rejects(r"nu a : #r. *", "syntax", "translate references first",
            depths={"r": 0})


# depth inference at the root

def test_infer_no_region_access():
    assert infer_top_depth(parse_program(r"\x. x"), {}) == 0


def test_infer_aligns_nested_get():
    p = parse_program(r"!(!(get(#r)))")
    assert infer_top_depth(p, {"r": 3}) == 1
    check_wf(p, {"r": 3})


def test_infer_store_pins_root_to_zero():
    e = by_name("get-apply-set")
    p = e.program()
    assert infer_top_depth(p, e.region_depths()) == 0
    d = check_wf(p, e.region_depths())
    assert d.delta == 0


def test_infer_conflict_reports_at_checker():
    # read and write need different root depths; no choice satisfies both
    e = by_name("depth-shift")
    assert not is_wf(e.program(), e.region_depths())
    for delta in range(4):
        assert not is_wf(e.program(), e.region_depths(), delta)


def test_inference_matches_explicit_delta():
    for name in ("get-apply-set", "doubling-chain-2", "dup-para"):
        e = by_name(name)
        d = infer_top_depth(e.program(), e.region_depths())
        assert is_wf(e.program(), e.region_depths()) == \
            is_wf(e.program(), e.region_depths(), d)


# derivation trees

def test_derivation_renders_judgement():
    d = wf(r"let !x = !* in !x")
    text = d.render()
    assert text.splitlines()[0].startswith("let!: |-0 ")
    assert "bang: |-0" in text
    assert "var: |-1 x" in text


def test_derivation_tracks_store_depth():
    f = parse_file("region #r : depth = 2\n#r <= get(#r)")
    d = check_wf(f.program, f.region_depths)
    assert d.rule == "store" and d.delta == 0
    assert d.children[0].rule == "get" and d.children[0].delta == 2


def test_doubling_chain_is_wf():
    e = by_name("doubling-chain-3")
    d = check_wf(e.program(), e.region_depths())
    assert d.delta == 0
