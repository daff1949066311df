import random

import pytest
from hypothesis import given, settings, strategies as st

from flwlab.calculus import check_deduction, non_standard_cuts, theory_leaf
from flwlab.cutelim import normalize_steps, normalize_to_standard, weaken_to
from flwlab.errors import InvalidInput
from flwlab.syntax import Var, parse_sequent, parse_theory

from gen import TENSOR, _cut, _fuse, _id, _pair, random_deduction

S = parse_sequent


def test_standard_input_unchanged():
    t = parse_theory("p |- q")
    d = theory_leaf(S("p |- q"))
    assert normalize_to_standard(TENSOR, t, d) == d


def test_id_cut_collapses_to_leaf():
    t = parse_theory("a, p, b |- q")
    d = _cut(_id(Var("p")), theory_leaf(S("a, p, b |- q")), 1)
    out = normalize_to_standard(TENSOR, t, d)
    assert out == theory_leaf(S("a, p, b |- q"))


def test_cut_over_left_fusion_is_permuted():
    # left premise ends in L*; the cut moves above it
    t = parse_theory("a, b |- c\nc |- r")
    left = _fuse(theory_leaf(S("a, b |- c")), 0)
    d = _cut(left, theory_leaf(S("c |- r")), 0)
    assert non_standard_cuts(d) == 1
    out = normalize_to_standard(TENSOR, t, d)
    rep = check_deduction(TENSOR, t, out)
    assert rep.valid and rep.standard and out.sequent == d.sequent
    assert out.rule == "L*"


def test_principal_tensor_cut():
    t = parse_theory("|- a\n|- b\na, b |- c")
    left = _pair(theory_leaf(S("|- a")), theory_leaf(S("|- b")))
    right = _fuse(theory_leaf(S("a, b |- c")), 0)
    d = _cut(left, right, 0)
    out = normalize_to_standard(TENSOR, t, d)
    rep = check_deduction(TENSOR, t, out)
    assert rep.valid and rep.standard and rep.analytic
    assert all(n.sequent != S("a * b |- c") for n in out.nodes())
    assert all(n.rule != "cut" or n.children[0].kind == "theory" for n in out.nodes())


def test_steps_decrease_nonstandard_cuts():
    t, d = random_deduction(random.Random(3), steps=30, max_ant=5)
    counts = [non_standard_cuts(x) for x in normalize_steps(TENSOR, t, d)]
    assert counts[-1] == 0
    assert counts[0] == non_standard_cuts(d) > 0
    assert all(b < a for a, b in zip(counts, counts[1:]))


def test_weaken_to():
    d = theory_leaf(S("p |- q"))
    w = weaken_to(d, S("r, p, r |- q").antecedent)
    assert w.sequent == S("r, p, r |- q")
    assert check_deduction(TENSOR, parse_theory("p |- q"), w).valid


def test_rejects_invalid_input():
    bad = theory_leaf(S("q |- p"))
    with pytest.raises(InvalidInput):
        normalize_to_standard(TENSOR, parse_theory("p |- q"), bad)
    with pytest.raises(InvalidInput):
        normalize_to_standard(TENSOR, parse_theory("a * b |- c"), theory_leaf(S("a * b |- c")))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_normalization_property(seed):
    t, d = random_deduction(random.Random(seed))
    out = normalize_to_standard(TENSOR, t, d)
    rep = check_deduction(TENSOR, t, out)
    assert rep.valid and rep.standard and rep.analytic
    assert out.sequent == d.sequent
