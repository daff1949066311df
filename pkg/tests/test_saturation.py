import random

import pytest
from hypothesis import assume, given, settings, strategies as st

from flwlab.calculus import Calculus, builtin_calculus, check_deduction
from flwlab.errors import BudgetExceeded, InvalidInput, NotRegular
from flwlab.saturation import (SaturationConfig, bounded_closure_oracle, bounds_report, decide,
                               derivation_of, expand, load_config, oracle_decides, saturate)
from flwlab.syntax import FULL, parse_formula, parse_sequent, parse_theory, subformula_closure

from flwlab.wqo import seq_embed

from gen import TENSOR, micro_instance

S = parse_sequent


def test_trivial_theory_leaf():
    t = parse_theory("p |- q")
    v = decide(TENSOR, t, S("p |- q"))
    assert v.answer and v.derivation.kind == "theory"


def test_chained_theory_sequents():
    t = parse_theory("p |- q\nq |- r")
    state = saturate(TENSOR, t, S("p |- r"))
    raw = derivation_of(state, state.table.encode(S("p |- r")))
    assert raw.rule == "cut"
    assert [n.kind for n in raw.nodes() if not n.children] == ["theory", "theory"]
    assert check_deduction(TENSOR, t, raw).standard
    v = decide(TENSOR, t, S("p |- r"))
    assert check_deduction(TENSOR, t, v.derivation).standard


def test_strict_subsumption_ends_in_weakening():
    t = parse_theory("p |- q")
    v = decide(TENSOR, t, S("r, p |- q"))
    assert v.answer and v.derivation.rule == "w-l"


def test_no_answer():
    v = decide(TENSOR, parse_theory("p |- q"), S("q |- p"))
    assert not v.answer and v.stats["stabilized"]


def test_bounds_examples():
    st_ = saturate(TENSOR, parse_theory("p |- q"), S("p |- q"))
    rep = bounds_report(st_)
    assert rep.phi_size == 2 and rep.phi_bound == 6 and rep.control_ok
    st2 = saturate(TENSOR, [], S("p |- p"))
    rep2 = bounds_report(st2)
    assert rep2.phi_size == 1 and rep2.phi_bound == 3


def test_oracle_examples():
    t = parse_theory("p |- q")
    phi = subformula_closure(list(t))
    got = bounded_closure_oracle(TENSOR, t, phi, 1)
    assert {S("p |- q"), S("p |- p"), S("q |- q")} <= got
    assert all(not s.antecedent for s in bounded_closure_oracle(builtin_calculus(FULL), [], {parse_formula("1")}, 0))
    assert bounded_closure_oracle(TENSOR, t, phi, 1) <= bounded_closure_oracle(TENSOR, t, phi, 2)


def test_budget_is_distinguished():
    t = parse_theory("|- p\np |- p * p\np, p |- p")
    cfg = SaturationConfig(time_budget_s=0.0, stop_on_goal=False)
    with pytest.raises(BudgetExceeded):
        decide(TENSOR, t, S("q |- q * q"), cfg)


def test_rejects_non_regular():
    with pytest.raises(NotRegular):
        decide(TENSOR, parse_theory("a * b |- c"), S("a |- c"))


def test_load_config():
    cfg = load_config("engine = literal\nliteral_bound = 3  # small\nemit_proof = no\n")
    assert cfg.engine == "literal" and cfg.literal_bound == 3 and not cfg.emit_proof
    with pytest.raises(InvalidInput):
        load_config("engine = quantum\n")
    with pytest.raises(InvalidInput):
        load_config("colour = blue\n")


def test_goal_set_any_member():
    t = parse_theory("p |- q")
    v = decide(TENSOR, t, [S("q |- p"), S("p, p |- q")])
    assert v.answer and v.goal == S("p, p |- q")


def _micro(seed):
    return micro_instance(random.Random(seed))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_every_admitted_sequent_is_deducible(seed):
    t, g = _micro(seed)
    state = saturate(TENSOR, t, g)
    for enc in state.stored:
        d = derivation_of(state, enc)
        assert d.sequent == state.table.decode(enc)
        rep = check_deduction(TENSOR, t, d)
        assert rep.valid, rep.violations
    assert all(s.succedent is not None for s in state.sequents())
    bounds_report(state, t, g)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.randoms())
def test_frontier_independent_of_rule_order(seed, rnd):
    t, g = _micro(seed)
    rules = list(TENSOR.rules)
    rnd.shuffle(rules)
    other = Calculus(TENSOR.fragment, tuple(rules))
    a = saturate(TENSOR, t, g)
    b = saturate(other, t, g)
    assert a.minimal() == b.minimal()
    assert a.stabilized and not expand(a)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_chain_property(seed):
    t, g = _micro(seed)
    state = saturate(TENSOR, t, g)
    levels = [set(state.level(i)) for i in range(state.iteration + 1)]
    assert all(a <= b for a, b in zip(levels, levels[1:]))
    d0 = state.level(0)
    assert all(any(seq_embed(m, s) for m in d0) for s in t)
    assert state.level(state.iteration) == state.sequents()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_yes_matches_oracle_at_proof_width(seed):
    t, g = _micro(seed)
    v = decide(TENSOR, t, g, SaturationConfig(stop_on_goal=False))
    if v.answer:
        cap = max(len(n.sequent.antecedent) for n in v.derivation.nodes())
        assume(cap <= 3)
        assert oracle_decides(TENSOR, t, g, cap)
    else:
        assert not oracle_decides(TENSOR, t, g, 2)
