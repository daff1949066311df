import pytest

from flwlab.calculus import (add_structural_rule, builtin_calculus, check_deduction, is_regular,
                             match_instance, non_standard_cuts, parse_derivation, parse_rule,
                             render_derivation, rule_node, schema, theory_leaf)
from flwlab.errors import NotStructural, ParseError
from flwlab.syntax import FULL, Fragment, Var, parse_sequent, parse_theory

S = parse_sequent
TENSOR = builtin_calculus(Fragment({"*"}))


def test_fragment_rule_sets():
    assert set(TENSOR.rule_names) == {"id", "w-l", "w-r", "cut", "L*", "R*"}
    assert set(builtin_calculus(Fragment()).rule_names) == {"id", "w-l", "w-r", "cut"}
    full = builtin_calculus(FULL)
    assert len(full.rule_names) == 20
    assert len(full.rules) == 22  # two schemas each for the R\/ and L/\ alternatives


def test_add_structural_rule():
    ex = parse_rule("ex: G1, A, B, G2 |- P? => G1, B, A, G2 |- P?")
    c = add_structural_rule(TENSOR, ex)
    assert "ex" in c.rule_names and not c.is_builtin
    with pytest.raises(NotStructural):
        add_structural_rule(TENSOR, parse_rule("bad: G1, A, B |- P? => G1, (A * B) |- P?"))
    con = add_structural_rule(TENSOR, parse_rule("con: G1, A, A, G2 |- P? => G1, A, G2 |- P?"))
    assert con.warnings


def test_rule_parse_errors():
    with pytest.raises(ParseError):
        parse_rule("no header here")
    with pytest.raises(ParseError):
        parse_rule("r: G1 |- A => => G1 |- A")


def test_match_instance_examples():
    sub = match_instance(schema("R*"), [S("p |- p"), S("q |- q")], S("p, q |- p * q"))
    assert sub["G1"] == (Var("p"),) and sub["G2"] == (Var("q"),)
    assert sub["A"] == Var("p") and sub["B"] == Var("q")
    assert match_instance(schema("id"), [], S("p |- p"))["p"] == Var("p")
    assert match_instance(schema("L*"), [S("p, a, b |- q")], S("p |- q")) is None


def test_check_examples():
    r = check_deduction(TENSOR, [], rule_node(schema("id"), {"p": Var("p")}))
    assert r.valid and r.standard and r.analytic
    t = parse_theory("|- a\n|- b\na * b |- c")
    left = rule_node(schema("R*"), {"G1": (), "G2": (), "A": Var("a"), "B": Var("b")},
                     [theory_leaf(S("|- a")), theory_leaf(S("|- b"))])
    cut = rule_node(schema("cut"), {"G1": (), "G2": (), "G3": (), "A": S("|- a * b").succedent, "P": Var("c")},
                    [left, theory_leaf(S("a * b |- c"))])
    r = check_deduction(TENSOR, t, cut)
    assert r.valid and not r.standard
    assert non_standard_cuts(cut) == 1


def test_check_rejects_bad_leaf():
    r = check_deduction(TENSOR, parse_theory("p |- q"), theory_leaf(S("q |- p")))
    assert not r.valid and r.violations


def test_read_simulation_snippet():
    # cut of a read theory leaf against an L* subtree, as in the encoding
    t = parse_theory("s1, A, Q1 |- s1 * Q2")
    text = """
    (node "s1, A, Q1 |- s1 * Q2" cut
      (theory "s1, A, Q1 |- s1 * Q2")
      (node "s1 * Q2 |- s1 * Q2" L*
        (node "s1, Q2 |- s1 * Q2" R*
          (node "s1 |- s1" id)
          (node "Q2 |- Q2" id))))
    """
    d = parse_derivation(text)
    r = check_deduction(TENSOR, t, d)
    assert r.valid and r.standard, r.violations


def test_is_regular_examples():
    assert is_regular(parse_theory("s1, a, Q1 |- s1 * Q2"))
    assert not is_regular(parse_theory("a * b |- c"))
    assert is_regular(parse_theory("|- phi * psi"))


def test_derivation_roundtrip():
    d = rule_node(schema("R*"), {"G1": (Var("p"),), "G2": (Var("q"),), "A": Var("p"), "B": Var("q")},
                  [rule_node(schema("id"), {"p": Var("p")}), rule_node(schema("id"), {"p": Var("q")})])
    back = parse_derivation(render_derivation(d))
    assert back.sequent == d.sequent and back.node_count() == 3
    assert check_deduction(TENSOR, [], back).valid
