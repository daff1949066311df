import itertools

from hypothesis import given, settings, strategies as st

from flwlab.syntax import Sequent, Var, parse_formula, parse_sequent
from flwlab.wqo import (Antichain, ControlledTrace, Inserted, SequentOrder, Subsumed, control_check,
                        embedding_positions, is_bad, minimal_common_supersequences, minimal_elements,
                        norm, reflection_map, seq_embed, subword_embed, sum_leq)

S = parse_sequent
PHI = frozenset(Var(x) for x in "pqr")


def test_subword_examples():
    assert subword_embed("ab", "aab")
    assert not subword_embed("ba", "ab")
    assert subword_embed("", "whatever")
    assert not subword_embed("aa", "a")


def test_seq_embed_examples():
    assert seq_embed(S("p |- q"), S("p, r |- q"))
    assert not seq_embed(S("p |- q"), S("p |- q * q"))
    assert seq_embed(S("p |-"), S("p, r |-"))


def test_norm_examples():
    assert norm(S("p, q |- r")) == 2
    assert norm(S("|- phi")) == 0
    assert norm(S("Q1, s1, A, A, e1, s2, B, e2 |- Q2 * (s1 * (A * (e1 * (s2 * (B * e2)))))")) == 8


def test_reflection_examples():
    order = SequentOrder(frozenset({parse_formula("p"), parse_formula("q")}))
    assert reflection_map(order, S("p |-")) == (0, (Var("p"),))
    assert reflection_map(order, S("p |- q")) == (2, (Var("p"),))


def test_antichain_examples():
    a = Antichain(items=[S("p |- q")])
    assert isinstance(a.insert(S("p, r |- q")), Subsumed)
    b = Antichain(items=[S("p, r |- q")])
    res = b.insert(S("p |- q"))
    assert isinstance(res, Inserted) and res.removed == [S("p, r |- q")]
    c = Antichain(items=[S("p |- q")])
    res = c.insert(S("a |- b"))
    assert isinstance(res, Inserted) and res.removed == []


def test_control_examples():
    assert control_check(ControlledTrace([1, 3], lambda x: 2 * x, 2))
    assert not control_check(ControlledTrace([2], lambda x: 2 * x, 2))


def test_embedding_positions_are_a_witness():
    w1, w2 = "ab", "xaybz"
    pos = embedding_positions(w1, w2)
    assert [w2[i] for i in pos] == list(w1)
    assert list(pos) == sorted(pos)


def test_mcs_small():
    got = {"".join(w) for w in minimal_common_supersequences(["ab", "ba"])}
    assert got == {"aba", "bab"}
    assert {"".join(w) for w in minimal_common_supersequences(["a", "a"])} == {"a"}


def test_norm_is_proper_on_tiny_phi():
    # finitely many sequents under each norm bound: count matches the closed form
    phi = sorted(PHI, key=str)
    for n in range(4):
        seqs = {Sequent(ant, succ) for k in range(n) for ant in itertools.product(phi, repeat=k)
                for succ in [None, *phi]}
        assert len(seqs) == sum(len(phi) ** k for k in range(n)) * (len(phi) + 1)


atoms = st.sampled_from(sorted(PHI, key=str))
words = st.lists(atoms, max_size=5).map(tuple)
sequents = st.builds(lambda a, s: Sequent(a, s), words, st.one_of(st.none(), atoms))


def _insert_bfs(s1, s2):
    # reachability by single insertions, restricted to s2's letters
    if s1.succedent != s2.succedent:
        return False
    seen, frontier = {s1.antecedent}, [s1.antecedent]
    while frontier:
        nxt = []
        for w in frontier:
            if w == s2.antecedent:
                return True
            if len(w) >= len(s2.antecedent):
                continue
            for i in range(len(w) + 1):
                for x in set(s2.antecedent):
                    u = w[:i] + (x,) + w[i:]
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
        frontier = nxt
    return False


@given(sequents, sequents, sequents)
def test_order_reflexive_transitive(a, b, c):
    assert seq_embed(a, a)
    if seq_embed(a, b) and seq_embed(b, c):
        assert seq_embed(a, c)


@given(sequents, sequents)
def test_embed_matches_insertion_oracle(a, b):
    assert seq_embed(a, b) == _insert_bfs(a, b)


@given(sequents, sequents)
def test_reflection_contract(a, b):
    order = SequentOrder(PHI)
    ia, ib = reflection_map(order, a), reflection_map(order, b)
    if sum_leq(ia, ib):
        assert seq_embed(a, b)
    assert len(ia[1]) <= norm(a)


@settings(max_examples=60)
@given(st.lists(sequents, max_size=10), st.randoms())
def test_antichain_order_insensitive(xs, rnd):
    a = minimal_elements(xs)
    ys = list(xs)
    rnd.shuffle(ys)
    b = minimal_elements(ys)
    assert set(a) == set(b)
    assert is_bad(a) and is_bad(list(reversed(a)))
    for x in xs:
        assert any(seq_embed(m, x) for m in a)


@settings(max_examples=50)
@given(st.lists(words, min_size=1, max_size=3))
def test_mcs_are_common_and_minimal(ws):
    res = minimal_common_supersequences(ws)
    assert res
    for m in res:
        assert all(subword_embed(w, m) for w in ws)
    for m1, m2 in itertools.permutations(res, 2):
        assert not subword_embed(m1, m2)
