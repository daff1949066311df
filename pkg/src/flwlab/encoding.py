"""Encoding lossy channel system reachability as sequent deducibility.

Each state, channel marker and letter becomes a propositional variable.
A configuration is encoded as the sequence ``Q, s_1, w_1, e_1, ..., s_n,
w_n, e_n``; the question ``u ->* v`` becomes the sequent
``enc(u) |- fusion of enc(v)`` over the theory ``theory_of(cs)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .calculus import Derivation, rule_node, schema, theory_leaf
from .cutelim import weaken_to
from .errors import InternalInvariantViolated, ParseError
from .lcs import ChannelSystem, Configuration, Instruction, validate_trace
from .wqo import subword_embed
from .syntax import FUSION, IDENT_RE, Bin, Sequent, Theory, Var, fold_fusion, try_flatten

SCHEMES = ("named", "indexed")


@dataclass(frozen=True)
class LcsVocabulary:
    state_vars: dict
    start_markers: dict
    end_markers: dict
    letter_vars: dict

    @property
    def state_set(self) -> frozenset:
        return frozenset(self.state_vars.values())

    @property
    def marker_set(self) -> frozenset:
        return frozenset(self.start_markers.values()) | frozenset(self.end_markers.values())

    @property
    def non_state(self) -> list:
        out = []
        for ch in self.start_markers:
            out += [self.start_markers[ch], self.end_markers[ch]]
        return out + list(self.letter_vars.values())


def vocabulary(cs: ChannelSystem, scheme: str = "named") -> LcsVocabulary:
    """Variables for ``cs``.

    ``named`` gives ``Q_<state>``, ``s_<k>``, ``e_<k>``, ``A_<letter>``;
    ``indexed`` gives ``Q<i>`` by state order, ``s<k>``, ``e<k>`` and the
    upper-cased letter.
    """
    if scheme == "named":
        states = {q: f"Q_{q}" for q in cs.states}
        starts = {c: f"s_{k}" for k, c in enumerate(cs.channels, 1)}
        ends = {c: f"e_{k}" for k, c in enumerate(cs.channels, 1)}
        letters = {a: f"A_{a}" for a in cs.alphabet}
    elif scheme == "indexed":
        states = {q: f"Q{i}" for i, q in enumerate(cs.states, 1)}
        starts = {c: f"s{k}" for k, c in enumerate(cs.channels, 1)}
        ends = {c: f"e{k}" for k, c in enumerate(cs.channels, 1)}
        letters = {a: a.upper() for a in cs.alphabet}
    else:
        raise ParseError(f"unknown naming scheme {scheme!r}")
    names = list(states.values()) + list(starts.values()) + list(ends.values()) + list(letters.values())
    if len(set(names)) != len(names):
        raise ParseError("variable names collide under the chosen scheme")
    for n in names:
        if not IDENT_RE.match(n) or n in ("top", "bot"):
            raise ParseError(f"generated name {n!r} is not a variable")
    wrap = lambda d: {k: Var(v) for k, v in d.items()}
    return LcsVocabulary(wrap(states), wrap(starts), wrap(ends), wrap(letters))


def _fuse(a, b):
    return Bin(FUSION, a, b)


def theory_of(cs: ChannelSystem, vocab: Optional[LcsVocabulary] = None) -> Theory:
    v = vocab or vocabulary(cs)
    out = set()
    for ins in cs.instructions:
        qi, qj = v.state_vars[ins.source], v.state_vars[ins.target]
        a = v.letter_vars[ins.letter]
        s, e = v.start_markers[ins.channel], v.end_markers[ins.channel]
        if ins.op == "!":
            out.add(Sequent((e, qi), _fuse(a, _fuse(e, qj))))
        else:
            out.add(Sequent((s, a, qi), _fuse(s, qj)))
    for q in v.state_vars.values():
        for r in v.non_state:
            out.add(Sequent((r, q), _fuse(q, r)))
            out.add(Sequent((q, r), _fuse(r, q)))
    return Theory(out)


def encode_conf(cs: ChannelSystem, u: Configuration, vocab: Optional[LcsVocabulary] = None) -> tuple:
    v = vocab or vocabulary(cs)
    out = [v.state_vars[u.state]]
    for ch, w in zip(cs.channels, u.words):
        out.append(v.start_markers[ch])
        out += [v.letter_vars[a] for a in w]
        out.append(v.end_markers[ch])
    return tuple(out)


def encode_problem(cs: ChannelSystem, u: Configuration, v: Configuration,
                   vocab: Optional[LcsVocabulary] = None) -> Sequent:
    vocab = vocab or vocabulary(cs)
    return Sequent(encode_conf(cs, u, vocab), fold_fusion(encode_conf(cs, v, vocab)))


def commuted_encodings(cs: ChannelSystem, u: Configuration, v: Configuration,
                       vocab: Optional[LcsVocabulary] = None) -> list:
    """The canonical goal with u's state variable moved to every position."""
    base = encode_problem(cs, u, v, vocab)
    q, rest = base.antecedent[0], base.antecedent[1:]
    return [Sequent(rest[:i] + (q,) + rest[i:], base.succedent) for i in range(len(base.antecedent))]


@dataclass
class EncodedInstance:
    theory: Theory
    canonical_goal: Sequent
    commuted_goals: list
    vocabulary: LcsVocabulary


def reduce(cs: ChannelSystem, u: Configuration, v: Configuration, scheme: str = "named") -> EncodedInstance:
    vocab = vocabulary(cs, scheme)
    return EncodedInstance(theory_of(cs, vocab), encode_problem(cs, u, v, vocab),
                           commuted_encodings(cs, u, v, vocab), vocab)


# --- computations to deductions ---------------------------------------------

def _standard_cut(leaf: Sequent, d: Derivation, k: int) -> Derivation:
    ant = d.sequent.antecedent
    if ant[k] != leaf.succedent:
        raise InternalInvariantViolated("cut formula does not match")
    sub = {"G3": leaf.antecedent, "A": leaf.succedent, "G1": ant[:k], "G2": ant[k + 1:],
           "P": d.sequent.succedent}
    return rule_node(schema("cut"), sub, [theory_leaf(leaf), d])


def _fuse_left(d: Derivation, k: int) -> Derivation:
    """(L*) joining antecedent positions ``k`` and ``k + 1``."""
    ant = d.sequent.antecedent
    sub = {"G1": ant[:k], "A": ant[k], "B": ant[k + 1], "G2": ant[k + 2:], "P": d.sequent.succedent}
    return rule_node(schema("L*"), sub, [d])


def _swap(d: Derivation, k: int) -> Derivation:
    """Exchange positions ``k`` and ``k + 1`` using a commutation sequent of the theory."""
    ant = d.sequent.antecedent
    x, y = ant[k], ant[k + 1]
    d = _fuse_left(d, k)
    return _standard_cut(Sequent((y, x), _fuse(x, y)), d, k)


def _move(d: Derivation, src: int, dst: int) -> Derivation:
    while src < dst:
        d = _swap(d, src)
        src += 1
    while src > dst:
        d = _swap(d, src - 1)
        src -= 1
    return d


def base_proof(fs: Sequence) -> Derivation:
    """``fs |- fold_fusion(fs)`` by identities and right fusion."""
    fs = tuple(fs)
    if len(fs) == 1:
        return rule_node(schema("id"), {"p": fs[0]})
    rest = base_proof(fs[1:])
    left = rule_node(schema("id"), {"p": fs[0]})
    sub = {"G1": (fs[0],), "G2": fs[1:], "A": fs[0], "B": rest.sequent.succedent}
    return rule_node(schema("R*"), sub, [left, rest])


def compile_computation(cs: ChannelSystem, u: Configuration, trace: Sequence,
                        vocab: Optional[LcsVocabulary] = None) -> Derivation:
    """A standard deduction of the canonical encoding from a lossy computation ``trace``."""
    vocab = vocab or vocabulary(cs)
    confs = validate_trace(cs, u, trace)
    d = base_proof(encode_conf(cs, confs[-1], vocab))
    for i in range(len(trace) - 1, -1, -1):
        before = confs[i]
        kind, data = trace[i]
        if kind == "lossy":
            d = weaken_to(d, encode_conf(cs, before, vocab))
        else:
            d = _compile_perfect(cs, vocab, d, data)
        if d.sequent.antecedent != encode_conf(cs, before, vocab):
            raise InternalInvariantViolated(f"compiled step {i} ends in {d.sequent}")
    return d


def _compile_perfect(cs, vocab, d, ins: Instruction) -> Derivation:
    qi, qj = vocab.state_vars[ins.source], vocab.state_vars[ins.target]
    a = vocab.letter_vars[ins.letter]
    s, e = vocab.start_markers[ins.channel], vocab.end_markers[ins.channel]
    ant = d.sequent.antecedent
    if ins.op == "?":
        at = ant.index(s)
        d = _move(d, 0, at)  # Q_j now sits right after s
        d = _fuse_left(d, at - 1)
        d = _standard_cut(Sequent((s, a, qi), _fuse(s, qj)), d, at - 1)
        return _move(d, at + 1, 0)
    at = ant.index(e)
    d = _move(d, 0, at)  # ..., A_a, e, Q_j, ...
    d = _fuse_left(d, at - 1)  # e * Q_j
    d = _fuse_left(d, at - 2)  # A_a * (e * Q_j)
    d = _standard_cut(Sequent((e, qi), _fuse(a, _fuse(e, qj))), d, at - 2)
    return _move(d, at - 1, 0)


# --- structural lemma checks -------------------------------------------------

@dataclass
class LemmaReport:
    checked: int = 0
    skipped: int = 0
    violations: list = field(default_factory=list)  # (check, sequent)

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list:
        out = [f"lemma_checked: {self.checked}", f"lemma_skipped: {self.skipped}",
               f"lemma_violations: {len(self.violations)}"]
        out += [f"violation {name}: {s.render()}" for name, s in self.violations]
        return out


def _conf_subsequence(vocab: LcsVocabulary, names: Sequence) -> bool:
    """True iff ``names`` is a subsequence of the encoding of some configuration."""
    channels = list(vocab.start_markers)
    slot = {}
    for q in vocab.state_vars.values():
        slot[q] = ("Q", 0)
    for k, ch in enumerate(channels, 1):
        slot[vocab.start_markers[ch]] = ("M", 3 * k - 2)
        slot[vocab.end_markers[ch]] = ("M", 3 * k)
    letters = set(vocab.letter_vars.values())
    r = -1
    for x in names:
        if x in letters:
            k = 1
            while 3 * k - 1 < r:
                k += 1
            if k > len(channels):
                return False
            r = 3 * k - 1
            continue
        if x not in slot:
            return False
        _, pos = slot[x]
        if pos <= r:
            return False
        r = pos
    return True


def lemma_property_suite(seqs: Iterable[Sequent], vocab: LcsVocabulary) -> LemmaReport:
    """Check the structural properties every deducible sequent of ``theory_of`` has."""
    rep = LemmaReport()
    states = vocab.state_set
    markers = vocab.marker_set
    for s in sorted(seqs, key=lambda x: x.render()):
        rep.checked += 1
        if s.succedent is None:
            rep.violations.append(("nonempty-succedent", s))
            continue
        flat_ant = []
        for f in s.antecedent:
            fl = try_flatten(f)
            if fl is None:
                flat_ant = None
                break
            flat_ant += fl
        flat_succ = try_flatten(s.succedent)
        if flat_ant is None:
            rep.skipped += 1
            continue
        state_names = {q.name for q in states}
        ant_has_state = any(x in state_names for x in flat_ant)
        if flat_succ is not None and not ant_has_state:
            free = [x for x in flat_succ if x not in state_names]
            if not subword_embed(free, flat_ant):
                rep.violations.append(("state-free", s))
        if flat_succ is not None and s.succedent == fold_fusion([Var(x) for x in flat_succ]):
            if _conf_subsequence(vocab, [Var(x) for x in flat_succ]):
                needed = {x for x in flat_succ if Var(x) in markers}
                if not needed <= set(flat_ant):
                    rep.violations.append(("contiguous-markers", s))
        head = s.succedent
        if isinstance(head, Bin) and head.op == FUSION:
            head = head.left
        if head in states and not ant_has_state:
            rep.violations.append(("state-on-right", s))
    return rep
