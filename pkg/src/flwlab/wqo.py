"""Higman embedding, the weakening order on sequents and antichains."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Generic, Iterable, List, Optional, Sequence, TypeVar

from .errors import NotInAlphabet
from .syntax import Sequent, formula_key

T = TypeVar("T")


def subword_embed(w1: Sequence, w2: Sequence) -> bool:
    """True iff ``w1`` is obtained from ``w2`` by deleting elements."""
    n = len(w1)
    if n == 0:
        return True
    if n > len(w2):
        return False
    i = 0
    for x in w2:
        if x == w1[i]:
            i += 1
            if i == n:
                return True
    return False


def embedding_positions(w1: Sequence, w2: Sequence) -> Optional[list]:
    """Leftmost positions in ``w2`` that ``w1`` embeds into, or None."""
    out = []
    j = 0
    for x in w1:
        while j < len(w2) and w2[j] != x:
            j += 1
        if j == len(w2):
            return None
        out.append(j)
        j += 1
    return out


def seq_embed(s1: Sequent, s2: Sequent) -> bool:
    """``s1`` weakens to ``s2``: equal succedents, antecedent embedding."""
    return s1.succedent == s2.succedent and subword_embed(s1.antecedent, s2.antecedent)


def norm(s: Sequent) -> int:
    return len(s.antecedent)


@dataclass(frozen=True)
class SequentOrder:
    """The weakening order over phi-sequents, with a fixed enumeration of phi."""

    phi: frozenset

    @property
    def enumeration(self) -> tuple:
        return tuple(sorted(self.phi, key=formula_key))

    def leq(self, s1: Sequent, s2: Sequent) -> bool:
        return seq_embed(s1, s2)

    def norm(self, s: Sequent) -> int:
        return norm(s)

    def admits(self, s: Sequent) -> bool:
        return all(f in self.phi for f in s.formulas())


def reflection_map(order: SequentOrder, s: Sequent):
    """Map a sequent into the disjoint sum of |phi|+1 copies of phi*.

    Index 0 holds empty succedents, index j the succedent equal to the j-th
    formula of the enumeration (1-based).
    """
    if s.succedent is None:
        return 0, tuple(s.antecedent)
    try:
        j = order.enumeration.index(s.succedent) + 1
    except ValueError:
        raise NotInAlphabet(f"succedent {s.succedent} not in phi") from None
    return j, tuple(s.antecedent)


def sum_leq(a, b) -> bool:
    """Order of the disjoint sum: same copy, Higman embedding inside it."""
    return a[0] == b[0] and subword_embed(a[1], b[1])


@dataclass
class Subsumed:
    by: object


@dataclass
class Inserted:
    removed: list


class Antichain(Generic[T]):
    """Pairwise-incomparable elements under ``leq``; a flat list with linear scans."""

    def __init__(self, leq: Callable[[T, T], bool] = seq_embed, items: Iterable[T] = ()):
        self.leq = leq
        self.elements: List[T] = []
        for x in items:
            self.insert(x)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        return x in self.elements

    def subsumer(self, x: T) -> Optional[T]:
        for y in self.elements:
            if self.leq(y, x):
                return y
        return None

    def covers(self, x: T) -> bool:
        return self.subsumer(x) is not None

    def insert(self, x: T):
        y = self.subsumer(x)
        if y is not None:
            return Subsumed(y)
        removed = [y for y in self.elements if self.leq(x, y)]
        if removed:
            self.elements = [y for y in self.elements if not self.leq(x, y)]
        self.elements.append(x)
        return Inserted(removed)

    def merge(self, other: Iterable[T]):
        for x in other:
            self.insert(x)
        return self


def antichain_insert(a: Antichain, x):
    return a.insert(x)


def minimal_elements(items: Iterable[T], leq: Callable[[T, T], bool] = seq_embed) -> list:
    return list(Antichain(leq, items))


@dataclass
class ControlledTrace:
    """Norms of an extracted bad sequence with its control function and parameter."""

    norms: list
    control: Callable[[int], int]
    initial: int
    elements: list = field(default_factory=list)


def control_check(tr: ControlledTrace) -> bool:
    """True iff ``norms[i] < g^i(n)`` for every index ``i``."""
    bound = tr.initial
    for i, x in enumerate(tr.norms):
        if i > 0:
            bound = tr.control(bound)
        if not x < bound:
            return False
    return True


def is_bad(seq: Sequence, leq: Callable = seq_embed) -> bool:
    return all(not leq(seq[i], seq[j]) for i in range(len(seq)) for j in range(i + 1, len(seq)))


def minimal_common_supersequences(words: Sequence[Sequence]) -> list:
    """All Higman-minimal words that every member of ``words`` embeds into.

    Pairs are combined by crossing both words off letter by letter (taking a
    letter from either side, or a shared letter from both); more words are
    folded in one at a time.
    """
    words = [tuple(w) for w in words]
    if not words:
        return [()]
    current = [words[0]]
    for w in words[1:]:
        cands = set()
        for c in current:
            cands |= _pair_supersequences(c, w)
        current = minimal_elements(sorted(cands, key=lambda x: (len(x), repr(x))), subword_embed)
    return sorted(set(current), key=lambda x: (len(x), repr(x)))


def _pair_supersequences(x: tuple, y: tuple) -> set:
    memo = {}

    def go(i, j):
        key = (i, j)
        if key in memo:
            return memo[key]
        if i == len(x):
            res = {y[j:]}
        elif j == len(y):
            res = {x[i:]}
        else:
            res = set()
            if x[i] == y[j]:
                res |= {(x[i],) + r for r in go(i + 1, j + 1)}
            else:
                res |= {(x[i],) + r for r in go(i + 1, j)}
                res |= {(y[j],) + r for r in go(i, j + 1)}
        memo[key] = res
        return res

    return go(0, 0)
