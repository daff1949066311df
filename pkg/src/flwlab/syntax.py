"""Formulas, sequents and theories over subsignatures of the FL connectives.

Text grammar (ASCII, used by every file format in the package)::

    constants     0 1 top bot
    binary ops    *  /\\  \\/  \\  /      (fusion, meet, join, left and right residual)
    sequent       phi1, phi2 |- psi      or   phi1 |-      (empty succedent)

Nested binary formulas must be parenthesized; there is no precedence.
The canonical rendering used for ``size`` is fully parenthesized with one
token per variable, constant, connective, comma, turnstile and parenthesis,
so ``size(a * b) == 5`` (``( a * b )``) and ``size(p |- p) == 3``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .errors import MissingConnective, NotFlattenable, ParseError

FUSION = "*"
MEET = "/\\"
JOIN = "\\/"
LDIV = "\\"  # a \ b
RDIV = "/"  # b / a
BINARY_OPS = (FUSION, MEET, JOIN, LDIV, RDIV)
CONSTANTS = ("0", "1", "top", "bot")
FL_SIGNATURE = frozenset(CONSTANTS + BINARY_OPS)

_UNICODE = {FUSION: "⊗", MEET: "∧", JOIN: "∨", LDIV: "\\", RDIV: "/",
            "top": "⊤", "bot": "⊥"}

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class Formula:
    """Base class; concrete formulas are ``Var``, ``Const`` and ``Bin``."""

    __slots__ = ()

    def render(self, top: bool = True) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.render()


@dataclass(frozen=True, eq=True, repr=False)
class Var(Formula):
    name: str

    def __post_init__(self):
        if not IDENT_RE.match(self.name) or self.name in ("top", "bot"):
            raise ParseError(f"bad propositional variable name {self.name!r}")

    def render(self, top=True):
        return self.name

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Const(Formula):
    name: str

    def __post_init__(self):
        if self.name not in CONSTANTS:
            raise ParseError(f"unknown constant {self.name!r}")

    def render(self, top=True):
        return self.name

    def __repr__(self):
        return f"Const({self.name!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Bin(Formula):
    op: str
    left: Formula
    right: Formula

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ParseError(f"unknown connective {self.op!r}")

    def render(self, top=True):
        body = f"{self.left.render(False)} {self.op} {self.right.render(False)}"
        return body if top else f"({body})"

    def __repr__(self):
        return f"Bin({self.op!r}, {self.left!r}, {self.right!r})"


@dataclass(frozen=True)
class Sequent:
    antecedent: tuple
    succedent: Optional[Formula] = None

    def __post_init__(self):
        if not isinstance(self.antecedent, tuple):
            object.__setattr__(self, "antecedent", tuple(self.antecedent))

    def formulas(self):
        yield from self.antecedent
        if self.succedent is not None:
            yield self.succedent

    def render(self) -> str:
        ant = ", ".join(f.render() for f in self.antecedent)
        if self.succedent is None:
            return f"{ant} |-" if ant else "|-"
        return f"{ant} |- {self.succedent.render()}" if ant else f"|- {self.succedent.render()}"

    def __str__(self):
        return self.render()


class Fragment(frozenset):
    """A subset of the FL signature."""

    def __new__(cls, connectives: Iterable[str] = ()):
        conns = frozenset(connectives)
        bad = conns - FL_SIGNATURE
        if bad:
            raise ParseError(f"not FL connectives: {sorted(bad)}")
        return super().__new__(cls, conns)

    def admits(self, x: Union[Formula, Sequent]) -> bool:
        return connectives_of(x) <= self

    def __repr__(self):
        return f"Fragment({sorted(self)})"


FULL = Fragment(FL_SIGNATURE)


class Theory(frozenset):
    """A finite set of sequents."""

    def __new__(cls, sequents: Iterable[Sequent] = ()):
        return super().__new__(cls, sequents)

    def sorted(self):
        return sorted(self, key=sequent_key)

    def __repr__(self):
        return "Theory({" + "; ".join(s.render() for s in self.sorted()) + "})"


def formula_key(f: Formula):
    """Total order on formulas (size first, then rendering)."""
    return (size(f), f.render())


def sequent_key(s: Sequent):
    return (len(s.antecedent), [formula_key(f) for f in s.antecedent],
            formula_key(s.succedent) if s.succedent is not None else (0, ""))


def connectives_of(x) -> frozenset:
    if isinstance(x, Sequent):
        out = set()
        for f in x.formulas():
            out |= connectives_of(f)
        return frozenset(out)
    if isinstance(x, Var):
        return frozenset()
    if isinstance(x, Const):
        return frozenset([x.name])
    return frozenset([x.op]) | connectives_of(x.left) | connectives_of(x.right)


def fold_fusion(fs: Sequence[Formula], frag: Fragment = FULL) -> Formula:
    """Right-nested fusion of ``fs``; the empty fusion is the constant 1."""
    fs = list(fs)
    if not fs:
        if "1" not in frag:
            raise MissingConnective("empty fusion needs the constant 1")
        return Const("1")
    if len(fs) > 1 and FUSION not in frag:
        raise MissingConnective("fusion is not in the fragment")
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Bin(FUSION, f, out)
    return out


def flatten(f: Formula) -> tuple:
    """Left-to-right variable names of a formula built from fusion and variables."""
    if isinstance(f, Var):
        return (f.name,)
    if isinstance(f, Bin) and f.op == FUSION:
        return flatten(f.left) + flatten(f.right)
    raise NotFlattenable(f"cannot flatten {f.render()}")


def try_flatten(f: Formula):
    try:
        return flatten(f)
    except NotFlattenable:
        return None


def subformulas(f: Formula) -> set:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in out:
            continue
        out.add(g)
        if isinstance(g, Bin):
            stack.append(g.left)
            stack.append(g.right)
    return out


def subformula_closure(seqs: Iterable[Sequent]) -> frozenset:
    out = set()
    for s in seqs:
        for f in s.formulas():
            out |= subformulas(f)
    return frozenset(out)


def translate_sequent(s: Sequent, frag: Fragment = FULL) -> Formula:
    """The formula ``(fusion of antecedent) \\ succedent``, with 0 for an empty succedent."""
    missing = {FUSION, LDIV, "0", "1"} - set(frag)
    if missing:
        raise MissingConnective(f"translation needs {sorted(missing)}")
    rhs = s.succedent if s.succedent is not None else Const("0")
    return Bin(LDIV, fold_fusion(s.antecedent, frag), rhs)


def translate_theory(t: Iterable[Sequent], frag: Fragment = FULL) -> frozenset:
    return frozenset(translate_sequent(s, frag) for s in t)


def size(x) -> int:
    """Token count of the canonical fully parenthesized rendering."""
    if isinstance(x, Formula):
        if isinstance(x, Bin):
            return 3 + size(x.left) + size(x.right)
        return 1
    if isinstance(x, Sequent):
        n = len(x.antecedent)
        total = sum(size(f) for f in x.antecedent) + max(n - 1, 0) + 1
        if x.succedent is not None:
            total += size(x.succedent)
        return total
    if hasattr(x, "size"):
        return x.size()
    raise TypeError(f"no size for {type(x).__name__}")


def size_sum(xs: Iterable) -> int:
    return sum(size(x) for x in xs)


def size_max(xs: Iterable) -> int:
    return max((size(x) for x in xs), default=0)


def restrict_to(names: Iterable[str], w: Sequence[str]) -> tuple:
    keep = set(names)
    return tuple(x for x in w if x in keep)


def pretty(x) -> str:
    """Unicode rendering for humans (not parseable)."""
    text = x.render()
    for ascii_op in (MEET, JOIN):
        text = text.replace(f" {ascii_op} ", f" {_UNICODE[ascii_op]} ")
    text = text.replace(" * ", "⊗").replace("|-", "⊢")
    return text.replace("top", "⊤").replace("bot", "⊥")


# --- parsing -----------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\|-)|(/\\)|(\\/)|(\\)|(/)|(\*)|(\()|(\))|(,)|([A-Za-z_][A-Za-z0-9_]*)|([01]))")
_KINDS = ("turnstile", "op", "op", "op", "op", "op", "lpar", "rpar", "comma", "ident", "const")


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input at column {pos + 1}: {text[pos:pos + 10]!r}")
        for kind, group in zip(_KINDS, m.groups()):
            if group is not None:
                tokens.append((kind, group))
                break
        pos = m.end()
    return tokens


class _FormulaParser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, kind=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind):
            raise ParseError(f"expected {kind or 'token'}, got {tok[1]!r}")
        self.i += 1
        return tok

    def atom(self) -> Formula:
        kind, val = self.take()
        if kind == "lpar":
            f = self.formula()
            self.take("rpar")
            return f
        if kind == "const":
            return Const(val)
        if kind == "ident":
            if val in ("top", "bot"):
                return Const(val)
            return Var(val)
        raise ParseError(f"unexpected token {val!r}")

    def formula(self) -> Formula:
        left = self.atom()
        kind, val = self.peek()
        if kind == "op":
            self.i += 1
            right = self.atom()
            if self.peek()[0] == "op":
                raise ParseError("nested binary formulas need parentheses")
            return Bin(val, left, right)
        return left


def parse_formula(text: str) -> Formula:
    p = _FormulaParser(tokenize(text))
    f = p.formula()
    if p.peek()[0] is not None:
        raise ParseError(f"trailing input in formula {text!r}")
    return f


def parse_sequent(text: str) -> Sequent:
    p = _FormulaParser(tokenize(text))
    ant = []
    if p.peek()[0] != "turnstile":
        ant.append(p.formula())
        while p.peek()[0] == "comma":
            p.i += 1
            ant.append(p.formula())
    p.take("turnstile")
    succ = None
    if p.peek()[0] is not None:
        succ = p.formula()
    if p.peek()[0] is not None:
        raise ParseError(f"trailing input in sequent {text!r}")
    return Sequent(tuple(ant), succ)


def parse_theory(text: str) -> Theory:
    """One sequent per line; ``#`` starts a comment; blank lines are ignored."""
    seqs = []
    for lineno, line in enumerate(text.split("\n"), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            seqs.append(parse_sequent(line))
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    return Theory(seqs)


def render_theory(t: Iterable[Sequent]) -> str:
    return "".join(s.render() + "\n" for s in sorted(t, key=sequent_key))


def parse_fragment(text: str) -> Fragment:
    """Parse a fragment like ``*``, ``*,\\,0,1`` or ``full``."""
    text = text.strip()
    if text in ("full", "FL", "all"):
        return FULL
    if not text or text in ("none", "empty"):
        return Fragment()
    parts = [p.strip() for p in re.split(r"[,\s]+", text) if p.strip()]
    return Fragment(parts)
