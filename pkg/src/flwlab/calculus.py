"""Rule schemas, calculi, derivations and the deduction checker.

Pattern syntax (rule files and the builtin table)::

    G, G1, G2 ...     sequence metavariables
    A, B, ...         formula metavariables (any other capitalised name)
    p, q, ...         propositional metavariables (lower-case names)
    P?                succedent metavariable (empty or one formula)

A rule is written ``rule NAME: P1 ; P2 => C``; an axiom has nothing before
``=>``.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from . import syntax as sx
from .errors import NotStructural, ParseError
from .syntax import Bin, Const, Formula, Fragment, Sequent, Theory, Var

log = logging.getLogger(__name__)


# --- patterns ----------------------------------------------------------------

@dataclass(frozen=True)
class PSeq:
    name: str

    def render(self, top=True):
        return self.name


@dataclass(frozen=True)
class PForm:
    name: str

    def render(self, top=True):
        return self.name


@dataclass(frozen=True)
class PProp:
    name: str

    def render(self, top=True):
        return self.name


@dataclass(frozen=True)
class PSucc:
    name: str

    def render(self, top=True):
        return self.name + "?"


@dataclass(frozen=True)
class PConst:
    name: str

    def render(self, top=True):
        return self.name


@dataclass(frozen=True)
class PApp:
    op: str
    left: object
    right: object

    def render(self, top=True):
        body = f"{self.left.render(False)} {self.op} {self.right.render(False)}"
        return body if top else f"({body})"


def _pattern_size(p) -> int:
    if isinstance(p, PApp):
        return 3 + _pattern_size(p.left) + _pattern_size(p.right)
    return 1


def _pattern_vars(p, out: set):
    if isinstance(p, PApp):
        _pattern_vars(p.left, out)
        _pattern_vars(p.right, out)
    elif isinstance(p, (PSeq, PForm, PProp, PSucc)):
        out.add(p.name)
    return out


def _pattern_connectives(p, out: set):
    if isinstance(p, PApp):
        out.add(p.op)
        _pattern_connectives(p.left, out)
        _pattern_connectives(p.right, out)
    elif isinstance(p, PConst):
        out.add(p.name)
    return out


@dataclass(frozen=True)
class SequentPattern:
    antecedent: tuple
    succedent: object = None  # PSucc, formula pattern or None

    def items(self):
        yield from self.antecedent
        if self.succedent is not None:
            yield self.succedent

    def render(self):
        ant = ", ".join(p.render() for p in self.antecedent)
        succ = self.succedent.render() if self.succedent is not None else ""
        return " ".join(x for x in (ant, "|-", succ) if x)

    def size(self):
        n = len(self.antecedent)
        total = sum(_pattern_size(p) for p in self.antecedent) + max(n - 1, 0) + 1
        if self.succedent is not None:
            total += _pattern_size(self.succedent)
        return total

    def variables(self) -> set:
        out = set()
        for p in self.items():
            _pattern_vars(p, out)
        return out


@dataclass(frozen=True)
class RuleSchema:
    name: str
    premises: tuple
    conclusion: SequentPattern
    variant: int = 0

    @property
    def arity(self):
        return len(self.premises)

    def render(self):
        prem = " ; ".join(p.render() for p in self.premises)
        return f"rule {self.name}: {prem + ' ' if prem else ''}=> {self.conclusion.render()}"

    def size(self):
        return (sum(p.size() for p in self.premises) + max(len(self.premises) - 1, 0) + 1
                + self.conclusion.size())

    def connectives(self) -> frozenset:
        out = set()
        for pat in self.premises + (self.conclusion,):
            for p in pat.items():
                _pattern_connectives(p, out)
        return frozenset(out)

    def is_structural(self) -> bool:
        return not self.connectives()


# --- pattern text ------------------------------------------------------------

_PTOKEN_RE = re.compile(
    r"\s*(?:(=>)|(\|-)|(/\\)|(\\/)|(\\)|(/)|(\*)|(\()|(\))|(,)|(;)|([A-Za-z_][A-Za-z0-9_]*\??)|([01]))")
_PKINDS = ("arrow", "turnstile", "op", "op", "op", "op", "op", "lpar", "rpar", "comma", "semi", "ident", "const")
_SEQVAR_RE = re.compile(r"G\d*\Z")


def _ptokenize(text):
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _PTOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input in rule at {text[pos:pos + 10]!r}")
        for kind, g in zip(_PKINDS, m.groups()):
            if g is not None:
                out.append((kind, g))
                break
        pos = m.end()
    return out


def _classify(ident):
    if ident.endswith("?"):
        return PSucc(ident[:-1])
    if ident in ("top", "bot"):
        return PConst(ident)
    if _SEQVAR_RE.match(ident):
        return PSeq(ident)
    if ident[0].islower():
        return PProp(ident)
    return PForm(ident)


class _PatternParser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind):
            raise ParseError(f"expected {kind or 'token'} in rule, got {tok[1]!r}")
        self.i += 1
        return tok

    def atom(self):
        kind, val = self.take()
        if kind == "lpar":
            p = self.formula()
            self.take("rpar")
            return p
        if kind == "const":
            return PConst(val)
        if kind == "ident":
            return _classify(val)
        raise ParseError(f"unexpected {val!r} in rule")

    def formula(self):
        left = self.atom()
        if self.peek()[0] == "op":
            _, op = self.take()
            right = self.atom()
            for side in (left, right):
                if isinstance(side, (PSeq, PSucc)):
                    raise ParseError("sequence/succedent metavariables cannot occur inside formulas")
            return PApp(op, left, right)
        return left

    def sequent(self):
        ant = []
        if self.peek()[0] != "turnstile":
            ant.append(self.formula())
            while self.peek()[0] == "comma":
                self.i += 1
                ant.append(self.formula())
        self.take("turnstile")
        succ = None
        if self.peek()[0] not in (None, "semi", "arrow"):
            succ = self.formula()
        for a in ant:
            if isinstance(a, PSucc):
                raise ParseError("succedent metavariable in antecedent")
        if isinstance(succ, PSeq):
            raise ParseError("sequence metavariable in succedent")
        return SequentPattern(tuple(ant), succ)


def parse_sequent_pattern(text: str) -> SequentPattern:
    p = _PatternParser(_ptokenize(text))
    pat = p.sequent()
    if p.peek()[0] is not None:
        raise ParseError(f"trailing input in pattern {text!r}")
    return pat


def parse_rule(text: str, variant: int = 0) -> RuleSchema:
    """Parse ``rule NAME: P1 ; P2 => C`` (the leading ``rule`` keyword is optional)."""
    text = text.strip()
    if text.startswith("rule "):
        text = text[5:]
    name, sep, body = text.partition(":")
    name = name.strip()
    if not sep or not name or " " in name:
        raise ParseError(f"bad rule header in {text!r}")
    p = _PatternParser(_ptokenize(body))
    premises = []
    if p.peek()[0] != "arrow":
        premises.append(p.sequent())
        while p.peek()[0] == "semi":
            p.i += 1
            premises.append(p.sequent())
    p.take("arrow")
    concl = p.sequent()
    if p.peek()[0] is not None:
        raise ParseError(f"trailing input in rule {name}")
    return RuleSchema(name, tuple(premises), concl, variant)


def parse_rules(text: str) -> list:
    out = []
    for lineno, line in enumerate(text.split("\n"), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(parse_rule(line))
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    return out


# --- the builtin calculus ----------------------------------------------------

_BUILTIN_TEXT = [
    ("id", "=> p |- p"),
    ("botL", "=> G1, bot, G2 |- P?"),
    ("topR", "=> G1 |- top"),
    ("0L", "=> 0 |-"),
    ("1R", "=> |- 1"),
    ("w-l", "G1, G2 |- P? => G1, A, G2 |- P?"),
    ("w-r", "G1 |- => G1 |- A"),
    ("cut", "G3 |- A ; G1, A, G2 |- P? => G1, G3, G2 |- P?"),
    ("0R", "G1 |- => G1 |- 0"),
    ("1L", "G1, G2 |- P? => G1, 1, G2 |- P?"),
    ("L*", "G1, A, B, G2 |- P? => G1, (A * B), G2 |- P?"),
    ("R*", "G1 |- A ; G2 |- B => G1, G2 |- (A * B)"),
    ("L\\/", "G1, A, G2 |- P? ; G1, B, G2 |- P? => G1, (A \\/ B), G2 |- P?"),
    ("R\\/", "G1 |- A => G1 |- (A \\/ B)"),
    ("R\\/", "G1 |- B => G1 |- (A \\/ B)"),
    ("L/\\", "G1, A, G2 |- P? => G1, (A /\\ B), G2 |- P?"),
    ("L/\\", "G1, B, G2 |- P? => G1, (A /\\ B), G2 |- P?"),
    ("R/\\", "G1 |- A ; G1 |- B => G1 |- (A /\\ B)"),
    ("L/", "G1 |- A ; G2, B, G3 |- P? => G2, (B / A), G1, G3 |- P?"),
    ("R/", "G1, A |- B => G1 |- (B / A)"),
    ("L\\", "G1 |- A ; G2, B, G3 |- P? => G2, G1, (A \\ B), G3 |- P?"),
    ("R\\", "A, G1 |- B => G1 |- (A \\ B)"),
]


def _build_builtins():
    out, seen = [], {}
    for name, body in _BUILTIN_TEXT:
        variant = seen.get(name, 0)
        seen[name] = variant + 1
        out.append(parse_rule(f"{name}: {body}", variant))
    return tuple(out)


BUILTIN_RULES = _build_builtins()
BUILTIN_NAMES = tuple(dict.fromkeys(r.name for r in BUILTIN_RULES))


@dataclass(frozen=True)
class Calculus:
    fragment: Fragment
    rules: tuple
    warnings: tuple = ()

    @property
    def rule_names(self) -> tuple:
        return tuple(dict.fromkeys(r.name for r in self.rules))

    def schemas(self, name: str) -> list:
        return [r for r in self.rules if r.name == name]

    def size(self) -> int:
        """Sum of the written sizes of all rule schemas."""
        return sum(r.size() for r in self.rules)

    def size_max(self) -> int:
        return max((r.size() for r in self.rules), default=0)

    @property
    def is_builtin(self) -> bool:
        return all(r in BUILTIN_RULES for r in self.rules)

    @property
    def user_rules(self) -> tuple:
        return tuple(r for r in self.rules if r not in BUILTIN_RULES)


def builtin_calculus(frag: Fragment) -> Calculus:
    frag = Fragment(frag)
    rules = tuple(r for r in BUILTIN_RULES if r.connectives() <= frag)
    return Calculus(frag, rules)


def add_structural_rule(c: Calculus, r: RuleSchema) -> Calculus:
    if not r.is_structural():
        raise NotStructural(f"rule {r.name} mentions {sorted(r.connectives())}")
    if r.name in c.rule_names:
        raise NotStructural(f"rule name {r.name} already in use")
    warning = f"amenability of {r.name} is assumed, not verified"
    log.warning(warning)
    return Calculus(c.fragment, c.rules + (r,), c.warnings + (warning,))


# --- substitution and matching ----------------------------------------------

def _match_formula(pat, f: Formula, sub: dict) -> Optional[dict]:
    if isinstance(pat, (PForm, PProp)):
        if isinstance(pat, PProp) and not isinstance(f, Var):
            return None
        bound = sub.get(pat.name, _MISSING)
        if bound is _MISSING:
            out = dict(sub)
            out[pat.name] = f
            return out
        return sub if bound == f else None
    if isinstance(pat, PConst):
        return sub if isinstance(f, Const) and f.name == pat.name else None
    if isinstance(pat, PApp):
        if not isinstance(f, Bin) or f.op != pat.op:
            return None
        s1 = _match_formula(pat.left, f.left, sub)
        return None if s1 is None else _match_formula(pat.right, f.right, s1)
    raise TypeError(f"not a formula pattern: {pat!r}")


_MISSING = object()


def match_antecedent(items: Sequence, ant: Sequence[Formula], sub: dict) -> Iterator[dict]:
    """All extensions of ``sub`` making ``items`` instantiate to ``ant``."""
    if not items:
        if not ant:
            yield sub
        return
    head, rest = items[0], items[1:]
    if isinstance(head, PSeq):
        bound = sub.get(head.name, _MISSING)
        if bound is not _MISSING:
            n = len(bound)
            if tuple(ant[:n]) == bound:
                yield from match_antecedent(rest, ant[n:], sub)
            return
        min_rest = sum(1 for x in rest if not isinstance(x, PSeq))
        for n in range(len(ant) - min_rest + 1):
            out = dict(sub)
            out[head.name] = tuple(ant[:n])
            yield from match_antecedent(rest, ant[n:], out)
        return
    if not ant:
        return
    s1 = _match_formula(head, ant[0], sub)
    if s1 is not None:
        yield from match_antecedent(rest, ant[1:], s1)


def match_succedent(pat, succ: Optional[Formula], sub: dict) -> Optional[dict]:
    if pat is None:
        return sub if succ is None else None
    if isinstance(pat, PSucc):
        bound = sub.get(pat.name, _MISSING)
        if bound is _MISSING:
            out = dict(sub)
            out[pat.name] = succ
            return out
        return sub if bound == succ else None
    if succ is None:
        return None
    return _match_formula(pat, succ, sub)


def match_sequent(pat: SequentPattern, s: Sequent, sub: dict) -> Iterator[dict]:
    s1 = match_succedent(pat.succedent, s.succedent, sub)
    if s1 is None:
        return
    yield from match_antecedent(pat.antecedent, s.antecedent, s1)


def _match_all(pats, seqs, sub):
    if not pats:
        yield sub
        return
    for s1 in match_sequent(pats[0], seqs[0], sub):
        yield from _match_all(pats[1:], seqs[1:], s1)


def match_instance(r: RuleSchema, premises: Sequence[Sequent], conclusion: Sequent) -> Optional[dict]:
    """A substitution turning ``r`` into ``premises / conclusion``, or None."""
    if len(premises) != r.arity:
        return None
    for sub in _match_all((r.conclusion,) + tuple(r.premises), (conclusion,) + tuple(premises), {}):
        return sub
    return None


def instantiate_formula(pat, sub: dict) -> Formula:
    if isinstance(pat, (PForm, PProp)):
        return sub[pat.name]
    if isinstance(pat, PConst):
        return Const(pat.name)
    if isinstance(pat, PApp):
        return Bin(pat.op, instantiate_formula(pat.left, sub), instantiate_formula(pat.right, sub))
    raise TypeError(f"not a formula pattern: {pat!r}")


def instantiate(pat: SequentPattern, sub: dict) -> Sequent:
    ant = []
    for item in pat.antecedent:
        if isinstance(item, PSeq):
            ant.extend(sub[item.name])
        else:
            ant.append(instantiate_formula(item, sub))
    if pat.succedent is None:
        succ = None
    elif isinstance(pat.succedent, PSucc):
        succ = sub[pat.succedent.name]
    else:
        succ = instantiate_formula(pat.succedent, sub)
    return Sequent(tuple(ant), succ)


def antecedent_layout(pat: SequentPattern, sub: dict) -> list:
    """For each pattern item, the (start, stop) slice it occupies once instantiated."""
    out, pos = [], 0
    for item in pat.antecedent:
        n = len(sub[item.name]) if isinstance(item, PSeq) else 1
        out.append((pos, pos + n))
        pos += n
    return out


# --- derivations -------------------------------------------------------------

def _freeze_sub(sub: Optional[dict]):
    if sub is None:
        return None
    return tuple(sorted(sub.items()))


@dataclass(frozen=True)
class Derivation:
    """A derivation tree node.

    ``kind`` is ``"theory"`` for a theory leaf, ``"axiom"`` for a zero-premise
    rule instance and ``"rule"`` otherwise.  ``subst`` is a sorted tuple of
    ``(metavariable, value)`` pairs, or None when it must be recovered by
    matching.
    """

    sequent: Sequent
    kind: str
    rule: Optional[str] = None
    subst: Optional[tuple] = None
    children: tuple = ()
    variant: Optional[int] = None

    @property
    def sub(self) -> Optional[dict]:
        return None if self.subst is None else dict(self.subst)

    def nodes(self):
        stack = [self]
        while stack:
            d = stack.pop()
            yield d
            stack.extend(reversed(d.children))

    def walk(self, path=()):
        yield path, self
        for i, c in enumerate(self.children):
            yield from c.walk(path + (i,))

    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())

    def height(self) -> int:
        return 1 + max((c.height() for c in self.children), default=0)

    def theory_leaves(self) -> list:
        return [d.sequent for d in self.nodes() if d.kind == "theory"]


def theory_leaf(s: Sequent) -> Derivation:
    return Derivation(s, "theory")


def rule_node(r: RuleSchema, sub: dict, children: Sequence[Derivation] = ()) -> Derivation:
    """Build a node by instantiating ``r``; premises are not re-checked here."""
    concl = instantiate(r.conclusion, sub)
    kind = "axiom" if r.arity == 0 else "rule"
    return Derivation(concl, kind, r.name, _freeze_sub(sub), tuple(children), r.variant)


def schema(name: str, variant: int = 0) -> RuleSchema:
    for r in BUILTIN_RULES:
        if r.name == name and r.variant == variant:
            return r
    raise KeyError(name)


@dataclass
class CheckReport:
    valid: bool
    standard: bool
    analytic: bool
    violations: list = field(default_factory=list)

    def render(self) -> str:
        lines = [f"valid: {self.valid}", f"standard: {self.standard}", f"analytic: {self.analytic}"]
        for path, reason in self.violations:
            lines.append(f"violation {'.'.join(map(str, path)) or 'root'}: {reason}")
        return "\n".join(lines)


def _node_justified(c: Calculus, t: Theory, d: Derivation) -> Optional[str]:
    if d.kind == "theory":
        if d.children:
            return "theory leaf with children"
        return None if d.sequent in t else f"{d.sequent} is not in the theory"
    cands = c.schemas(d.rule) if d.rule else []
    if not cands:
        return f"unknown rule {d.rule!r}"
    if d.variant is not None:
        cands = [r for r in cands if r.variant == d.variant] or cands
    prem = tuple(ch.sequent for ch in d.children)
    for r in cands:
        if r.arity != len(prem):
            continue
        if d.kind == "axiom" and r.arity:
            continue
        if d.subst is not None:
            sub = d.sub
            try:
                if instantiate(r.conclusion, sub) == d.sequent and all(
                        instantiate(p, sub) == s for p, s in zip(r.premises, prem)):
                    if _respects_kinds(r, sub):
                        return None
            except (KeyError, TypeError):
                pass
        if match_instance(r, prem, d.sequent) is not None:
            return None
    return f"not an instance of {d.rule}"


def _respects_kinds(r: RuleSchema, sub: dict) -> bool:
    kinds = {}
    for pat in r.premises + (r.conclusion,):
        for item in pat.items():
            _collect_kinds(item, kinds)
    for name, kind in kinds.items():
        if name not in sub:
            return False
        v = sub[name]
        if kind is PSeq and not (isinstance(v, tuple) and all(isinstance(f, Formula) for f in v)):
            return False
        if kind is PProp and not isinstance(v, Var):
            return False
        if kind is PForm and not isinstance(v, Formula):
            return False
        if kind is PSucc and not (v is None or isinstance(v, Formula)):
            return False
    return True


def _collect_kinds(p, kinds):
    if isinstance(p, PApp):
        _collect_kinds(p.left, kinds)
        _collect_kinds(p.right, kinds)
    elif isinstance(p, (PSeq, PForm, PProp, PSucc)):
        kinds[p.name] = type(p)


def check_deduction(c: Calculus, t: Iterable[Sequent], d: Derivation,
                    phi: Optional[Iterable[Formula]] = None) -> CheckReport:
    """Check every node; report validity, standardness and analyticity."""
    t = Theory(t)
    if phi is None:
        phi = sx.subformula_closure(list(t) + [d.sequent])
    phi = frozenset(phi)
    violations = []
    standard = True
    analytic = True
    for path, node in d.walk():
        why = _node_justified(c, t, node)
        if why:
            violations.append((path, why))
        for f in node.sequent.formulas():
            if not c.fragment.admits(f):
                violations.append((path, f"formula {f} outside the fragment"))
                break
        if node.rule == "cut" and node.kind == "rule":
            if not node.children or node.children[0].kind != "theory":
                standard = False
        if analytic and any(f not in phi for f in node.sequent.formulas()):
            analytic = False
    valid = not violations
    return CheckReport(valid, standard and valid, analytic, violations)


def is_regular_sequent(s: Sequent) -> bool:
    return s.succedent is not None and all(isinstance(f, Var) for f in s.antecedent)


def is_regular(t: Iterable[Sequent]) -> bool:
    return all(is_regular_sequent(s) for s in t)


def non_standard_cuts(d: Derivation) -> int:
    return sum(1 for n in d.nodes() if n.rule == "cut" and n.kind == "rule" and n.children[0].kind != "theory")


def cut_measures(d: Derivation) -> list:
    """Sorted (grade, cut-height) pairs of the non-standard cuts in ``d``."""
    out = []
    for n in d.nodes():
        if n.rule == "cut" and n.kind == "rule" and n.children[0].kind != "theory":
            grade = sx.size(n.children[0].sequent.succedent)
            height = n.children[0].node_count() + n.children[1].node_count()
            out.append((grade, height))
    return sorted(out)


# --- derivation text format --------------------------------------------------

def render_derivation(d: Derivation, indent: int = 0) -> str:
    pad = "  " * indent
    if d.kind == "theory":
        return f'{pad}(theory "{d.sequent.render()}")'
    head = f'{pad}(node "{d.sequent.render()}" {d.rule}'
    if not d.children:
        return head + ")"
    kids = "\n".join(render_derivation(ch, indent + 1) for ch in d.children)
    return f"{head}\n{kids})"


_SEXP_RE = re.compile(r'\s*(?:(\()|(\))|"([^"]*)"|([^\s()"]+))')


def _sexp_tokens(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _SEXP_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"bad derivation syntax near {text[pos:pos + 15]!r}")
        lp, rp, string, atom = m.groups()
        if lp:
            out.append(("(", None))
        elif rp:
            out.append((")", None))
        elif string is not None:
            out.append(("str", string))
        else:
            out.append(("atom", atom))
        pos = m.end()
    return out


def parse_derivation(text: str) -> Derivation:
    toks = _sexp_tokens("\n".join(line.split(";;", 1)[0] for line in text.split("\n")))
    i = 0

    def expect(kind):
        nonlocal i
        if i >= len(toks) or toks[i][0] != kind:
            raise ParseError(f"expected {kind!r} in derivation")
        i += 1
        return toks[i - 1][1]

    def node():
        nonlocal i
        expect("(")
        head = expect("atom")
        seq = sx.parse_sequent(expect("str"))
        if head == "theory":
            expect(")")
            return theory_leaf(seq)
        if head != "node":
            raise ParseError(f"unknown derivation head {head!r}")
        rule = expect("atom")
        kids = []
        while i < len(toks) and toks[i][0] == "(":
            kids.append(node())
        expect(")")
        return Derivation(seq, "rule" if kids else "axiom", rule, None, tuple(kids))

    d = node()
    if i != len(toks):
        raise ParseError("trailing input after derivation")
    return d
