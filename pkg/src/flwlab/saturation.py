"""Forward saturation deciding T |- s for regular theories.

D_0 holds the minimal theory sequents and axiom instances over phi;
D_{i+1} adds every phi-sequent obtained by one rule instance whose premises
weaken frontier elements, that fits the length bound and is not already
subsumed.  Sequents are handled internally as ``(antecedent ids, succedent
id)`` with -1 for an empty succedent.
"""
from __future__ import annotations

import configparser
import functools
import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from .calculus import (
    PApp, PConst, PForm, PProp, PSeq, PSucc, Calculus, Derivation, check_deduction,
    instantiate, is_regular, match_sequent, rule_node, theory_leaf,
)
from .cutelim import normalize_to_standard, weaken_to
from .errors import BudgetExceeded, InternalInvariantViolated, InvalidInput, MissingConnective, NotRegular
from .syntax import Bin, Const, Sequent, Theory, Var, formula_key, sequent_key, size_max, size_sum, subformula_closure
from .wqo import Antichain, ControlledTrace, control_check, minimal_common_supersequences, subword_embed

log = logging.getLogger(__name__)

EMPTY = -1
_UNBOUND = None


# --- configuration -----------------------------------------------------------

@dataclass
class SaturationConfig:
    engine: str = "anchored"
    literal_bound: int = 4
    time_budget_s: float = 60.0
    frontier_budget: int = 10 ** 6
    record_provenance: bool = True
    emit_proof: bool = True
    stop_on_goal: bool = True

    def __post_init__(self):
        if self.engine not in ("anchored", "literal"):
            raise InvalidInput(f"unknown engine {self.engine!r}")


def load_config(text: str, base: Optional[SaturationConfig] = None) -> SaturationConfig:
    """Read ``key = value`` lines (``#`` comments) on top of ``base``."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string("[flwlab]\n" + text)
    except configparser.Error as exc:
        raise InvalidInput(f"bad config: {exc}") from None
    cfg = SaturationConfig(**vars(base)) if base else SaturationConfig()
    sec = cp["flwlab"]
    known = set(vars(cfg))
    for key in sec:
        if key not in known:
            raise InvalidInput(f"unknown config key {key!r}")
    try:
        if "engine" in sec:
            cfg.engine = sec["engine"].strip()
        if "literal_bound" in sec:
            cfg.literal_bound = sec.getint("literal_bound")
        if "time_budget_s" in sec:
            cfg.time_budget_s = sec.getfloat("time_budget_s")
        if "frontier_budget" in sec:
            cfg.frontier_budget = sec.getint("frontier_budget")
        if "record_provenance" in sec:
            cfg.record_provenance = sec.getboolean("record_provenance")
        if "emit_proof" in sec:
            cfg.emit_proof = sec.getboolean("emit_proof")
        if "stop_on_goal" in sec:
            cfg.stop_on_goal = sec.getboolean("stop_on_goal")
    except ValueError as exc:
        raise InvalidInput(f"bad config value: {exc}") from None
    cfg.__post_init__()
    return cfg


# --- phi as integers ---------------------------------------------------------

class PhiTable:
    """Integer ids for the formulas of phi, ordered by ``formula_key``."""

    def __init__(self, phi: Iterable):
        self.formulas = sorted(set(phi), key=formula_key)
        self.index = {f: i for i, f in enumerate(self.formulas)}
        self.app = {}
        self.const = {}
        self.var_ids = []
        self.shape = []
        for i, f in enumerate(self.formulas):
            if isinstance(f, Bin):
                l, r = self.index.get(f.left), self.index.get(f.right)
                self.shape.append((f.op, l, r))
                if l is not None and r is not None:
                    self.app[(f.op, l, r)] = i
            elif isinstance(f, Const):
                self.shape.append(("const", f.name, None))
                self.const[f.name] = i
            else:
                self.shape.append(("var", None, None))
                self.var_ids.append(i)
        self.all_ids = list(range(len(self.formulas)))

    def __len__(self):
        return len(self.formulas)

    def encode(self, s: Sequent):
        try:
            ant = tuple(self.index[f] for f in s.antecedent)
            succ = EMPTY if s.succedent is None else self.index[s.succedent]
        except KeyError:
            return None
        return ant, succ

    def decode(self, s) -> Sequent:
        ant, succ = s
        return Sequent(tuple(self.formulas[i] for i in ant), None if succ == EMPTY else self.formulas[succ])

    def value(self, v):
        """Decode a substitution value (id, id tuple or EMPTY)."""
        if isinstance(v, tuple):
            return tuple(self.formulas[i] for i in v)
        return None if v == EMPTY else self.formulas[v]


def _fmatch(tab: PhiTable, pat, fid: int, sub: dict) -> Optional[dict]:
    if isinstance(pat, (PForm, PProp)):
        if isinstance(pat, PProp) and tab.shape[fid][0] != "var":
            return None
        cur = sub.get(pat.name, _UNBOUND)
        if cur is _UNBOUND:
            out = dict(sub)
            out[pat.name] = fid
            return out
        return sub if cur == fid else None
    if isinstance(pat, PConst):
        return sub if tab.const.get(pat.name) == fid else None
    if isinstance(pat, PApp):
        op, l, r = tab.shape[fid]
        if op != pat.op or l is None or r is None:
            return None
        s1 = _fmatch(tab, pat.left, l, sub)
        return None if s1 is None else _fmatch(tab, pat.right, r, s1)
    raise TypeError(pat)


def _finst(tab: PhiTable, pat, sub: dict) -> Optional[int]:
    if isinstance(pat, (PForm, PProp)):
        return sub.get(pat.name)
    if isinstance(pat, PConst):
        return tab.const.get(pat.name)
    l = _finst(tab, pat.left, sub)
    r = _finst(tab, pat.right, sub)
    if l is None or r is None:
        return None
    return tab.app.get((pat.op, l, r))


def _pvars(pat, out: dict):
    """Collect non-sequence metavariables with their kinds."""
    if isinstance(pat, PApp):
        _pvars(pat.left, out)
        _pvars(pat.right, out)
    elif isinstance(pat, (PForm, PProp, PSucc)):
        out.setdefault(pat.name, type(pat))


def _seq_inst(tab: PhiTable, pat, sub: dict):
    """Instantiate a sequent pattern over ids, or None if it leaves phi."""
    ant = []
    for item in pat.antecedent:
        if isinstance(item, PSeq):
            ant.extend(sub[item.name])
        else:
            v = _finst(tab, item, sub)
            if v is None:
                return None
            ant.append(v)
    if pat.succedent is None:
        succ = EMPTY
    elif isinstance(pat.succedent, PSucc):
        succ = sub[pat.succedent.name]
    else:
        succ = _finst(tab, pat.succedent, sub)
        if succ is None:
            return None
    return tuple(ant), succ


def _feasible(tab: PhiTable, pats, sub: dict) -> bool:
    """False if some fully bound compound item falls outside phi."""
    for pat in pats:
        for item in pat.items():
            if isinstance(item, PApp):
                names = {}
                _pvars(item, names)
                if all(n in sub for n in names) and _finst(tab, item, sub) is None:
                    return False
    return True


def _enumerate_unbound(tab: PhiTable, kinds: dict, sub: dict):
    free = sorted(n for n in kinds if n not in sub)
    if not free:
        yield sub
        return
    domains = []
    for n in free:
        k = kinds[n]
        if k is PProp:
            domains.append(tab.var_ids)
        elif k is PSucc:
            domains.append([EMPTY] + tab.all_ids)
        else:
            domains.append(tab.all_ids)
    for combo in itertools.product(*domains):
        out = dict(sub)
        out.update(zip(free, combo))
        yield out


# --- provenance and state ----------------------------------------------------

@dataclass(frozen=True)
class D0Theory:
    pass


@dataclass(frozen=True)
class D0Axiom:
    rule: str
    variant: int
    subst: tuple


@dataclass(frozen=True)
class Step:
    rule: str
    variant: int
    subst: tuple
    premises: tuple  # (stored sequent, premise instance) pairs


@dataclass
class SaturationState:
    calculus: Calculus
    theory: Theory
    goals: tuple
    phi: frozenset
    table: PhiTable
    config: SaturationConfig
    stored: dict = field(default_factory=dict)  # int sequent -> admission iteration
    provenance: dict = field(default_factory=dict)
    frontier: list = field(default_factory=list)  # minimal elements, int form
    iteration: int = 0
    stabilized: bool = False
    trace: Optional[ControlledTrace] = None
    frontier_sizes: list = field(default_factory=list)
    admitted_per_round: list = field(default_factory=list)
    max_norms: list = field(default_factory=list)
    timings: list = field(default_factory=list)
    bound_hit: bool = False
    last_bound: int = 0

    @property
    def size_r(self) -> int:
        return self.calculus.size()

    def sequents(self) -> List[Sequent]:
        return sorted((self.table.decode(s) for s in self.stored), key=sequent_key)

    def minimal(self) -> List[Sequent]:
        return sorted((self.table.decode(s) for s in self.frontier), key=sequent_key)

    def level(self, i: int) -> List[Sequent]:
        """D_i as a sorted list."""
        return sorted((self.table.decode(s) for s, j in self.stored.items() if j <= i), key=sequent_key)

    def admitted_at(self, s: Sequent) -> Optional[int]:
        enc = self.table.encode(s)
        return None if enc is None else self.stored.get(enc)

    def subsumer(self, goal: Sequent) -> Optional[Sequent]:
        enc = self.table.encode(goal)
        if enc is None:
            return None
        for m in sorted(self.frontier, key=lambda x: (len(x[0]), x)):
            if m[1] == enc[1] and subword_embed(m[0], enc[0]):
                return self.table.decode(m)
        return None


@dataclass
class Verdict:
    answer: bool
    witness: Optional[Sequent] = None
    goal: Optional[Sequent] = None
    derivation: Optional[Derivation] = None
    iterations: int = 0
    stats: dict = field(default_factory=dict)
    state: Optional[SaturationState] = None

    @property
    def text(self) -> str:
        return "yes" if self.answer else "no"


# --- D_0 -----------------------------------------------------------------------

def _check_inputs(c: Calculus, t: Theory, goals: Sequence[Sequent]):
    if not is_regular(t):
        raise NotRegular("theory is not regular")
    for s in list(t) + list(goals):
        if not c.fragment.admits(s):
            raise MissingConnective(f"{s} uses connectives outside the fragment")


def _axiom_instances(tab: PhiTable, r):
    kinds = {}
    for item in r.conclusion.items():
        _pvars(item, kinds)
    base = {item.name: () for item in r.conclusion.antecedent if isinstance(item, PSeq)}
    for sub in _enumerate_unbound(tab, kinds, base):
        s = _seq_inst(tab, r.conclusion, sub)
        if s is not None:
            yield s, sub


def build_D0(c: Calculus, t: Iterable[Sequent], phi: Iterable) -> Antichain:
    """Minimal elements of ``t`` plus the axiom instances over ``phi``."""
    t = Theory(t)
    if not is_regular(t):
        raise NotRegular("theory is not regular")
    tab = PhiTable(phi)
    cands, _ = _d0_internal(c, t, tab)
    return Antichain(items=sorted((tab.decode(s) for s in cands), key=sequent_key))


def _d0_internal(c: Calculus, t: Theory, tab: PhiTable):
    prov = {}
    for s in t.sorted():
        enc = tab.encode(s)
        if enc is None:
            raise InvalidInput(f"theory sequent {s} is not a phi-sequent")
        prov.setdefault(enc, D0Theory())
    for r in c.rules:
        if r.arity:
            continue
        for s, sub in _axiom_instances(tab, r):
            prov.setdefault(s, D0Axiom(r.name, r.variant, tuple(sorted(sub.items()))))
    mins = _minimal(prov)
    return mins, {s: prov[s] for s in mins}


def _leq(a, b) -> bool:
    return a[1] == b[1] and subword_embed(a[0], b[0])


def _mask(ant) -> int:
    m = 0
    for x in ant:
        m |= 1 << x
    return m


class _MaskBucket:
    """Antecedents with one succedent, grouped by letter mask."""

    def __init__(self):
        self.by_mask: Dict[int, list] = {}

    def add(self, mask: int, ant):
        self.by_mask.setdefault(mask, []).append(ant)

    def below(self, mask: int, ant) -> bool:
        """Is some stored antecedent a subword of ``ant``?"""
        if 1 << bin(mask).count("1") <= 4 * len(self.by_mask):
            sub = mask
            while True:
                for a in self.by_mask.get(sub, ()):
                    if len(a) <= len(ant) and subword_embed(a, ant):
                        return True
                if sub == 0:
                    return False
                sub = (sub - 1) & mask
        for m, group in self.by_mask.items():
            if m & ~mask == 0:
                for a in group:
                    if len(a) <= len(ant) and subword_embed(a, ant):
                        return True
        return False


def _minimal(seqs, budget=None) -> list:
    out, buckets = [], {}
    for s in sorted(seqs, key=lambda x: (len(x[0]), x)):
        if budget is not None:
            budget.tick(None)
        mask = _mask(s[0])
        bucket = buckets.get(s[1])
        if bucket is None:
            bucket = buckets[s[1]] = _MaskBucket()
        elif bucket.below(mask, s[0]):
            continue
        bucket.add(mask, s[0])
        out.append(s)
    return out


def _update_frontier(frontier, new, budget=None) -> list:
    """Minimal elements of ``frontier`` plus ``new``; no new element is above an old one."""
    fresh = _minimal(new, budget)
    buckets = {}
    for s in fresh:
        buckets.setdefault(s[1], _MaskBucket()).add(_mask(s[0]), s[0])
    kept = []
    for f in frontier:
        if budget is not None:
            budget.tick(None)
        b = buckets.get(f[1])
        if b is None or not b.below(_mask(f[0]), f[0]):
            kept.append(f)
    return kept + fresh


class _Index:
    """Minimal elements of D_i bucketed by succedent, with letter-set masks."""

    def __init__(self):
        self.by_succ: Dict[int, list] = {}
        self.rejected = set()

    def add(self, s):
        mask = 0
        for x in s[0]:
            mask |= 1 << x
        self.by_succ.setdefault(s[1], []).append((mask, s[0]))

    def covers(self, s) -> bool:
        ant = s[0]
        n = len(ant)
        mask = 0
        for x in ant:
            mask |= 1 << x
        for m, a in self.by_succ.get(s[1], ()):
            if m & ~mask == 0 and len(a) <= n and subword_embed(a, ant):
                return True
        return False


# --- the pattern-anchored engine --------------------------------------------

class _Rule:
    """Precomputed data for one schema."""

    def __init__(self, r):
        self.r = r
        self.kinds = {}
        for pat in r.premises + (r.conclusion,):
            for item in pat.items():
                _pvars(item, self.kinds)
        self.key_names = tuple(sorted(self.kinds))
        self.premise_seqvars = set()
        for pat in r.premises:
            for item in pat.antecedent:
                if isinstance(item, PSeq):
                    self.premise_seqvars.add(item.name)
        self.concl_only_seqvars = [item.name for item in r.conclusion.antecedent
                                   if isinstance(item, PSeq) and item.name not in self.premise_seqvars]
        self._useless = {}

    def useless(self, j: int, pending: tuple) -> bool:
        """Premise ``j`` minus its weakened-in items already embeds in the conclusion."""
        key = (j, pending)
        if key not in self._useless:
            prem = self.r.premises[j]
            concl = self.r.conclusion
            kept = [it for i, it in enumerate(prem.antecedent) if i not in pending]
            self._useless[key] = prem.succedent == concl.succedent and subword_embed(kept, concl.antecedent)
        return self._useless[key]


def _weak_matches(tab, rule: _Rule, j: int, elem):
    """Ways premise ``j`` of ``rule`` can weaken to ``elem``.

    Yields ``(sub, pieces, pending)``: formula bindings, the segment of
    ``elem`` taken by each sequence item, and indices of items weakened in.
    """
    pat = rule.r.premises[j]
    ant, succ = elem
    sp = pat.succedent
    if sp is None:
        if succ != EMPTY:
            return []
        sub0 = {}
    elif isinstance(sp, PSucc):
        sub0 = {sp.name: succ}
    else:
        if succ == EMPTY:
            return []
        sub0 = _fmatch(tab, sp, succ, {})
        if sub0 is None:
            return []
    items = pat.antecedent
    n = len(ant)
    out = []

    def go(k, pos, sub, pieces, pending):
        if k == len(items):
            if pos == n and not rule.useless(j, pending):
                out.append((sub, pieces, pending))
            return
        item = items[k]
        if isinstance(item, PSeq):
            for end in range(pos, n + 1):
                go(k + 1, end, sub, pieces + ((item.name, ant[pos:end]),), pending)
            return
        if pos < n:
            s1 = _fmatch(tab, item, ant[pos], sub)
            if s1 is not None:
                go(k + 1, pos + 1, s1, pieces, pending)
        go(k + 1, pos, sub, pieces, pending + (k,))

    go(0, 0, sub0, (), ())
    return out


def _merge(a: dict, b: dict) -> Optional[dict]:
    out = dict(a)
    for k, v in b.items():
        cur = out.get(k, _UNBOUND)
        if cur is _UNBOUND:
            out[k] = v
        elif cur != v:
            return None
    return out


class _Budget:
    def __init__(self, cfg: SaturationConfig):
        self.deadline = time.monotonic() + cfg.time_budget_s
        self.cfg = cfg
        self.ticks = 0
        self.state = None

    def tick(self, state):
        self.ticks += 1
        if self.ticks & 63 == 0:
            self.check(state)

    def check(self, state):
        state = state or self.state
        if time.monotonic() > self.deadline:
            raise BudgetExceeded(f"time budget of {self.cfg.time_budget_s}s exceeded", state)


def _anchored_round(state: SaturationState, bound: int, index: _Index, budget: _Budget) -> dict:
    """One round of instance generation.

    Only instances using at least one element admitted in the previous
    round are generated: all other instances were already tried and their
    conclusions admitted or subsumed.  The exception is a conclusion that
    failed only the length bound, so a round after such a failure is full
    whenever the bound has grown.
    """
    tab = state.table
    frontier = sorted(state.frontier, key=lambda x: (len(x[0]), x))
    full = state.iteration == 0 or (state.bound_hit and bound != state.last_bound)
    fresh = set(frontier) if full else {e for e in frontier if state.stored[e] == state.iteration}
    state.bound_hit = False
    state.last_bound = bound
    found = {}
    for r in state.calculus.rules:
        if not r.arity:
            continue
        rule = _Rule(r)
        old_groups, new_groups, all_groups = [], [], []
        for j in range(r.arity):
            g_old, g_new, g_all = {}, {}, {}
            for e in frontier:
                budget.tick(state)
                target = g_new if e in fresh else g_old
                for sub, pieces, pending in _weak_matches(tab, rule, j, e):
                    key = tuple(sub.get(n, _UNBOUND) for n in rule.key_names)
                    target.setdefault(key, []).append((e, sub, pieces, pending))
                    g_all.setdefault(key, []).append((e, sub, pieces, pending))
            old_groups.append(g_old)
            new_groups.append(g_new)
            all_groups.append(g_all)
        for p in range(r.arity):
            groups = old_groups[:p] + [new_groups[p]] + all_groups[p + 1:]
            if any(not g for g in groups):
                continue
            _join(state, rule, groups, 0, {}, [], bound, index, budget, found)
    return found


def _join(state, rule, groups, j, sub, chosen_groups, bound, index, budget, found):
    tab = state.table
    if j == len(groups):
        for combo in itertools.product(*chosen_groups):
            budget.tick(state)
            _complete(state, rule, sub, combo, bound, index, found, budget)
        return
    for key, members in groups[j].items():
        merged = dict(sub)
        ok = True
        for n, v in zip(rule.key_names, key):
            if v is _UNBOUND:
                continue
            cur = merged.get(n, _UNBOUND)
            if cur is _UNBOUND:
                merged[n] = v
            elif cur != v:
                ok = False
                break
        if not ok or not _feasible(tab, rule.r.premises + (rule.r.conclusion,), merged):
            continue
        _join(state, rule, groups, j + 1, merged, chosen_groups + [members], bound, index, budget, found)


@functools.lru_cache(maxsize=1 << 16)
def _mcs(words: tuple) -> list:
    if len(set(words)) == 1:
        return [words[0]]
    return minimal_common_supersequences(words)


def _complete(state, rule: _Rule, sub, combo, bound, index, found, budget=None):
    tab = state.table
    pieces: Dict[str, list] = {}
    for _, _, ps, _ in combo:
        for name, seg in ps:
            pieces.setdefault(name, []).append(seg)
    names = sorted(pieces)
    options = [_mcs(tuple(pieces[n])) for n in names]
    for sub2 in _enumerate_unbound(tab, rule.kinds, sub):
        for choice in itertools.product(*options):
            if budget is not None:
                budget.tick(state)
            full = dict(sub2)
            full.update(zip(names, choice))
            for n in rule.concl_only_seqvars:
                full[n] = ()
            concl = _seq_inst(tab, rule.r.conclusion, full)
            if concl is None:
                continue
            if len(concl[0]) > bound:
                state.bound_hit = True
                continue
            if concl in state.stored or concl in found or concl in index.rejected:
                continue
            if index.covers(concl):
                index.rejected.add(concl)
                continue
            prems = []
            for pat, (e, _, _, _) in zip(rule.r.premises, combo):
                p = _seq_inst(tab, pat, full)
                if p is None or not _leq(e, p):
                    break
                prems.append((e, p))
            else:
                found[concl] = Step(rule.r.name, rule.r.variant, tuple(sorted(full.items())), tuple(prems))


# --- the literal engine ------------------------------------------------------

def _all_sequents(tab: PhiTable, max_len: int):
    for n in range(max_len + 1):
        for ant in itertools.product(tab.all_ids, repeat=n):
            for succ in [EMPTY] + tab.all_ids:
                yield ant, succ


def _match_ids(tab, pat, s, sub):
    """Exact matches of an id-sequent against a pattern."""
    ant, succ = s
    sp = pat.succedent
    if sp is None:
        if succ != EMPTY:
            return
    elif isinstance(sp, PSucc):
        cur = sub.get(sp.name, _UNBOUND)
        if cur is _UNBOUND:
            sub = dict(sub)
            sub[sp.name] = succ
        elif cur != succ:
            return
    else:
        if succ == EMPTY:
            return
        sub = _fmatch(tab, sp, succ, sub)
        if sub is None:
            return
    items = pat.antecedent

    def go(k, pos, sub):
        if k == len(items):
            if pos == len(ant):
                yield sub
            return
        item = items[k]
        if isinstance(item, PSeq):
            cur = sub.get(item.name, _UNBOUND)
            if cur is not _UNBOUND:
                if ant[pos:pos + len(cur)] == cur:
                    yield from go(k + 1, pos + len(cur), sub)
                return
            for end in range(pos, len(ant) + 1):
                s1 = dict(sub)
                s1[item.name] = ant[pos:end]
                yield from go(k + 1, end, s1)
            return
        if pos < len(ant):
            s1 = _fmatch(tab, item, ant[pos], sub)
            if s1 is not None:
                yield from go(k + 1, pos + 1, s1)

    yield from go(0, 0, sub)


def _literal_round(state: SaturationState, bound: int, index: _Index, budget: _Budget) -> dict:
    tab = state.table
    lb = min(bound, state.config.literal_bound)
    mins = sorted(state.frontier, key=lambda x: (len(x[0]), x))
    rules = [_Rule(r) for r in state.calculus.rules if r.arity]
    found = {}
    for s in _all_sequents(tab, lb):
        budget.tick(state)
        if s in state.stored or index.covers(s):
            continue
        step = _literal_justify(tab, rules, s, mins, lb)
        if step is not None:
            found[s] = step
    return found


def _literal_justify(tab, rules, s, mins, lb):
    for rule in rules:
        r = rule.r
        for sub in _match_ids(tab, r.conclusion, s, {}):
            kinds = {n: k for n, k in rule.kinds.items()}
            seqfree = sorted(rule.premise_seqvars - set(sub))
            for sub2 in _enumerate_unbound(tab, kinds, sub):
                for fill in _seq_fills(tab, seqfree, lb):
                    full = dict(sub2)
                    full.update(fill)
                    prems = []
                    for pat in r.premises:
                        p = _seq_inst(tab, pat, full)
                        if p is None or len(p[0]) > lb:
                            break
                        e = next((m for m in mins if _leq(m, p)), None)
                        if e is None:
                            break
                        prems.append((e, p))
                    else:
                        return Step(r.name, r.variant, tuple(sorted(full.items())), tuple(prems))
    return None


def _seq_fills(tab, names, lb):
    if not names:
        yield {}
        return
    words = [w for n in range(lb + 1) for w in itertools.product(tab.all_ids, repeat=n)]
    for combo in itertools.product(words, repeat=len(names)):
        yield dict(zip(names, combo))


# --- saturation --------------------------------------------------------------

def condition2_bound(size_r: int, max_norm: int) -> int:
    return size_r * max_norm * size_r


def _max_norm(stored) -> int:
    return max((len(s[0]) for s in stored), default=0)


def _pick(seqs):
    """The trace element of a round: largest norm, ties broken canonically."""
    return max(seqs, key=lambda s: (len(s[0]), tuple(-x for x in s[0]), -s[1]))


def init_state(c: Calculus, t: Iterable[Sequent], goals, config: Optional[SaturationConfig] = None) -> SaturationState:
    config = config or SaturationConfig()
    t = Theory(t)
    goals = (goals,) if isinstance(goals, Sequent) else tuple(goals)
    _check_inputs(c, t, goals)
    phi = subformula_closure(list(t) + list(goals))
    tab = PhiTable(phi)
    mins, prov = _d0_internal(c, t, tab)
    st = SaturationState(c, t, goals, phi, tab, config)
    for s in mins:
        st.stored[s] = 0
        if config.record_provenance:
            st.provenance[s] = prov[s]
    st.frontier = list(mins)
    sum_t = size_sum(t)
    first = _pick(mins) if mins else ((), EMPTY)
    st.trace = ControlledTrace([len(first[0])] if mins else [], lambda x, k=c.size(): k * k * x,
                               (sum_t + 1) * c.size(), [first] if mins else [])
    st.frontier_sizes.append(len(st.frontier))
    st.admitted_per_round.append(len(mins))
    st.max_norms.append(_max_norm(mins))
    return st


def expand(state: SaturationState, budget: Optional[_Budget] = None) -> dict:
    """The new members of the next level with their provenance."""
    budget = budget or _Budget(state.config)
    bound = condition2_bound(state.size_r, _max_norm(state.stored))
    index = _Index()
    for s in state.frontier:
        index.add(s)
    if state.config.engine == "literal":
        return _literal_round(state, bound, index, budget)
    return _anchored_round(state, bound, index, budget)


def saturate(c: Calculus, t: Iterable[Sequent], goal, config: Optional[SaturationConfig] = None,
             stop_on_goal: bool = False) -> SaturationState:
    """Iterate to the fixpoint, or until a goal is subsumed if ``stop_on_goal``."""
    state = init_state(c, t, goal, config)
    budget = _Budget(state.config)
    budget.state = state
    tensor_only = c.is_builtin and c.fragment <= {"*"}
    while True:
        if stop_on_goal and any(state.subsumer(g) is not None for g in state.goals):
            break
        t0 = time.monotonic()
        new = expand(state, budget)
        state.timings.append(time.monotonic() - t0)
        if not new:
            state.stabilized = True
            break
        state.iteration += 1
        for s in sorted(new, key=lambda x: (len(x[0]), x)):
            state.stored[s] = state.iteration
            if state.config.record_provenance:
                state.provenance[s] = new[s]
        if tensor_only and any(s[1] == EMPTY for s in new):
            raise InternalInvariantViolated("empty succedent admitted in the fusion fragment")
        state.frontier = _update_frontier(state.frontier, list(new), budget)
        pick = _pick(list(new))
        state.trace.norms.append(len(pick[0]))
        state.trace.elements.append(pick)
        state.frontier_sizes.append(len(state.frontier))
        state.admitted_per_round.append(len(new))
        state.max_norms.append(_max_norm(state.stored))
        log.debug("round %d: %d admitted, %d minimal", state.iteration, len(new), len(state.frontier))
        if len(state.stored) > state.config.frontier_budget:
            raise BudgetExceeded(f"frontier budget of {state.config.frontier_budget} exceeded", state)
        budget.check(state)
    return state


def decide(c: Calculus, t: Iterable[Sequent], goal, config: Optional[SaturationConfig] = None) -> Verdict:
    """Answer T |- goal (or any member of a goal set)."""
    cfg = config or SaturationConfig()
    state = saturate(c, t, goal, cfg, stop_on_goal=cfg.stop_on_goal)
    stats = {"frontier_sizes": list(state.frontier_sizes), "admitted": list(state.admitted_per_round),
             "max_norms": list(state.max_norms), "timings": list(state.timings),
             "stored": len(state.stored), "phi": len(state.phi), "stabilized": state.stabilized}
    for g in sorted(state.goals, key=sequent_key):
        w = state.subsumer(g)
        if w is None:
            continue
        deriv = None
        if cfg.emit_proof and cfg.record_provenance:
            deriv = reconstruct_deduction(state, w, g)
            rep = check_deduction(c, state.theory, deriv)
            if not rep.valid or (c.is_builtin and not rep.standard):
                raise InternalInvariantViolated("reconstructed deduction failed the checker:\n" + rep.render())
        return Verdict(True, w, g, deriv, state.iteration, stats, state)
    return Verdict(False, None, None, None, state.iteration, stats, state)


# --- reconstruction ----------------------------------------------------------

def _decode_sub(tab: PhiTable, subst: tuple) -> dict:
    return {k: tab.value(v) for k, v in subst}


def _schema(c: Calculus, name: str, variant: int):
    for r in c.rules:
        if r.name == name and r.variant == variant:
            return r
    raise InternalInvariantViolated(f"provenance names unknown rule {name}")


def derivation_of(state: SaturationState, s) -> Derivation:
    """Derivation of a stored sequent (int form) from provenance."""
    if not state.provenance:
        raise InvalidInput("provenance was not recorded")
    tab = state.table
    memo = {}

    def build(x):
        if x in memo:
            return memo[x]
        p = state.provenance[x]
        if isinstance(p, D0Theory):
            d = theory_leaf(tab.decode(x))
        elif isinstance(p, D0Axiom):
            d = rule_node(_schema(state.calculus, p.rule, p.variant), _decode_sub(tab, p.subst))
        else:
            kids = [weaken_to(build(e), tab.decode(inst).antecedent) for e, inst in p.premises]
            d = rule_node(_schema(state.calculus, p.rule, p.variant), _decode_sub(tab, p.subst), kids)
        if d.sequent != tab.decode(x):
            raise InternalInvariantViolated(f"provenance rebuilds {d.sequent}, not {tab.decode(x)}")
        memo[x] = d
        return d

    return build(s)


def reconstruct_deduction(state: SaturationState, witness: Sequent, goal: Sequent) -> Derivation:
    enc = state.table.encode(witness)
    if enc is None or enc not in state.stored:
        raise InvalidInput(f"{witness} is not stored")
    d = weaken_to(derivation_of(state, enc), goal.antecedent)
    if d.sequent != goal:
        raise InvalidInput(f"{witness} does not weaken to {goal}")
    if state.calculus.is_builtin:
        d = normalize_to_standard(state.calculus, state.theory, d)
    return d


# --- the bounded brute-force oracle -----------------------------------------

def bounded_closure_oracle(c: Calculus, t: Iterable[Sequent], phi: Iterable, cap: int,
                           time_budget_s: Optional[float] = None) -> frozenset:
    """Every sequent derivable using only antecedents of length at most ``cap``.

    Built by naive forward closure over Formula objects with the generic
    matcher, independently of the saturation engine.
    """
    phi = frozenset(phi)
    variables = sorted((f for f in phi if isinstance(f, Var)), key=formula_key)
    phis = sorted(phi, key=formula_key)
    deadline = None if time_budget_s is None else time.monotonic() + time_budget_s
    found = set()
    for s in Theory(t):
        if len(s.antecedent) <= cap and all(f in phi for f in s.formulas()):
            found.add(s)
    for r in c.rules:
        if r.arity:
            continue
        kinds = {}
        for item in r.conclusion.items():
            _pvars(item, kinds)
        base = {it.name: () for it in r.conclusion.antecedent if isinstance(it, PSeq)}
        for sub in _enum_formulas(kinds, base, phis, variables):
            s = instantiate(r.conclusion, sub)
            if len(s.antecedent) <= cap and all(f in phi for f in s.formulas()):
                found.add(s)
    by_succ: Dict[object, set] = {}
    by_ant: Dict[object, set] = {}

    def index(s):
        by_succ.setdefault(s.succedent, set()).add(s)
        for f in set(s.antecedent):
            by_ant.setdefault(f, set()).add(s)

    for s in found:
        index(s)
    delta = set(found)
    old: set = set()
    rules = [r for r in c.rules if r.arity]
    while delta:
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded("oracle time budget exceeded")
        everything = old | delta
        fresh = set()
        for r in rules:
            kinds = {}
            for pat in r.premises + (r.conclusion,):
                for item in pat.items():
                    _pvars(item, kinds)
            for p in range(r.arity):
                pools = [old] * p + [delta] + [everything] * (r.arity - p - 1)
                _oracle_combine(r, kinds, pools, 0, {}, by_succ, by_ant, phi, phis, variables, cap,
                                everything, fresh)
        fresh -= everything
        for s in fresh:
            index(s)
        old = everything
        delta = fresh
    return frozenset(old)


def _enum_formulas(kinds, sub, phis, variables):
    free = sorted(n for n in kinds if n not in sub)
    doms = []
    for n in free:
        k = kinds[n]
        doms.append(variables if k is PProp else ([None] + phis if k is PSucc else phis))
    for combo in itertools.product(*doms):
        out = dict(sub)
        out.update(zip(free, combo))
        yield out


def _bound_formula_items(pat, sub):
    out = []
    for item in pat.antecedent:
        if isinstance(item, (PForm, PProp)) and item.name in sub:
            out.append(sub[item.name])
    return out


def _oracle_combine(r, kinds, pools, j, sub, by_succ, by_ant, phi, phis, variables, cap, everything, fresh):
    if j == r.arity:
        seqnames = [it.name for it in r.conclusion.antecedent if isinstance(it, PSeq) and it.name not in sub]
        base = dict(sub)
        for n in seqnames:
            base[n] = ()
        for full in _enum_formulas(kinds, base, phis, variables):
            try:
                s = instantiate(r.conclusion, full)
            except KeyError:
                continue
            if len(s.antecedent) <= cap and s not in everything and all(f in phi for f in s.formulas()):
                fresh.add(s)
        return
    pat = r.premises[j]
    pool = pools[j]
    sp = pat.succedent
    succ_choices = [None]
    if isinstance(sp, PForm) and sp.name not in sub:
        succ_choices = [f for f in phis if f in by_succ]
    for choice in succ_choices:
        sub1 = sub
        if choice is not None:
            sub1 = dict(sub)
            sub1[sp.name] = choice
            if not _partial_ok(r, sub1, phi):
                continue
        cands = _oracle_candidates(pat, sub1, by_succ, by_ant)
        if cands is None:
            cands = pool
        for s in sorted(cands & pool if cands is not pool else pool, key=sequent_key):
            for sub2 in match_sequent(pat, s, sub1):
                _oracle_combine(r, kinds, pools, j + 1, sub2, by_succ, by_ant, phi, phis, variables, cap,
                                everything, fresh)


def _partial_ok(r, sub, phi) -> bool:
    from .calculus import instantiate_formula
    for pat in r.premises + (r.conclusion,):
        for item in pat.items():
            if isinstance(item, PApp):
                names = {}
                _pvars(item, names)
                if all(n in sub for n in names) and instantiate_formula(item, sub) not in phi:
                    return False
    return True


def _oracle_candidates(pat, sub, by_succ, by_ant):
    sp = pat.succedent
    if sp is not None and not isinstance(sp, PSucc):
        names = {}
        _pvars(sp, names)
        if all(n in sub for n in names):
            from .calculus import instantiate_formula
            return by_succ.get(instantiate_formula(sp, sub), set())
    if isinstance(sp, PSucc) and sp.name in sub:
        return by_succ.get(sub[sp.name], set())
    bound = _bound_formula_items(pat, sub)
    if bound:
        return by_ant.get(bound[0], set())
    return None


def oracle_decides(c: Calculus, t: Iterable[Sequent], goal: Sequent, cap: int) -> bool:
    phi = subformula_closure(list(Theory(t)) + [goal])
    closure = bounded_closure_oracle(c, t, phi, cap)
    return any(s.succedent == goal.succedent and subword_embed(s.antecedent, goal.antecedent) for s in closure)


# --- bounds ------------------------------------------------------------------

@dataclass
class BoundsReport:
    phi_size: int
    phi_bound: int
    norm_checks: int
    worst_ratio: float
    control_ok: bool
    size_r: int
    stabilized: bool = True

    def lines(self) -> list:
        return [f"phi_size: {self.phi_size}", f"phi_bound: {self.phi_bound}",
                f"norm_checks: {self.norm_checks}", f"worst_norm_ratio: {self.worst_ratio:.6g}",
                f"control_ok: {self.control_ok}", f"size_R: {self.size_r}",
                f"stabilized: {self.stabilized}"]


def bounds_report(state: SaturationState, t=None, goal=None) -> BoundsReport:
    """Check the phi, norm and control bounds; any failure is a bug."""
    t = Theory(t) if t is not None else state.theory
    goals = (goal,) if isinstance(goal, Sequent) else tuple(goal or state.goals)
    sum_t = size_sum(t)
    size_r = state.size_r
    phi_bound = size_max(goals) + sum_t
    if len(state.phi) > phi_bound:
        raise InternalInvariantViolated(f"|phi| = {len(state.phi)} exceeds {phi_bound}")
    worst = 0.0
    for s, i in state.stored.items():
        lim = (sum_t + 1) * size_r ** (2 * i + 1)
        if not len(s[0]) < lim:
            raise InternalInvariantViolated(f"norm {len(s[0])} at iteration {i} not below {lim}")
        worst = max(worst, len(s[0]) / lim)
    ok = control_check(state.trace)
    if not ok:
        raise InternalInvariantViolated("extracted bad sequence is not controlled")
    return BoundsReport(len(state.phi), phi_bound, len(state.stored), worst, ok, size_r, state.stabilized)
