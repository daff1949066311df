"""Cross-validation of LCS reachability against the sequent encoding."""
from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from .calculus import builtin_calculus, check_deduction
from .encoding import compile_computation, lemma_property_suite, reduce
from .errors import BudgetExceeded, InternalInvariantViolated, ParseError
from .lcs import (ChannelSystem, Configuration, Instruction, parse_configuration, parse_lcs,
                  reach_bounded, reach_bounded_trace, reach_exact)
from .saturation import SaturationConfig, bounds_report, decide
from .syntax import Fragment, Sequent, Theory

log = logging.getLogger(__name__)

TENSOR = Fragment({"*"})


@dataclass
class LcsInstance:
    name: str
    cs: ChannelSystem
    u: Configuration
    v: Configuration
    saturate: bool = False


@dataclass
class XcheckResult:
    name: str
    bounded: str
    exact: bool
    decided: Optional[str] = None  # yes / no / budget_exceeded / skipped
    compiled: Optional[bool] = None
    lemmas_ok: Optional[bool] = None
    bounds_ok: Optional[bool] = None
    seconds: float = 0.0
    problems: list = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return not self.problems

    def line(self) -> str:
        return (f"{self.name}: bounded={self.bounded} exact={'yes' if self.exact else 'no'} "
                f"decide={self.decided or 'skipped'} compiled={_tri(self.compiled)} "
                f"lemmas={_tri(self.lemmas_ok)} bounds={_tri(self.bounds_ok)} agree={'yes' if self.agree else 'NO'}")


def _tri(x):
    return "n/a" if x is None else ("ok" if x else "FAIL")


def parse_instance(text: str, name: str = "instance") -> LcsInstance:
    """An LCS file plus ``from:``, ``to:`` and optional ``saturate: yes`` lines."""
    keep, extra = [], {}
    for line in text.split("\n"):
        bare = line.split("#", 1)[0].strip()
        head = bare.split(":", 1)[0].strip()
        if head in ("from", "to", "saturate"):
            extra[head] = bare.split(":", 1)[1].strip()
        else:
            keep.append(line)
    cs = parse_lcs("\n".join(keep))
    if "from" not in extra or "to" not in extra:
        raise ParseError(f"{name}: instance needs 'from:' and 'to:' lines")
    sat = extra.get("saturate", "no").lower() in ("yes", "true", "1")
    return LcsInstance(name, cs, parse_configuration(cs, extra["from"]), parse_configuration(cs, extra["to"]), sat)


def render_instance(inst: LcsInstance) -> str:
    out = inst.cs.render() + f"from: {inst.u.render()}\nto: {inst.v.render()}\n"
    if inst.saturate:
        out += "saturate: yes\n"
    return out


def load_corpus(path) -> List[LcsInstance]:
    files = sorted(Path(path).glob("*.lcs"))
    return [parse_instance(f.read_text(), f.stem) for f in files]


def random_instance(rng: random.Random, name: str, max_states=3, max_channels=2, max_letters=2,
                    max_instructions=4, max_word=2) -> LcsInstance:
    states = tuple(f"q{i}" for i in range(1, rng.randint(1, max_states) + 1))
    channels = tuple(f"c{i}" for i in range(1, rng.randint(1, max_channels) + 1))
    letters = tuple("ab"[:rng.randint(1, max_letters)])
    instrs = set()
    for _ in range(rng.randint(0, max_instructions)):
        instrs.add(Instruction(rng.choice(states), rng.choice(channels), rng.choice(letters),
                               rng.choice("!?"), rng.choice(states)))
    cs = ChannelSystem(states, channels, letters, tuple(instrs))

    def conf():
        return Configuration(rng.choice(states),
                             tuple(tuple(rng.choice(letters) for _ in range(rng.randint(0, max_word)))
                                   for _ in channels))

    return LcsInstance(name, cs, conf(), conf())


def random_corpus(seed: int, count: int, **caps) -> List[LcsInstance]:
    rng = random.Random(seed)
    return [random_instance(rng, f"rand{seed}_{i:03d}", **caps) for i in range(count)]


def xcheck_instance(inst: LcsInstance, cap: int = 4, saturate: Optional[bool] = None,
                    time_budget_s: float = 120.0, theory_override: Optional[Theory] = None) -> XcheckResult:
    """Compare bounded search, backward search, the encoded decision and compiled proofs.

    ``theory_override`` replaces the encoded theory; used to check that a
    corrupted encoding is noticed.
    """
    t0 = time.monotonic()
    cs, u, v = inst.cs, inst.u, inst.v
    bounded = reach_bounded(cs, u, v, cap)
    exact = reach_exact(cs, u, v)
    res = XcheckResult(inst.name, bounded, exact)
    if bounded == "yes" and not exact:
        res.problems.append("bounded search found a computation the backward search missed")
    enc = reduce(cs, u, v)
    theory = theory_override if theory_override is not None else enc.theory
    calc = builtin_calculus(TENSOR)
    if bounded == "yes":
        trace = reach_bounded_trace(cs, u, v, cap)
        d = compile_computation(cs, u, trace, enc.vocabulary)
        rep = check_deduction(calc, theory, d)
        res.compiled = rep.valid and rep.standard and d.sequent == enc.canonical_goal
        if not res.compiled:
            res.problems.append("compiled deduction rejected by the checker")
    if saturate if saturate is not None else inst.saturate:
        cfg = SaturationConfig(time_budget_s=time_budget_s, stop_on_goal=True)
        try:
            verdict = decide(calc, theory, enc.commuted_goals, cfg)
        except BudgetExceeded:
            res.decided = "budget_exceeded"
            res.problems.append("saturation budget exceeded")
        else:
            res.decided = verdict.text
            if verdict.answer != exact:
                res.problems.append(f"decide says {verdict.text}, backward search says {exact}")
            try:
                bounds_report(verdict.state)
                res.bounds_ok = True
            except InternalInvariantViolated as exc:
                res.bounds_ok = False
                res.problems.append(f"bound check failed: {exc}")
            lem = lemma_property_suite(verdict.state.sequents(), enc.vocabulary)
            res.lemmas_ok = lem.ok
            if not lem.ok:
                res.problems.append(f"structural lemma violated: {lem.violations[0][0]}")
    res.seconds = time.monotonic() - t0
    return res


def mutate_read(theory: Theory, vocab) -> Theory:
    """Redirect the first read sequent of the theory back to its source state."""
    states = vocab.state_set
    for s in theory.sorted():
        if len(s.antecedent) == 3 and s.antecedent[2] in states:
            bad = Sequent(s.antecedent, type(s.succedent)(s.succedent.op, s.succedent.left, s.antecedent[2]))
            return Theory((set(theory) - {s}) | {bad})
    raise ParseError("theory has no read sequent to corrupt")
