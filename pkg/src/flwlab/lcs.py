"""Lossy channel systems: parsing, perfect and lossy steps, reachability."""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

from .errors import BudgetExceeded, InvalidTrace, ParseError
from .wqo import subword_embed

_NAME_RE = re.compile(r"[A-Za-z0-9_]+\Z")


@dataclass(frozen=True, order=True)
class Instruction:
    source: str
    channel: str
    letter: str
    op: str  # "!" writes, "?" reads
    target: str

    def render(self) -> str:
        return f"{self.source} {self.channel} {self.letter} {self.op} {self.target}"


@dataclass(frozen=True)
class ChannelSystem:
    states: tuple
    channels: tuple
    alphabet: tuple
    instructions: tuple

    def __post_init__(self):
        if not self.states or not self.channels or not self.alphabet:
            raise ParseError("a channel system needs a state, a channel and a letter")
        for group in (self.states, self.channels, self.alphabet):
            if len(set(group)) != len(group):
                raise ParseError(f"duplicate names in {group}")
            for x in group:
                if not _NAME_RE.match(x):
                    raise ParseError(f"bad name {x!r}")
        for ins in self.instructions:
            if ins.source not in self.states or ins.target not in self.states:
                raise ParseError(f"unknown state in {ins.render()}")
            if ins.channel not in self.channels:
                raise ParseError(f"unknown channel in {ins.render()}")
            if ins.letter not in self.alphabet:
                raise ParseError(f"unknown letter in {ins.render()}")
            if ins.op not in ("!", "?"):
                raise ParseError(f"bad operation in {ins.render()}")
        object.__setattr__(self, "instructions", tuple(sorted(set(self.instructions))))

    def channel_index(self, ch: str) -> int:
        return self.channels.index(ch)

    def render(self) -> str:
        lines = [f"states: {' '.join(self.states)}", f"channels: {' '.join(self.channels)}",
                 f"alphabet: {' '.join(self.alphabet)}"]
        lines += [i.render() for i in self.instructions]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, order=True)
class Configuration:
    state: str
    words: tuple  # one tuple of letters per channel

    def render(self) -> str:
        return f"{self.state} : " + " ; ".join(" ".join(w) for w in self.words)

    def __str__(self):
        return self.render()


def parse_lcs(text: str) -> ChannelSystem:
    header = {}
    instrs = []
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"(states|channels|alphabet)\s*:(.*)\Z", line)
        if m:
            header[m.group(1)] = tuple(m.group(2).split())
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ParseError(f"line {lineno}: expected 'state channel letter !|? state'")
        instrs.append(Instruction(*parts))
    for key in ("states", "channels", "alphabet"):
        if key not in header:
            raise ParseError(f"missing '{key}:' header")
    return ChannelSystem(header["states"], header["channels"], header["alphabet"], tuple(instrs))


def parse_configuration(cs: ChannelSystem, text: str) -> Configuration:
    """Parse ``q1 : a a ; b`` (channels in declared order)."""
    if ":" not in text:
        raise ParseError(f"configuration needs 'state : words', got {text!r}")
    state, rest = text.split(":", 1)
    state = state.strip()
    if state not in cs.states:
        raise ParseError(f"unknown state {state!r}")
    segs = rest.split(";")
    if len(segs) != len(cs.channels):
        raise ParseError(f"expected {len(cs.channels)} channel segments, got {len(segs)}")
    words = []
    for seg in segs:
        w = tuple(seg.split())
        for a in w:
            if a not in cs.alphabet:
                raise ParseError(f"unknown letter {a!r}")
        words.append(w)
    return Configuration(state, tuple(words))


def step_perfect(cs: ChannelSystem, c: Configuration) -> list:
    """Successors by one read or write, as ``(configuration, instruction)`` pairs."""
    out = []
    for ins in cs.instructions:
        if ins.source != c.state:
            continue
        k = cs.channel_index(ins.channel)
        w = c.words[k]
        if ins.op == "!":
            nw = w + (ins.letter,)
        elif w and w[0] == ins.letter:
            nw = w[1:]
        else:
            continue
        words = c.words[:k] + (nw,) + c.words[k + 1:]
        out.append((Configuration(ins.target, words), ins))
    return out


def step_lossy(c: Configuration) -> set:
    out = set()
    for k, w in enumerate(c.words):
        for i in range(len(w)):
            nw = w[:i] + w[i + 1:]
            out.add(Configuration(c.state, c.words[:k] + (nw,) + c.words[k + 1:]))
    return out


def conf_leq(c1: Configuration, c2: Configuration) -> bool:
    """Same state and channel-wise subword embedding."""
    return c1.state == c2.state and all(subword_embed(a, b) for a, b in zip(c1.words, c2.words))


def _fits(c: Configuration, cap: int) -> bool:
    return all(len(w) <= cap for w in c.words)


def reach_bounded(cs: ChannelSystem, u: Configuration, v: Configuration, cap: int,
                  budget: int = 10 ** 6) -> str:
    """``"yes"`` or ``"no_within_cap"``; explores configurations with channel words of length at most ``cap``."""
    if u == v:
        return "yes"
    if not _fits(u, cap):
        return "no_within_cap"
    seen = {u}
    queue = deque([u])
    while queue:
        c = queue.popleft()
        succ = [d for d, _ in step_perfect(cs, c)] + sorted(step_lossy(c))
        for d in succ:
            if d in seen or not _fits(d, cap):
                continue
            if d == v:
                return "yes"
            seen.add(d)
            if len(seen) > budget:
                raise BudgetExceeded("bounded reachability state budget exceeded")
            queue.append(d)
    return "no_within_cap"


def reach_bounded_trace(cs: ChannelSystem, u: Configuration, v: Configuration, cap: int) -> Optional[list]:
    """A shortest computation from ``u`` to ``v`` within ``cap``, as trace steps, or None."""
    if u == v:
        return []
    if not _fits(u, cap):
        return None
    parent = {u: None}
    queue = deque([u])
    while queue:
        c = queue.popleft()
        moves = [(d, ("perfect", ins)) for d, ins in step_perfect(cs, c)]
        moves += [(d, ("lossy", d)) for d in sorted(step_lossy(c))]
        for d, step in moves:
            if d in parent or not _fits(d, cap):
                continue
            parent[d] = (c, step)
            if d == v:
                trace = []
                x = d
                while parent[x] is not None:
                    prev, st = parent[x]
                    trace.append(st)
                    x = prev
                return trace[::-1]
            queue.append(d)
    return None


def validate_trace(cs: ChannelSystem, u: Configuration, trace: Sequence) -> list:
    """The configurations visited by ``trace``; raises InvalidTrace on a bad step.

    A step is ``("perfect", instruction)`` or ``("lossy", next configuration)``.
    """
    confs = [u]
    c = u
    for i, step in enumerate(trace):
        kind, data = step
        if kind == "perfect":
            nxt = [d for d, ins in step_perfect(cs, c) if ins == data]
            if not nxt:
                raise InvalidTrace(f"step {i}: {data} is not enabled in {c}")
            c = nxt[0]
        elif kind == "lossy":
            if data not in step_lossy(c):
                raise InvalidTrace(f"step {i}: {data} is not one loss away from {c}")
            c = data
        else:
            raise InvalidTrace(f"step {i}: unknown kind {kind!r}")
        confs.append(c)
    return confs


class UpwardClosedSet:
    """An upward-closed set of configurations kept as its minimal basis."""

    def __init__(self, basis: Iterable[Configuration] = ()):
        self.basis: List[Configuration] = []
        for c in basis:
            self.add(c)

    def covers(self, c: Configuration) -> bool:
        return any(conf_leq(b, c) for b in self.basis)

    def add(self, c: Configuration) -> bool:
        if self.covers(c):
            return False
        self.basis = [b for b in self.basis if not conf_leq(c, b)]
        self.basis.append(c)
        return True

    def __len__(self):
        return len(self.basis)


def _predecessors(cs: ChannelSystem, b: Configuration) -> list:
    out = []
    for ins in cs.instructions:
        if ins.target != b.state:
            continue
        k = cs.channel_index(ins.channel)
        w = b.words[k]
        if ins.op == "?":
            cands = [(ins.letter,) + w]
        else:
            cands = [w]
            if w and w[-1] == ins.letter:
                cands.append(w[:-1])
        for nw in cands:
            out.append(Configuration(ins.source, b.words[:k] + (nw,) + b.words[k + 1:]))
    return out


def pre_star_basis(cs: ChannelSystem, v: Configuration, budget: int = 10 ** 6) -> UpwardClosedSet:
    """Minimal basis of the configurations that can reach the upward closure of ``v``."""
    up = UpwardClosedSet([v])
    work = deque([v])
    steps = 0
    while work:
        b = work.popleft()
        if b not in up.basis:
            continue
        for p in sorted(_predecessors(cs, b)):
            steps += 1
            if steps > budget:
                raise BudgetExceeded("backward reachability budget exceeded")
            if up.add(p):
                work.append(p)
    return up


def reach_exact(cs: ChannelSystem, u: Configuration, v: Configuration) -> bool:
    """Exact reachability under lossy semantics, by backward search."""
    return pre_star_basis(cs, v).covers(u)


def _loss_closure(c: Configuration) -> set:
    out = {c}
    stack = [c]
    while stack:
        x = stack.pop()
        for y in step_lossy(x):
            if y not in out:
                out.add(y)
                stack.append(y)
    return out


def _reachable_phased(cs, u, cap):
    start = {c for c in _loss_closure(u) if _fits(c, cap)}
    seen = set(start)
    queue = deque(sorted(start))
    while queue:
        c = queue.popleft()
        for d, _ in step_perfect(cs, c):
            if not _fits(d, cap):
                continue
            for e in _loss_closure(d):
                if e not in seen:
                    seen.add(e)
                    queue.append(e)
    return seen


def _reachable_interleaved(cs, u, cap):
    if not _fits(u, cap):
        return set()
    seen = {u}
    queue = deque([u])
    while queue:
        c = queue.popleft()
        for d in [d for d, _ in step_perfect(cs, c)] + sorted(step_lossy(c)):
            if _fits(d, cap) and d not in seen:
                seen.add(d)
                queue.append(d)
    return seen


def semantics_equivalence_probe(cs: ChannelSystem, u: Configuration, v: Configuration, cap: int) -> bool:
    """Interleaved single losses and loss-closure phases agree on reaching ``v`` within ``cap``."""
    a = v in _reachable_interleaved(cs, u, cap) or u == v
    b = v in _reachable_phased(cs, u, cap) or u == v
    return a == b
