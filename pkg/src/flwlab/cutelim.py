"""Rewriting deductions from regular theories into standard form.

A cut is standard when its left premise is a theory leaf.  Topmost
non-standard cuts are removed one at a time; each removal recurses on
cuts that are smaller in the lexicographic (grade, cut-height) order,
where the grade is the size of the cut formula and the cut-height the
number of nodes above the cut.
"""
from __future__ import annotations

from typing import Iterator, Optional, Sequence

from .calculus import (
    PForm, PSeq, PSucc, Calculus, Derivation, antecedent_layout, check_deduction,
    is_regular, match_instance, rule_node, schema, _freeze_sub,
)
from .errors import InternalInvariantViolated, InvalidInput
from .syntax import Sequent, size
from .wqo import embedding_positions


def _schema_of(d: Derivation):
    return schema(d.rule, d.variant or 0)


def with_substitutions(c: Calculus, d: Derivation) -> Derivation:
    """Fill in missing substitutions (e.g. after parsing) by matching."""
    kids = tuple(with_substitutions(c, ch) for ch in d.children)
    if d.kind == "theory":
        return d
    if d.subst is not None and d.variant is not None:
        return Derivation(d.sequent, d.kind, d.rule, d.subst, kids, d.variant)
    prem = tuple(ch.sequent for ch in kids)
    for r in c.schemas(d.rule):
        sub = match_instance(r, prem, d.sequent)
        if sub is not None:
            return Derivation(d.sequent, d.kind, d.rule, _freeze_sub(sub), kids, r.variant)
    raise InvalidInput(f"node {d.sequent} is not an instance of {d.rule}")


def weaken_to(d: Derivation, target_ant: Sequence) -> Derivation:
    """Extend ``d`` by left weakenings until its antecedent is ``target_ant``."""
    target_ant = tuple(target_ant)
    pos = embedding_positions(d.sequent.antecedent, target_ant)
    if pos is None:
        raise InternalInvariantViolated(f"{d.sequent} does not weaken to {target_ant}")
    present = set(pos)
    wl = schema("w-l")
    succ = d.sequent.succedent
    for idx in range(len(target_ant)):
        if idx in present:
            continue
        current = [target_ant[i] for i in sorted(present)]
        at = sum(1 for i in present if i < idx)
        d = rule_node(wl, {"G1": tuple(current[:at]), "G2": tuple(current[at:]),
                           "A": target_ant[idx], "P": succ}, [d])
        present.add(idx)
    return d


def _cut(left: Derivation, right: Derivation, k: int) -> Derivation:
    ant = right.sequent.antecedent
    sub = {"G3": left.sequent.antecedent, "A": left.sequent.succedent,
           "G1": ant[:k], "G2": ant[k + 1:], "P": right.sequent.succedent}
    return rule_node(schema("cut"), sub, [left, right])


class _Eliminator:
    def __init__(self):
        self.calls = 0

    def elim(self, left: Derivation, right: Derivation, k: int, bound=None) -> Derivation:
        """A standard derivation of ``right`` with position ``k`` replaced by ``left``'s antecedent.

        ``left`` and ``right`` contain only standard cuts.
        """
        self.calls += 1
        alpha = left.sequent.succedent
        r_ant = right.sequent.antecedent
        if alpha is None or k >= len(r_ant) or r_ant[k] != alpha:
            raise InternalInvariantViolated("cut formula mismatch")
        measure = (size(alpha), left.node_count() + right.node_count())
        if bound is not None and not measure < bound:
            raise InternalInvariantViolated(f"cut measure {measure} did not decrease below {bound}")
        target = Sequent(r_ant[:k] + left.sequent.antecedent + r_ant[k + 1:], right.sequent.succedent)
        out = self._elim(left, right, k, measure)
        if out.sequent != target:
            raise InternalInvariantViolated(f"elimination produced {out.sequent}, wanted {target}")
        return out

    def _elim(self, left, right, k, measure):
        if left.kind == "theory":
            return _cut(left, right, k)
        rl = _schema_of(left)
        if rl.name == "id":
            return right
        r_ant = right.sequent.antecedent
        sigma1, sigma2 = r_ant[:k], r_ant[k + 1:]
        if rl.name == "w-r":
            base = weaken_to(left.children[0], sigma1 + left.children[0].sequent.antecedent + sigma2)
            if right.sequent.succedent is None:
                return base
            return rule_node(rl, {"G1": base.sequent.antecedent, "A": right.sequent.succedent}, [base])
        if isinstance(rl.conclusion.succedent, PSucc):
            return self._permute_left(left, rl, right, k, sigma1, sigma2, measure)
        return self._against_right(left, rl, right, k, measure)

    def _permute_left(self, left, rl, right, k, sigma1, sigma2, measure):
        items = rl.conclusion.antecedent
        if not (items and isinstance(items[0], PSeq) and isinstance(items[-1], PSeq)):
            raise InternalInvariantViolated(f"cannot permute a cut above {rl.name}")
        sub = dict(left.sub)
        first, last = items[0].name, items[-1].name
        if first == last:
            sub[first] = sigma1 + sub[first] + sigma2
        else:
            sub[first] = sigma1 + sub[first]
            sub[last] = sub[last] + sigma2
        succ_var = rl.conclusion.succedent.name
        sub[succ_var] = right.sequent.succedent
        kids = []
        for prem, child in zip(rl.premises, left.children):
            if isinstance(prem.succedent, PSucc) and prem.succedent.name == succ_var:
                kids.append(self.elim(child, right, k, measure))
            else:
                kids.append(child)
        return rule_node(rl, sub, kids)

    def _against_right(self, left, rl, right, k, measure):
        if right.kind == "theory":
            raise InternalInvariantViolated(
                f"right-rule {rl.name} cut against a theory leaf; theory is not regular")
        rr = _schema_of(right)
        if rr.name == "id":
            return left
        sub = right.sub
        layout = antecedent_layout(rr.conclusion, sub)
        j = next(i for i, (a, b) in enumerate(layout) if a <= k < b)
        item = rr.conclusion.antecedent[j]
        if isinstance(item, PSeq):
            off = k - layout[j][0]
            new_sub = dict(sub)
            val = sub[item.name]
            new_sub[item.name] = val[:off] + left.sequent.antecedent + val[off + 1:]
            kids = []
            for prem, child in zip(rr.premises, right.children):
                names = [x.name if isinstance(x, PSeq) else None for x in prem.antecedent]
                if item.name in names:
                    at = names.index(item.name)
                    start = antecedent_layout(prem, sub)[at][0]
                    kids.append(self.elim(left, child, start + off, measure))
                else:
                    kids.append(child)
            return rule_node(rr, new_sub, kids)
        if rr.name == "w-l" and isinstance(item, PForm):
            r_ant = right.sequent.antecedent
            return weaken_to(right.children[0], r_ant[:k] + left.sequent.antecedent + r_ant[k + 1:])
        return self._principal(left, rl, right, rr, k, measure)

    def _principal(self, left, rl, right, rr, k, measure):
        pair = (rl.name, rr.name)
        if pair == ("R*", "L*"):
            l1, l2 = left.children
            d1 = self.elim(l1, right.children[0], k, measure)
            return self.elim(l2, d1, k + len(l1.sequent.antecedent), measure)
        if pair == ("R/\\", "L/\\"):
            return self.elim(left.children[right.variant or 0], right.children[0], k, measure)
        if pair == ("R\\/", "L\\/"):
            return self.elim(left.children[0], right.children[left.variant or 0], k, measure)
        if pair == ("R\\", "L\\"):
            r1, r2 = right.children
            delta = len(right.sub["G2"])
            d1 = self.elim(left.children[0], r2, delta, measure)
            return self.elim(r1, d1, delta, measure)
        if pair == ("R/", "L/"):
            r1, r2 = right.children
            delta = len(right.sub["G2"])
            d1 = self.elim(left.children[0], r2, delta, measure)
            return self.elim(r1, d1, delta + len(left.sequent.antecedent), measure)
        if pair == ("1R", "1L"):
            return right.children[0]
        if pair == ("0R", "0L"):
            return left.children[0]
        raise InternalInvariantViolated(f"no reduction for cut between {rl.name} and {rr.name}")


def _is_nonstandard_cut(d: Derivation) -> bool:
    return d.rule == "cut" and d.kind == "rule" and d.children[0].kind != "theory"


def _check_pre(c: Calculus, t, d: Derivation):
    if not c.is_builtin:
        raise InvalidInput("cut normalization covers the builtin rules only")
    if not is_regular(t):
        raise InvalidInput("theory is not regular")
    rep = check_deduction(c, t, d)
    if not rep.valid:
        raise InvalidInput("input is not a valid deduction: " + "; ".join(r for _, r in rep.violations[:3]))


def normalize_steps(c: Calculus, t, d: Derivation) -> Iterator[Derivation]:
    """Yield the deduction after each topmost non-standard cut is removed."""
    _check_pre(c, t, d)
    d = with_substitutions(c, d)
    yield d
    elim = _Eliminator()
    while True:
        path = _topmost_nonstandard(d)
        if path is None:
            return
        node = _get(d, path)
        left, right = node.children
        k = len(node.sub["G1"])
        d = _replace(d, path, elim.elim(left, right, k))
        yield d


def normalize_to_standard(c: Calculus, t, d: Derivation) -> Derivation:
    out = d
    for out in normalize_steps(c, t, d):
        pass
    return out


def _topmost_nonstandard(d: Derivation, path=()) -> Optional[tuple]:
    for i, ch in enumerate(d.children):
        p = _topmost_nonstandard(ch, path + (i,))
        if p is not None:
            return p
    return path if _is_nonstandard_cut(d) else None


def _get(d: Derivation, path):
    for i in path:
        d = d.children[i]
    return d


def _replace(d: Derivation, path, new: Derivation) -> Derivation:
    if not path:
        return new
    i = path[0]
    kids = list(d.children)
    kids[i] = _replace(kids[i], path[1:], new)
    return Derivation(d.sequent, d.kind, d.rule, d.subst, tuple(kids), d.variant)
