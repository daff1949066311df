"""Random instance generators shared by the test modules."""
import random

from flwlab.calculus import builtin_calculus, non_standard_cuts, rule_node, schema, theory_leaf
from flwlab.syntax import Bin, Fragment, Sequent, Theory, Var, subformula_closure

TENSOR = builtin_calculus(Fragment({"*"}))
ATOMS = ("p", "q", "r")


def rand_formula(rng: random.Random, atoms, depth=1) -> object:
    if depth == 0 or rng.random() < 0.6:
        return Var(rng.choice(atoms))
    return Bin("*", rand_formula(rng, atoms, depth - 1), rand_formula(rng, atoms, depth - 1))


def rand_regular_sequent(rng, atoms, max_ant=2):
    ant = tuple(Var(rng.choice(atoms)) for _ in range(rng.randint(0, max_ant)))
    return Sequent(ant, rand_formula(rng, atoms))


def micro_instance(rng: random.Random, max_phi=6, max_theory=3):
    """A regular tensor theory of at most ``max_theory`` sequents and a goal, |phi| bounded."""
    while True:
        atoms = ATOMS[:rng.randint(1, 3)]
        t = Theory({rand_regular_sequent(rng, atoms) for _ in range(rng.randint(1, max_theory))})
        goal = Sequent(tuple(Var(rng.choice(atoms)) for _ in range(rng.randint(0, 3))),
                       rand_formula(rng, atoms))
        if len(subformula_closure(list(t) + [goal])) <= max_phi:
            return t, goal


def _id(a):
    return rule_node(schema("id"), {"p": a})


def _fuse(d, i):
    ant = d.sequent.antecedent
    sub = {"G1": ant[:i], "A": ant[i], "B": ant[i + 1], "G2": ant[i + 2:], "P": d.sequent.succedent}
    return rule_node(schema("L*"), sub, [d])


def _pair(d1, d2):
    sub = {"G1": d1.sequent.antecedent, "G2": d2.sequent.antecedent,
           "A": d1.sequent.succedent, "B": d2.sequent.succedent}
    return rule_node(schema("R*"), sub, [d1, d2])


def _weaken(d, i, f):
    ant = d.sequent.antecedent
    return rule_node(schema("w-l"), {"G1": ant[:i], "G2": ant[i:], "A": f, "P": d.sequent.succedent}, [d])


def _cut(left, right, k):
    ant = right.sequent.antecedent
    sub = {"G3": left.sequent.antecedent, "A": left.sequent.succedent,
           "G1": ant[:k], "G2": ant[k + 1:], "P": right.sequent.succedent}
    return rule_node(schema("cut"), sub, [left, right])


def random_deduction(rng: random.Random, steps=14, max_ant=4, max_size=9):
    """A valid tensor-fragment deduction over a random regular theory, with a non-standard cut."""
    while True:
        atoms = ATOMS[:rng.randint(1, 3)]
        t = Theory({rand_regular_sequent(rng, atoms) for _ in range(rng.randint(1, 3))})
        pool = [theory_leaf(s) for s in t] + [_id(Var(a)) for a in atoms]
        for _ in range(steps):
            op = rng.choice(("pair", "pair", "fuse", "weaken", "cut", "cut", "cut"))
            d = rng.choice(pool)
            ant = d.sequent.antecedent
            new = None
            if op == "pair":
                e = rng.choice(pool)
                if len(ant) + len(e.sequent.antecedent) <= max_ant:
                    new = _pair(d, e)
            elif op == "fuse" and len(ant) >= 2:
                new = _fuse(d, rng.randrange(len(ant) - 1))
            elif op == "weaken" and len(ant) < max_ant:
                new = _weaken(d, rng.randint(0, len(ant)), Var(rng.choice(atoms)))
            elif op == "cut":
                lefts = [x for x in pool if x.sequent.succedent in ant]
                if lefts:
                    left = rng.choice(lefts)
                    ks = [i for i, f in enumerate(ant) if f == left.sequent.succedent]
                    if len(ant) - 1 + len(left.sequent.antecedent) <= max_ant:
                        new = _cut(left, d, rng.choice(ks))
            if new is not None and all(_fsize(f) <= max_size for f in new.sequent.formulas()):
                pool.append(new)
        cands = [d for d in pool if d.kind != "theory" and non_standard_cuts(d) > 0]
        if cands:
            return t, max(cands, key=lambda d: d.node_count())


def _fsize(f):
    return 3 + _fsize(f.left) + _fsize(f.right) if isinstance(f, Bin) else 1
