"""Command-line front end.

Exit codes: 0 yes/valid, 1 no/invalid, 2 input error, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .calculus import builtin_calculus, check_deduction, parse_derivation, parse_rules, render_derivation, add_structural_rule
from .cutelim import normalize_to_standard
from .encoding import reduce
from .errors import BudgetExceeded, FlwError
from .harness import load_corpus, mutate_read, random_corpus, xcheck_instance
from .lcs import parse_configuration, parse_lcs, reach_bounded, reach_exact
from .saturation import SaturationConfig, bounds_report, decide, load_config
from .syntax import parse_fragment, parse_theory, render_theory, sequent_key

log = logging.getLogger("flwlab")

CONFIG_ENV = "FLWLAB_CONFIG"
EXIT_YES, EXIT_NO, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class Report:
    """Ordered key/value report printed as ``key: value`` lines or JSON."""

    def __init__(self, command: str):
        self.fields = {"command": command}

    def add(self, key, value):
        self.fields[key] = value

    def add_input(self, label: str, path):
        data = Path(path).read_bytes()
        self.fields[f"input_{label}"] = str(path)
        self.fields[f"sha256_{label}"] = hashlib.sha256(data).hexdigest()[:16]

    def emit(self, as_json: bool, out=None):
        out = out or sys.stdout
        if as_json:
            out.write(json.dumps(self.fields, indent=2, sort_keys=False, default=str) + "\n")
            return
        for k, v in self.fields.items():
            if isinstance(v, list):
                v = " ".join(str(x) for x in v)
            out.write(f"{k}: {v}\n")


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise FlwError(f"cannot read {path}: {exc.strerror}") from None


def _config(args) -> SaturationConfig:
    cfg = SaturationConfig()
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    if path:
        cfg = load_config(_read(path), cfg)
    if getattr(args, "time_budget", None) is not None:
        cfg.time_budget_s = args.time_budget
    if getattr(args, "engine", None):
        cfg.engine = args.engine
    if getattr(args, "literal_bound", None) is not None:
        cfg.literal_bound = args.literal_bound
    return cfg


def _calculus(args):
    c = builtin_calculus(parse_fragment(args.fragment))
    if getattr(args, "rules", None):
        for r in parse_rules(_read(args.rules)):
            c = add_structural_rule(c, r)
    return c


def _plot_decide(directory, stats):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    Path(directory).mkdir(parents=True, exist_ok=True)
    rounds = list(range(len(stats["frontier_sizes"])))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    ax1.plot(rounds, stats["frontier_sizes"], marker="o", label="minimal")
    ax1.plot(rounds, stats["admitted"], marker="s", label="admitted")
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("sequents")
    ax1.set_yscale("symlog")
    ax1.legend(frameon=False)
    ax2.plot(rounds, stats["max_norms"], marker="o", color="tab:red")
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("max antecedent length")
    fig.tight_layout()
    out = Path(directory) / "decide_frontier.png"
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def _plot_xcheck(directory, results):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    Path(directory).mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 3))
    xs = range(len(results))
    colors = ["tab:green" if r.agree else "tab:red" for r in results]
    ax.bar(xs, [r.seconds for r in results], color=colors)
    ax.set_xlabel("instance")
    ax.set_ylabel("seconds")
    ax.set_yscale("log")
    fig.tight_layout()
    out = Path(directory) / "xcheck_times.png"
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


# --- subcommands -------------------------------------------------------------

def cmd_decide(args) -> int:
    rep = Report("decide")
    t = parse_theory(_read(args.theory))
    goals = parse_theory(_read(args.goal)).sorted()
    if not goals:
        raise FlwError("goal file holds no sequent")
    rep.add_input("theory", args.theory)
    rep.add_input("goal", args.goal)
    c = _calculus(args)
    cfg = _config(args)
    cfg.stop_on_goal = not args.full
    rep.add("fragment", ",".join(sorted(c.fragment)) or "none")
    rep.add("engine", cfg.engine)
    t0 = time.monotonic()
    try:
        v = decide(c, t, goals, cfg)
    except BudgetExceeded as exc:
        rep.add("verdict", "budget_exceeded")
        rep.add("reason", str(exc))
        rep.emit(args.json)
        return EXIT_BUDGET
    rep.add("verdict", v.text)
    rep.add("iterations", v.iterations)
    rep.add("stabilized", v.stats["stabilized"])
    rep.add("phi_size", v.stats["phi"])
    rep.add("stored", v.stats["stored"])
    rep.add("frontier_sizes", v.stats["frontier_sizes"])
    rep.add("max_norms", v.stats["max_norms"])
    for line in bounds_report(v.state).lines():
        k, val = line.split(": ", 1)
        rep.add(f"bounds_{k}", val)
    if v.answer:
        rep.add("witness", v.witness.render())
        rep.add("goal", v.goal.render())
        if v.derivation is not None:
            rep.add("proof_nodes", v.derivation.node_count())
            if args.proof_out:
                Path(args.proof_out).write_text(render_derivation(v.derivation) + "\n")
                rep.add("proof", args.proof_out)
    for w in c.warnings:
        rep.add("warning", w)
    if args.plot:
        rep.add("plot", str(_plot_decide(args.plot, v.stats)))
    if args.timing:
        rep.add("wall_time_s", round(time.monotonic() - t0, 3))
    rep.emit(args.json)
    return EXIT_YES if v.answer else EXIT_NO


def cmd_check(args) -> int:
    d = parse_derivation(_read(args.derivation))
    t = parse_theory(_read(args.theory))
    c = _calculus(args)
    r = check_deduction(c, t, d)
    rep = Report("check")
    rep.add_input("derivation", args.derivation)
    rep.add("endsequent", d.sequent.render())
    rep.add("valid", r.valid)
    rep.add("standard", r.standard)
    rep.add("analytic", r.analytic)
    for path, reason in r.violations:
        rep.add(f"violation_{'.'.join(map(str, path)) or 'root'}", reason)
    rep.emit(args.json)
    ok = r.valid and (r.standard or not args.require_standard)
    return EXIT_YES if ok else EXIT_NO


def cmd_normalize(args) -> int:
    d = parse_derivation(_read(args.derivation))
    t = parse_theory(_read(args.theory))
    c = _calculus(args)
    out = normalize_to_standard(c, t, d)
    text = render_derivation(out) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_YES


def cmd_lcs_reach(args) -> int:
    cs = parse_lcs(_read(args.lcs))
    u = parse_configuration(cs, args.source)
    v = parse_configuration(cs, args.target)
    rep = Report("lcs-reach")
    rep.add_input("lcs", args.lcs)
    rep.add("from", u.render())
    rep.add("to", v.render())
    rep.add("mode", args.mode)
    if args.mode == "exact":
        verdict = "yes" if reach_exact(cs, u, v) else "no"
    else:
        rep.add("cap", args.cap)
        verdict = reach_bounded(cs, u, v, args.cap)
    rep.add("verdict", verdict)
    rep.emit(args.json)
    return EXIT_YES if verdict == "yes" else EXIT_NO


def cmd_encode(args) -> int:
    cs = parse_lcs(_read(args.lcs))
    u = parse_configuration(cs, args.source)
    v = parse_configuration(cs, args.target)
    enc = reduce(cs, u, v, args.scheme)
    theory_text = render_theory(enc.theory)
    goals = [enc.canonical_goal] if args.canonical_only else sorted(enc.commuted_goals, key=sequent_key)
    goals_text = "".join(g.render() + "\n" for g in goals)
    rep = Report("encode")
    rep.add("scheme", args.scheme)
    rep.add("theory_size", len(enc.theory))
    rep.add("goals", len(goals))
    rep.add("canonical_goal", enc.canonical_goal.render())
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "theory.txt").write_text(theory_text)
        (out / "goals.txt").write_text(goals_text)
        rep.add("theory_file", str(out / "theory.txt"))
        rep.add("goals_file", str(out / "goals.txt"))
    rep.emit(args.json)
    return EXIT_YES


def cmd_xcheck(args) -> int:
    instances = []
    if args.corpus:
        instances += load_corpus(args.corpus)
    if args.random:
        instances += random_corpus(args.seed, args.random, max_states=args.max_states,
                                   max_channels=args.max_channels, max_letters=args.max_letters,
                                   max_instructions=args.max_instructions, max_word=args.max_word)
    if not instances:
        raise FlwError("nothing to check: give --corpus and/or --random")
    log.info("xcheck seed=%s instances=%d", args.seed, len(instances))
    results = []
    for inst in sorted(instances, key=lambda i: i.name):
        override = None
        if args.mutate:
            enc = reduce(inst.cs, inst.u, inst.v)
            try:
                override = mutate_read(enc.theory, enc.vocabulary)
            except FlwError:
                continue
        sat = True if args.saturate else None
        results.append(xcheck_instance(inst, args.cap, sat, args.time_budget or 120.0, override))
    rep = Report("xcheck")
    rep.add("seed", args.seed)
    rep.add("instances", len(results))
    rep.add("saturated", sum(1 for r in results if r.decided))
    bad = [r for r in results if not r.agree]
    rep.add("disagreements", len(bad))
    if args.plot:
        rep.add("plot", str(_plot_xcheck(args.plot, results)))
    rep.emit(args.json)
    if not args.json:
        for r in results:
            sys.stdout.write(r.line() + "\n")
            for p in r.problems:
                sys.stdout.write(f"  problem: {p}\n")
    budget = any(r.decided == "budget_exceeded" for r in results)
    if bad:
        return EXIT_BUDGET if budget and all(r.decided == "budget_exceeded" for r in bad) else EXIT_NO
    return EXIT_YES


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flwlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fragment=True):
        sp.add_argument("--json", action="store_true", help="machine-readable report")
        if fragment:
            sp.add_argument("--fragment", default="*", help="connectives, e.g. '*' or '*,\\,0,1' or 'full'")
            sp.add_argument("--rules", help="extra structural rules file")

    d = sub.add_parser("decide", help="decide T |- goal by saturation")
    d.add_argument("theory")
    d.add_argument("goal", help="file with one or more goal sequents")
    common(d)
    d.add_argument("--config", help=f"config file (default: ${CONFIG_ENV})")
    d.add_argument("--engine", choices=("anchored", "literal"))
    d.add_argument("--literal-bound", type=int)
    d.add_argument("--time-budget", type=float)
    d.add_argument("--full", action="store_true", help="saturate to the fixpoint even after a goal is found")
    d.add_argument("--proof-out")
    d.add_argument("--plot", metavar="DIR", help="write frontier plots into DIR")
    d.add_argument("--timing", action="store_true", help="include wall time in the report")
    d.set_defaults(func=cmd_decide)

    c = sub.add_parser("check", help="check a derivation against a theory")
    c.add_argument("derivation")
    c.add_argument("theory")
    common(c)
    c.add_argument("--require-standard", action="store_true")
    c.set_defaults(func=cmd_check)

    n = sub.add_parser("normalize", help="rewrite a deduction so all cuts are standard")
    n.add_argument("derivation")
    n.add_argument("theory")
    common(n)
    n.add_argument("-o", "--output")
    n.set_defaults(func=cmd_normalize)

    r = sub.add_parser("lcs-reach", help="reachability in a lossy channel system")
    r.add_argument("lcs")
    r.add_argument("source", help="configuration like 'q1 : a a ; b'")
    r.add_argument("target")
    r.add_argument("--mode", choices=("exact", "bounded"), default="exact")
    r.add_argument("--cap", type=int, default=4)
    common(r, fragment=False)
    r.set_defaults(func=cmd_lcs_reach)

    e = sub.add_parser("encode", help="write the theory and goals for an LCS question")
    e.add_argument("lcs")
    e.add_argument("source")
    e.add_argument("target")
    e.add_argument("--scheme", choices=("named", "indexed"), default="named")
    e.add_argument("--out-dir")
    e.add_argument("--canonical-only", action="store_true")
    common(e, fragment=False)
    e.set_defaults(func=cmd_encode)

    x = sub.add_parser("xcheck", help="cross-check reachability against the encoding")
    x.add_argument("--corpus", help="directory of *.lcs instance files")
    x.add_argument("--random", type=int, default=0, metavar="COUNT")
    x.add_argument("--seed", type=int, default=42)
    x.add_argument("--cap", type=int, default=4)
    x.add_argument("--max-states", type=int, default=3)
    x.add_argument("--max-channels", type=int, default=2)
    x.add_argument("--max-letters", type=int, default=2)
    x.add_argument("--max-instructions", type=int, default=4)
    x.add_argument("--max-word", type=int, default=2)
    x.add_argument("--saturate", action="store_true", help="run saturation on every instance")
    x.add_argument("--mutate", action="store_true", help="corrupt one read sequent per instance")
    x.add_argument("--time-budget", type=float)
    x.add_argument("--plot", metavar="DIR")
    common(x, fragment=False)
    x.set_defaults(func=cmd_xcheck)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        sys.stderr.write(f"budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except FlwError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
