import json
import subprocess
import sys
from pathlib import Path


from flwlab.calculus import render_derivation, theory_leaf
from flwlab.cli import main
from flwlab.syntax import parse_sequent, parse_theory

from gen import _cut, _fuse, _pair

DATA = Path(__file__).parent / "data"
S = parse_sequent


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def fields(out):
    return dict(line.split(": ", 1) for line in out.strip().split("\n") if ": " in line)


def test_decide_yes_and_no(tmp_path, capsys):
    t = write(tmp_path, "t.txt", "p |- q\nq |- r\n")
    g = write(tmp_path, "g.txt", "p |- r\n")
    code, out, _ = run(["decide", t, g], capsys)
    assert code == 0 and fields(out)["verdict"] == "yes"
    g2 = write(tmp_path, "g2.txt", "r |- p\n")
    code, out, _ = run(["decide", t, g2, "--json"], capsys)
    assert code == 1 and json.loads(out)["verdict"] == "no"


def test_decide_report_is_deterministic(tmp_path, capsys):
    t = write(tmp_path, "t.txt", "|- p\np |- p * p\n")
    g = write(tmp_path, "g.txt", "|- p * (p * p)\n")
    a = run(["decide", t, g], capsys)
    b = run(["decide", t, g], capsys)
    assert a == b


def test_decide_plot_and_proof(tmp_path, capsys):
    t = write(tmp_path, "t.txt", "|- a\n|- b\n")
    g = write(tmp_path, "g.txt", "|- a * b\n")
    proof = tmp_path / "proof.sexp"
    code, out, _ = run(["decide", t, g, "--full", "--plot", tmp_path / "plots", "--proof-out", proof], capsys)
    assert code == 0
    assert (tmp_path / "plots" / "decide_frontier.png").stat().st_size > 0
    code, out, _ = run(["check", proof, t, "--require-standard"], capsys)
    assert code == 0 and fields(out)["standard"] == "True"


def test_decide_input_errors(tmp_path, capsys):
    t = write(tmp_path, "t.txt", "a * b |- c\n")
    g = write(tmp_path, "g.txt", "a |- c\n")
    assert run(["decide", t, g], capsys)[0] == 2
    bad = write(tmp_path, "bad.txt", "p |- |- q\n")
    assert run(["decide", bad, g], capsys)[0] == 2
    assert run(["decide", tmp_path / "missing", g], capsys)[0] == 2
    assert run(["decide", "--no-such-flag"], capsys)[0] == 2


def test_decide_config_and_budget(tmp_path, capsys, monkeypatch):
    t = write(tmp_path, "t.txt", "|- p\np |- p * p\np, p |- p\n")
    g = write(tmp_path, "g.txt", "q |- q * q\n")
    cfg = write(tmp_path, "c.ini", "time_budget_s = 0\n")
    monkeypatch.setenv("FLWLAB_CONFIG", str(cfg))
    code, out, _ = run(["decide", t, g, "--full"], capsys)
    assert code == 3 and fields(out)["verdict"] == "budget_exceeded"
    bad = write(tmp_path, "bad.ini", "engine = warp\n")
    assert run(["decide", t, g, "--config", bad], capsys)[0] == 2


def test_check_exit_codes(tmp_path, capsys):
    t = write(tmp_path, "t.txt", "|- a\n|- b\na, b |- c\n")
    good = write(tmp_path, "good.sexp", render_derivation(theory_leaf(S("|- a"))))
    assert run(["check", good, t], capsys)[0] == 0
    left = _pair(theory_leaf(S("|- a")), theory_leaf(S("|- b")))
    d = _cut(left, _fuse(theory_leaf(S("a, b |- c")), 0), 0)
    ns = write(tmp_path, "ns.sexp", render_derivation(d))
    assert run(["check", ns, t], capsys)[0] == 0
    assert run(["check", ns, t, "--require-standard"], capsys)[0] == 1
    junk = write(tmp_path, "junk.sexp", "(node oops")
    assert run(["check", junk, t], capsys)[0] == 2


def test_normalize(tmp_path, capsys):
    t = write(tmp_path, "t.txt", "|- a\n|- b\na, b |- c\n")
    left = _pair(theory_leaf(S("|- a")), theory_leaf(S("|- b")))
    d = _cut(left, _fuse(theory_leaf(S("a, b |- c")), 0), 0)
    src = write(tmp_path, "ns.sexp", render_derivation(d))
    out = tmp_path / "out.sexp"
    assert run(["normalize", src, t, "-o", out], capsys)[0] == 0
    code, rep, _ = run(["check", out, t, "--require-standard"], capsys)
    assert code == 0 and fields(rep)["endsequent"] == "|- c"
    std = write(tmp_path, "std.sexp", render_derivation(theory_leaf(S("|- a"))))
    code, text, _ = run(["normalize", std, t], capsys)
    assert code == 0 and text.strip() == std.read_text().strip()
    bad = write(tmp_path, "bad.sexp", render_derivation(theory_leaf(S("|- z"))))
    assert run(["normalize", bad, t], capsys)[0] == 2


def test_lcs_reach(capsys):
    lcs = DATA / "intro.lcs"
    code, out, _ = run(["lcs-reach", lcs, "q1 : a a ; b", "q2 : a ; b"], capsys)
    assert code == 0 and fields(out)["verdict"] == "yes"
    code, out, _ = run(["lcs-reach", lcs, "q1 : b ;", "q1 : b ;", "--mode", "bounded", "--cap", "0"], capsys)
    assert code == 0
    code, out, _ = run(["lcs-reach", lcs, "q1 : ;", "q2 : a ;", "--mode", "bounded"], capsys)
    assert code == 1 and fields(out)["verdict"] == "no_within_cap"
    code, out, _ = run(["lcs-reach", lcs, "q1 : ;", "q2 : a ;"], capsys)
    assert code == 1 and fields(out)["verdict"] == "no"
    assert run(["lcs-reach", lcs, "q9 : ;", "q2 : ;"], capsys)[0] == 2


def test_encode_golden(tmp_path, capsys):
    code, out, _ = run(["encode", DATA / "intro.lcs", "q1 : a a ; b", "q2 : a ; b", "--scheme", "indexed",
                        "--out-dir", tmp_path, "--canonical-only"], capsys)
    assert code == 0
    golden = "Q1, s1, A, A, e1, s2, B, e2 |- Q2 * (s1 * (A * (e1 * (s2 * (B * e2)))))"
    assert (tmp_path / "goals.txt").read_text() == golden + "\n"
    t = parse_theory((tmp_path / "theory.txt").read_text())
    assert len(t) == 25
    assert run(["encode", DATA / "intro.lcs", "q1 : x ;", "q2 : ;"], capsys)[0] == 2


def test_xcheck_random_and_mutant(tmp_path, capsys):
    code, out, _ = run(["xcheck", "--random", 8, "--seed", 5, "--plot", tmp_path], capsys)
    assert code == 0 and fields(out)["disagreements"] == "0"
    assert (tmp_path / "xcheck_times.png").exists()
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "r.lcs").write_text("states: p q\nchannels: c\nalphabet: a\np c a ? q\n"
                                  "from: p : a\nto: q :\nsaturate: yes\n")
    code, out, _ = run(["xcheck", "--corpus", corpus], capsys)
    assert code == 0
    code, out, _ = run(["xcheck", "--corpus", corpus, "--mutate"], capsys)
    assert code == 1 and fields(out)["disagreements"] == "1"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "flwlab.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
