import json
from importlib import resources

import pytest

from ptast import certificate as cert
from ptast.cli import main


def corpus_file(name: str) -> str:
    return str(resources.files("ptast.corpus") / f"{name}.ptrs")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_prove_direct(capsys):
    code, out, _ = run(capsys, "prove", corpus_file("rw"), "--method", "direct")
    assert code == 0 and "AST proved" in out


def test_prove_dp(capsys):
    code, out, _ = run(capsys, "prove", corpus_file("pdiv"), "--method", "dp")
    assert code == 0 and out.rstrip().endswith("iAST proved")


def test_prove_unknown(capsys):
    code, out, _ = run(capsys, "prove", corpus_file("bogo"))
    assert code == 2 and "unknown" in out


def test_both_falls_back_to_direct(capsys):
    code, out, _ = run(capsys, "prove", corpus_file("incompl"), "--coeff-bound", "4")
    assert code == 0
    assert "[dp] iAST: unknown" in out and "[direct] AST: proved" in out


def test_json_certificate_replays(capsys):
    code, out, _ = run(capsys, "prove", corpus_file("loop"), "--json")
    assert code == 0
    data = json.loads(out)
    assert data["verdict"] == "Proved" and data["method"] == "dp"
    assert cert.replay(data).ok
    _, again, _ = run(capsys, "prove", corpus_file("loop"), "--json")
    assert again == out


def test_input_errors(capsys, tmp_path):
    bad = tmp_path / "bad.ptrs"
    bad.write_text("(VAR x)\n(RULES\n  f(x) -> {1/2 : x}\n)\n")
    code, _, err = run(capsys, "prove", str(bad))
    assert code == 1 and "bad.ptrs:3:" in err
    code, _, err = run(capsys, "prove", str(tmp_path / "missing.ptrs"))
    assert code == 1
    code, _, err = run(capsys, "simulate", corpus_file("rw"), "--term", "g(", "--depth", "2", "--exact")
    assert code == 1 and "start term" in err


def test_simulate_exact(capsys):
    code, out, _ = run(capsys, "simulate", corpus_file("rw"), "--term", "g(0)", "--depth", "3", "--exact")
    assert code == 0
    assert out.splitlines()[-1] == "3  5/8"
    _, out, _ = run(capsys, "simulate", corpus_file("rw"), "--term", "0", "--depth", "2", "--exact")
    assert [l.split()[1] for l in out.splitlines()[1:]] == ["1", "1", "1"]


def test_simulate_mc(capsys):
    code, out, _ = run(capsys, "simulate", corpus_file("rw"), "--term", "g(0)", "--depth", "1000",
                       "--mc", "--samples", "500", "--seed", "7")
    assert code == 0
    assert "samples=500" in out and "seed=7" in out
    assert 0.8 < float(out.split()[0]) <= 1


def test_simulate_resource_error(capsys):
    code, _, err = run(capsys, "simulate", corpus_file("r2"), "--term", "g", "--depth", "30",
                       "--exact", "--size-limit", "100")
    assert code == 3 and "resource error" in err


def test_analyze(capsys, tmp_path):
    dot = tmp_path / "g.dot"
    smt = tmp_path / "smt"
    code, out, _ = run(capsys, "analyze", corpus_file("pdiv"), "--dot", str(dot), "--emit-smt", str(smt))
    assert code == 0
    assert sum(l.startswith("(") for l in out.splitlines()) == 4
    assert "dependency pairs" not in out
    assert dot.read_text().startswith("digraph")
    files = sorted(p.name for p in smt.iterdir())
    assert files and files[0] == "pdiv-rpp-01.smt2"
    assert "(set-logic QF_NIA)" in (smt / files[0]).read_text()


def test_analyze_deterministic(capsys):
    _, out, _ = run(capsys, "analyze", corpus_file("div"))
    pairs = out.split("dependency pairs:\n")[1].splitlines()
    assert len(pairs) == 3


def test_analyze_empty(capsys, tmp_path):
    empty = tmp_path / "empty.ptrs"
    empty.write_text("(VAR)\n(RULES\n)\n")
    _, out, _ = run(capsys, "analyze", str(empty))
    assert out == "dependency tuples:\ndependency pairs:\n"


def test_bad_options_exit_through_argparse():
    with pytest.raises(SystemExit):
        main(["prove"])
