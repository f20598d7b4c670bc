import pytest

from ptast import corpus
from ptast import dp_prob as dpp
from ptast.proof import PROVED, UNKNOWN

VERDICTS = {
    "aloop": UNKNOWN, "bogo": UNKNOWN, "div": PROVED, "incompl": UNKNOWN,
    "loop": PROVED, "minus": PROVED, "pdiv": PROVED, "r1": PROVED, "r1p": PROVED,
    "r2": UNKNOWN, "r2p": PROVED, "r3": UNKNOWN, "rw": PROVED, "triple": PROVED,
    "walk2": UNKNOWN,
}


@pytest.mark.parametrize("name", sorted(VERDICTS))
def test_corpus_verdicts(name):
    verdict = dpp.prove_iast(corpus.load(name))
    assert verdict.status == VERDICTS[name]
    assert verdict.property == "iAST"
    assert verdict.proof.solved == verdict.proved


def test_qs_needs_products():
    system = corpus.load("qs")
    problem = dpp.initial_problem(system)
    assert [s.names() for s in dpp.prob_scc_processor(problem)] == [
        ["2"], ["4", "5"], ["7", "8", "9"], ["11", "12", "13"], ["16"], ["18"]]


def test_bogo_open_problem_is_reported():
    verdict = dpp.prove_iast(corpus.load("bogo"))
    assert verdict.note == "1 open problem"
    assert len(verdict.proof.frontier()) == 1


def test_usable_rules_of_pdiv():
    system = corpus.load("pdiv")
    problem = dpp.initial_problem(system)
    minus_scc, div_scc = dpp.prob_scc_processor(problem)
    assert dpp.prob_usable_rules(minus_scc) == []
    assert [system.index(r) for r in dpp.prob_usable_rules(div_scc)] == [0, 1]


def test_probability_removal_deduplicates_pairs():
    problem = dpp.prob_usable_rules_processor(dpp.initial_problem(corpus.load("triple")))
    assert dpp.removal_applicable(problem)
    pairs = dpp.np_problem(problem).pairs
    assert [(p.name, str(p)) for p in pairs] == [("1", "G(s(x)) -> G(x)")]


def test_removal_needs_trivial_distributions():
    assert not dpp.removal_applicable(dpp.initial_problem(corpus.load("rw")))


def test_prob_rpp_on_rw():
    problem = dpp.initial_problem(corpus.load("rw"))
    result = dpp.prob_reduction_pair_processor(problem)
    assert result is not None and result.strict == ["1"]
    assert dpp.check_prob_rpp(problem, result.interpretation, result.strict).ok
    assert not dpp.check_prob_rpp(problem, result.interpretation, []).ok


def test_timeout_gives_unknown():
    verdict = dpp.prove_iast(corpus.load("qs"), degree="multilinear", timeout=0.001)
    assert verdict.status == UNKNOWN


def test_dot_export():
    dot = dpp.prob_dep_graph_dot(dpp.initial_problem(corpus.load("pdiv")))
    edges = [l.strip() for l in dot.splitlines() if l.strip().startswith('"') and "[" not in l]
    assert dot.startswith("digraph")
    assert edges == ['"2" -> "1";', '"2" -> "2";', '"4" -> "1";', '"4" -> "2";', '"4" -> "3";', '"4" -> "4";']


def test_usable_terms_on_walk2():
    (scc,) = dpp.prob_scc_processor(dpp.initial_problem(corpus.load("walk2")))
    after = dpp.usable_terms_processor(scc)
    (dt,) = after.P
    assert dt.name == "1'"
    # G(x) goes; G(g(g(x))) stays because ruling it out needs a parity argument
    assert str(dt.rhs[0][1][0]) == "c3(G(g(g(g(x)))),G(g(g(x))),G(g(x)))"
    assert dpp.usable_terms_processor(after).P == after.P


@pytest.mark.parametrize("name", sorted(VERDICTS))
def test_usable_terms_only_shrink(name):
    from collections import Counter
    from ptast.compound import cont
    problem = dpp.initial_problem(corpus.load(name))
    for scc in dpp.prob_scc_processor(problem):
        after = dpp.usable_terms_processor(scc)
        for old, new in zip(scc.P, after.P):
            for (_, (d0, _)), (_, (d1, _)) in zip(old.rhs, new.rhs):
                assert not Counter(cont(d1)) - Counter(cont(d0))
