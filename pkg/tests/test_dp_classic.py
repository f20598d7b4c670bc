from ptast import corpus
from ptast import dp_classic as dc
from ptast.poly import interpretation_from_strings
from ptast.ptrs import np, parse_ptrs
from ptast.terms import App


def symbols_in(problem):
    terms = [t for p in problem.pairs for t in (p.lhs, p.rhs)]
    terms += [t for r in problem.rules for t in (r.lhs, r.rhs)]
    return {u.symbol for t in terms for u in t.subterms() if isinstance(u, App)}


def test_div_pairs():
    pairs = dc.dependency_pairs(corpus.load("div"))
    assert [f"({p.name}) {p}" for p in pairs] == [
        "(1) MINUS(s(x),s(y)) -> MINUS(x,y)",
        "(2) DIV(s(x),s(y)) -> DIV(minus(x,y),s(y))",
        "(3) DIV(s(x),s(y)) -> MINUS(x,y)",
    ]
    assert [p.origin for p in pairs] == [(1, ()), (3, (1,)), (3, (1, 1))]


def test_div_graph_and_sccs():
    problem = dc.initial_problem(corpus.load("div"))
    edges = dc.estimate_dep_graph(problem.pairs, problem.rules)
    assert sorted(edges) == [(0, 0), (1, 1), (1, 2), (2, 0)]
    assert [s.pair_names() for s in dc.scc_processor(problem)] == [["1"], ["2"]]
    dot = dc.dep_graph_dot(problem)
    assert dot.startswith("digraph") and '"2" -> "3"' in dot


def test_concrete_chain_is_an_edge():
    # D(s(x),s(y)) -> D(minus(x,y),s(y)) reaches itself for x = s(0), y = 0
    problem = dc.initial_problem(corpus.load("div"))
    d = problem.pairs[1]
    assert dc.may_reach(d.rhs, d.lhs, d.lhs, [r.lhs for r in problem.rules])


def test_usable_rules():
    problem = dc.initial_problem(corpus.load("div"))
    minus_scc, div_scc = dc.scc_processor(problem)
    assert dc.usable_rules(minus_scc) == []
    assert [str(r) for r in dc.usable_rules(div_scc)] == ["minus(x,0) -> x", "minus(s(x),s(y)) -> minus(x,y)"]


def test_reduction_pair_on_div():
    problem = dc.initial_problem(corpus.load("div"))
    _, div_scc = dc.scc_processor(problem)
    div_scc = dc.ClassicProblem(div_scc.pairs, tuple(dc.usable_rules(div_scc)))
    result = dc.reduction_pair_processor(div_scc)
    assert result is not None and result.strict == ["2"]
    assert dc.check_classic_rpp(div_scc, result.interpretation, result.strict).ok
    bad = interpretation_from_strings({"DIV": "x1", "minus": "x1 + x2", "s": "x1 + 1", "0": "0"},
                                      symbols_in(div_scc))
    assert not dc.check_classic_rpp(div_scc, bad, ["2"]).ok


def test_prove_iterm():
    assert dc.prove_iterm(corpus.load("minus")).proved
    assert dc.prove_iterm([]).proved
    loop = dc.prove_iterm(np(parse_ptrs("(VAR x)\n(RULES\n  f(x) -> {1 : f(s(x))}\n)\n")))
    assert not loop.proved
    assert loop.proof.frontier()


def test_cycles_helper():
    assert dc.cycles(3, [(0, 1), (1, 0), (2, 2)]) == [[0, 1], [2]]
    assert dc.cycles(2, [(0, 1)]) == []
