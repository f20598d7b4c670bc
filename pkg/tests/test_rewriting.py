from fractions import Fraction

import pytest

from ptast import corpus
from ptast.compound import dtuples, make_compound
from ptast.ptrs import parse_ptrs, parse_term
from ptast.rewriting import (
    KEEP,
    ChainStepError,
    DistributionLimitError,
    Redex,
    RewriteAt,
    chain_leaf_mass,
    greedy_policy,
    innermost_redexes,
    lift,
    lift_exact,
    mc_estimate,
    pptrs_step,
    s_step,
    step,
)
from ptast.terms import apply

PAIRS = """(VAR x)
(RULES
  p(x) -> {1 : c(x,x)}
  a -> {1/2 : b, 1/2 : e}
)
"""


def test_innermost_redexes_skip_non_innermost():
    system = corpus.load("pdiv")
    t = parse_term("div(minus(s(0),0),s(0))", system)
    rs = innermost_redexes(t, system)
    assert [(r.position, r.rule_index) for r in rs] == [((1,), 0)]


def test_step_rewrites_in_place():
    system = corpus.load("pdiv")
    t = parse_term("s(div(s(0),s(0)))", system)
    (d,) = innermost_redexes(t, system)
    mu = step(t, d, system)
    assert [str(u) for u in mu.support] == [
        "s(div(s(0),s(0)))",
        "s(s(div(minus(0,0),s(0))))",
    ]


def test_step_rejects_bad_redexes():
    system = corpus.load("pdiv")
    t = parse_term("div(minus(s(0),0),s(0))", system)
    with pytest.raises(ValueError):
        step(t, Redex((), 3, {}), system)
    with pytest.raises(ValueError):
        step(t, Redex((), 9, {}), system)


def test_lift_of_normal_form_is_constant():
    system = corpus.load("rw")
    assert lift_exact(parse_term("0", system), system, 4) == [1] * 5


def test_lift_strategies_agree_on_rw():
    system = corpus.load("rw")
    t = parse_term("g(g(0))", system)
    assert lift_exact(t, system, 8) == lift_exact(t, system, 8, strategy="rightmost")
    with pytest.raises(ValueError):
        next(lift(t, system, strategy="outermost"))


def test_lift_counts_copies():
    # a appears twice; both copies are rewritten one at a time
    system = parse_ptrs(PAIRS)
    t = parse_term("c(a,a)", system)
    masses = lift_exact(t, system, 2)
    assert masses == [0, 0, 1]


def test_size_limit():
    system = corpus.load("r2")
    with pytest.raises(DistributionLimitError):
        lift_exact(parse_term("g", system), system, 30, size_limit=50)


def test_mc_is_seeded():
    system = corpus.load("rw")
    t = parse_term("g(0)", system)
    assert mc_estimate(t, system, 50, 300, 5) == mc_estimate(t, system, 50, 300, 5)
    assert mc_estimate(parse_term("0", system), system, 10, 10, 0) == 1.0
    with pytest.raises(ValueError):
        mc_estimate(t, system, 10, 0, 0)


def _rw_setup():
    system = corpus.load("rw")
    (dt,) = dtuples(system)
    zero = parse_term("0", system)
    return system, dt, zero


def test_chain_steps_on_rw():
    system, dt, zero = _rw_setup()
    a = make_compound([apply(dt.lhs_sharp, {"x": zero})])
    mu = pptrs_step(a, 1, dt, {"x": zero}, {}, [dt], system)
    assert [str(t) for t in mu.support] == ["c0", "c2(G(g(0)),G(0))"]
    with pytest.raises(ChainStepError):
        pptrs_step(a, 2, dt, {"x": zero}, {}, [dt], system)
    with pytest.raises(ChainStepError):
        pptrs_step(make_compound([a]), 1, dt, {"x": zero}, {}, [dt], system)


def test_s_step_mirrors_copies():
    system, dt, zero = _rw_setup()
    gz = apply(dt.lhs_sharp, {"x": apply(dt.lhs, {"x": zero})})
    a = make_compound([gz, gz])
    rule = system.rules[0]
    mu = s_step(a, 1, (1,), rule, {2: RewriteAt((1,))}, system)
    assert [str(t) for t in mu.support] == ["c2(G(0),G(0))", "c2(G(g(g(0))),G(g(g(0))))"]
    kept = s_step(a, 1, (1,), rule, {2: KEEP}, system)
    assert str(kept.support[0]) == "c2(G(0),G(g(0)))"
    with pytest.raises(ChainStepError):
        s_step(a, 1, (1,), rule, {2: RewriteAt((2,))}, system)


def test_chain_leaf_mass_on_rw():
    system, dt, zero = _rw_setup()
    root = make_compound([apply(dt.lhs_sharp, {"x": zero})])
    assert chain_leaf_mass([dt], system, root, greedy_policy(), 0) == 0
    assert chain_leaf_mass([dt], system, root, greedy_policy(), 1) == Fraction(1, 2)


def _r3():
    system = corpus.load("r3")
    return system, dtuples(system)


def test_tuple_step_mirrors_into_other_arguments():
    system, P = _r3()
    a_dt = P[1]
    start = make_compound([parse_term("F(a)", system), a_dt.lhs_sharp])
    both = pptrs_step(start, 2, a_dt, {}, {1: RewriteAt((1,))}, P, system)
    assert [(str(p), str(t)) for p, t in both] == [("1/2", "c2(F(b1),B1)"), ("1/2", "c2(F(b2),B2)")]
    kept = pptrs_step(start, 2, a_dt, {}, {1: KEEP}, P, system)
    assert [str(t) for t in kept.support] == ["c2(F(a),B1)", "c2(F(a),B2)"]
    without = system.subset(r for r in system if str(r.lhs) != "a")
    with pytest.raises(ChainStepError):
        pptrs_step(start, 2, a_dt, {}, {1: RewriteAt((1,))}, P, without)


def test_s_step_both_outcomes():
    system, _ = _r3()
    start = make_compound([parse_term("f(a)", system), parse_term("a", system)])
    rule = system.rules[1]
    both = s_step(start, 2, (), rule, {1: RewriteAt((1,))}, system)
    assert [str(t) for t in both.support] == ["c2(f(b1),b1)", "c2(f(b2),b2)"]
    kept = s_step(start, 2, (), rule, {}, system)
    assert [str(t) for t in kept.support] == ["c2(f(a),b1)", "c2(f(a),b2)"]
    det = s_step(make_compound([parse_term("b1", system)]), 1, (), system.rules[2], {}, system)
    assert len(det) == 1


def test_empty_p_makes_every_root_a_leaf():
    system, P = _r3()
    root = make_compound([parse_term("F(0)", system)])
    assert chain_leaf_mass([], parse_ptrs("(VAR)\n(RULES\n)\n"), root, greedy_policy(), 0) == 1


def test_lift_masses_are_monotone():
    for name, start, depth in [("rw", "g(g(0))", 15), ("pdiv", "div(s(s(0)),s(0))", 15), ("r1", "g", 9)]:
        system = corpus.load(name)
        masses = lift_exact(parse_term(start, system), system, depth)
        assert all(0 <= a <= b <= 1 for a, b in zip(masses, masses[1:]))


def test_mc_against_exact_lifting():
    system = corpus.load("rw")
    t = parse_term("g(0)", system)
    horizon = 200
    exact = float(lift_exact(t, system, horizon)[-1])
    samples = 4000
    est = mc_estimate(t, system, horizon, samples, 7)
    se = (exact * (1 - exact) / samples) ** 0.5
    assert abs(est - exact) < 0.03
    assert est >= exact - 3 * se
