import random
from fractions import Fraction

import pytest

from ptast import corpus
from ptast.direct import ast_constraints
from ptast.poly import ConstraintSet, Poly, geq_constraint, gt_constraint
from ptast.solver import SolverBudgetExceeded, check_model, node_budget, smt_export, solve, solve_bounded

X = Poly.var("x")

z3 = pytest.importorskip("z3")


def z3_sat(script: str) -> bool:
    body = "\n".join(l for l in script.splitlines()
                     if not l.startswith(("(check-sat", "(get-model", "(set-logic")))
    s = z3.Solver()
    s.from_string(body)
    return s.check() == z3.sat


def test_trivial_sets():
    cs = ConstraintSet()
    cs.add(gt_constraint(X, X))
    assert solve_bounded(cs, 5) is None
    assert solve_bounded(ConstraintSet(), 2) == {}


def test_lexicographically_least_model():
    cs = ConstraintSet()
    a, b = cs.unknowns.new("a"), cs.unknowns.new("b")
    cs.add(geq_constraint(a + b, Poly.const(3)))
    assert solve_bounded(cs, 3) == {0: 0, 1: 3}
    cs.add(geq_constraint(a * b, Poly.const(2)))
    assert solve_bounded(cs, 3) == {0: 1, 1: 2}


def _single(atom, like):
    cs = ConstraintSet(like.unknowns)
    cs.add(atom)
    return cs


def test_groups_need_one_alternative():
    cs = ConstraintSet()
    a = cs.unknowns.new("a")
    # a*x > x alone is unsatisfiable: the constant part must grow by 1
    assert solve_bounded(_single(gt_constraint(a * X, X), cs), 3) is None
    cs.add_group([[gt_constraint(Poly.const(0), a)], [gt_constraint(a * X + a, X + 1)]])
    model = solve_bounded(cs, 3)
    assert model == {0: 2}
    assert check_model(cs, model)
    assert not check_model(cs, {0: 1})


def test_budget_and_environment(monkeypatch):
    cs, _ = ast_constraints(corpus.load("pdiv"))
    with pytest.raises(SolverBudgetExceeded):
        solve(cs, 3, budget=3)
    monkeypatch.setenv("PTAST_NODE_BUDGET", "42")
    assert node_budget() == 42
    assert node_budget(7) == 7


def test_bound_must_be_positive():
    with pytest.raises(ValueError):
        solve(ConstraintSet(), 0)


def test_smt_export_shape():
    cs = ConstraintSet(source="demo")
    cs.add(geq_constraint(X + 1, X))
    text = smt_export(cs)
    assert "(set-logic QF_NIA)" in text and "(assert (>= 1 0))" in text
    assert text.rstrip().endswith("(check-sat)\n(get-model)")
    assert smt_export(cs) == text
    assert "(check-sat)" in smt_export(ConstraintSet())


def test_smt_export_rw_is_sat():
    cs, _ = ast_constraints(corpus.load("rw"))
    assert z3_sat(smt_export(cs, 2))


def _random_set(rng: random.Random) -> ConstraintSet:
    cs = ConstraintSet(source="random")
    us = [cs.unknowns.new(f"u{i}", rng.choice([0, 0, 1])) for i in range(3)]

    def side():
        p = Poly()
        for mono in (Poly.const(1), X, X * Poly.var("y")):
            c = Poly.const(Fraction(rng.randint(0, 3), rng.choice([1, 2])))
            r = rng.random()
            if r < 0.5:
                c = c * rng.choice(us)
            elif r < 0.7:
                c = c * rng.choice(us) * rng.choice(us)
            p = p + c * mono
        return p

    for _ in range(rng.randint(1, 3)):
        cs.add(rng.choice([geq_constraint, gt_constraint])(side(), side()))
    if rng.random() < 0.5:
        cs.add_group([[gt_constraint(side(), side())], [gt_constraint(side(), side())]])
    return cs


def test_agrees_with_z3():
    rng = random.Random(21)
    for _ in range(150):
        cs = _random_set(rng)
        ours = solve_bounded(cs, 3)
        assert (ours is not None) == z3_sat(smt_export(cs, 3))
        if ours is not None:
            assert check_model(cs, ours)
