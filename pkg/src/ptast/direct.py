"""Direct termination proofs with monotone polynomial interpretations.

Two criteria are implemented: classic termination of nonprobabilistic rules
(every rule strictly decreasing) and AST of a PTRS (every rule has a
strictly decreasing branch and weakly decreases in expectation).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ptast.poly import (
    LINEAR,
    MULTILINEAR,
    ConstraintSet,
    Interpretation,
    expected_poly,
    geq_constraint,
    gt_constraint,
    interpret,
    is_monotone,
    is_multilinear,
    template,
)
from ptast.ptrs import PTRS, ProbRule, Rule
from ptast.solver import solve_bounded
from ptast.terms import App, Kind, Symbol, Term


def degrees_for(mode: str) -> list[str]:
    """Template shapes tried for a degree mode; multilinear tries linear first."""
    if mode == LINEAR:
        return [LINEAR]
    if mode == MULTILINEAR:
        return [LINEAR, MULTILINEAR]
    raise ValueError(f"unknown degree mode {mode!r}")


_KIND_ORDER = {Kind.TUPLE: 0, Kind.DEFINED: 1, Kind.CONSTRUCTOR: 2, Kind.COMPOUND: 3}


def symbols_of(terms: Iterable[Term]) -> list[Symbol]:
    """Symbols in the order their unknowns are created and searched.

    Tuple, then defined, then constructor symbols; within a kind the most
    frequent first. The order only affects search speed and which of several
    models is reported.
    """
    counts: Counter[Symbol] = Counter()
    for t in terms:
        counts.update(s.symbol for s in t.subterms() if isinstance(s, App))
    return sorted(counts, key=lambda f: (_KIND_ORDER[f.kind], -counts[f], f.name, f.arity))


def template_interpretation(
    symbols: Sequence[Symbol], cs: ConstraintSet, degree: str, monotone: bool
) -> Interpretation:
    polys = {}
    for f in symbols:
        if f.is_compound:
            continue
        polys[f] = template(f, cs.unknowns, degree, monotone)
    return Interpretation(polys)


@dataclass
class DirectProof:
    """A found interpretation plus, per rule, the index of a strict branch."""

    criterion: str
    interpretation: Interpretation
    strict_branches: list[int] = field(default_factory=list)
    degree: str = LINEAR
    coeff_bound: int = 2


@dataclass
class CheckReport:
    ok: bool
    problems: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# AST of a PTRS

def ast_constraints(
    system: PTRS, degree: str = LINEAR
) -> tuple[ConstraintSet, Interpretation]:
    cs = ConstraintSet(source=f"{system.name or 'system'}: direct AST criterion ({degree})")
    symbols = symbols_of([r.lhs for r in system] + [t for r in system for t in r.rhs.support])
    interp = template_interpretation(symbols, cs, degree, monotone=True)
    for i, rule in enumerate(system.rules, 1):
        lhs = interpret(rule.lhs, interp)
        cs.add(geq_constraint(lhs, expected_poly(rule.rhs, interp), f"rule {i} expected"))
        alts = [
            [gt_constraint(lhs, interpret(r, interp), f"rule {i} branch {j}")]
            for j, (_, r) in enumerate(rule.rhs, 1)
        ]
        cs.add_group(alts, f"rule {i}: some branch strictly decreasing")
    return cs, interp


def prove_ast_direct(
    system: PTRS,
    coeff_bound: int = 2,
    degree: str = LINEAR,
    budget: int | None = None,
    deadline: float | None = None,
) -> DirectProof | None:
    """Search a monotone multilinear interpretation proving AST.

    Returns None when no interpretation exists within the bound: this means
    "unknown", not "not AST".
    """
    for shape in degrees_for(degree):
        cs, interp = ast_constraints(system, shape)
        model = solve_bounded(cs, coeff_bound, budget, deadline)
        if model is None:
            continue
        concrete = interp.instantiate(model)
        report = check_ast_direct(system, concrete)
        if not report:  # pragma: no cover - would be a solver bug
            raise AssertionError("; ".join(report.problems))
        return DirectProof("AST", concrete, strict_branch_indices(system, concrete), shape, coeff_bound)
    return None


def strict_branch_indices(system: PTRS, interp: Interpretation) -> list[int]:
    out = []
    for rule in system.rules:
        lhs = interpret(rule.lhs, interp)
        js = [j for j, (_, r) in enumerate(rule.rhs, 1) if gt_constraint(lhs, interpret(r, interp)).holds()]
        out.append(js[0] if js else 0)
    return out


def _check_symbols(interp: Interpretation, symbols: Iterable[Symbol], monotone: bool) -> list[str]:
    problems = []
    for f in symbols:
        if f.is_compound:
            continue
        if f not in interp:
            problems.append(f"symbol {f} is not interpreted")
            continue
        p = interp[f]
        if any(c < 0 for c in p.terms.values()) or p.unknowns():
            problems.append(f"{f}: coefficients must be natural numbers")
        if not is_multilinear(p):
            problems.append(f"{f}: interpretation is not multilinear")
        if monotone and not is_monotone(p, f.arity):
            problems.append(f"{f}: interpretation is not monotone")
    return problems


def check_ast_direct(system: PTRS, interp: Interpretation) -> CheckReport:
    """Independent check of the AST criterion for a concrete interpretation.

    Reports every symbol or rule that violates a condition.
    """
    symbols = symbols_of([r.lhs for r in system] + [t for r in system for t in r.rhs.support])
    problems = _check_symbols(interp, symbols, monotone=True)
    if problems:
        return CheckReport(False, problems)
    for i, rule in enumerate(system.rules, 1):
        lhs = interpret(rule.lhs, interp)
        rhs = [interpret(r, interp) for r in rule.rhs.support]
        if not any(gt_constraint(lhs, q).holds() for q in rhs):
            problems.append(f"rule {i} ({rule}): no branch is strictly decreasing")
        exp = expected_poly(rule.rhs, interp)
        if not geq_constraint(lhs, exp).holds():
            problems.append(f"rule {i} ({rule}): expected value {exp} exceeds {lhs}")
    return CheckReport(not problems, problems)


# ---------------------------------------------------------------------------
# classic termination

def termination_constraints(
    rules: Sequence[Rule], degree: str = LINEAR
) -> tuple[ConstraintSet, Interpretation]:
    cs = ConstraintSet(source=f"classic termination ({degree})")
    symbols = symbols_of([r.lhs for r in rules] + [r.rhs for r in rules])
    interp = template_interpretation(symbols, cs, degree, monotone=True)
    for i, r in enumerate(rules, 1):
        cs.add(gt_constraint(interpret(r.lhs, interp), interpret(r.rhs, interp), f"rule {i}"))
    return cs, interp


def check_terminating_classic(rules: Sequence[Rule], interp: Interpretation) -> CheckReport:
    symbols = symbols_of([r.lhs for r in rules] + [r.rhs for r in rules])
    problems = _check_symbols(interp, symbols, monotone=True)
    for i, r in enumerate(rules, 1):
        if not problems and not gt_constraint(interpret(r.lhs, interp), interpret(r.rhs, interp)).holds():
            problems.append(f"rule {i} ({r}) is not strictly decreasing")
    return CheckReport(not problems, problems)


def as_rules(rules: PTRS | Iterable[Rule | ProbRule]) -> list[Rule]:
    out = []
    for r in rules:
        if isinstance(r, ProbRule):
            if not r.is_deterministic:
                raise ValueError(f"rule {r} is probabilistic")
            out.append(Rule(r.lhs, r.rhs.support[0]))
        else:
            out.append(r)
    return out


def prove_terminating_classic(
    rules: PTRS | Iterable[Rule | ProbRule],
    coeff_bound: int = 2,
    degree: str = LINEAR,
    budget: int | None = None,
    deadline: float | None = None,
) -> DirectProof | None:
    rules = as_rules(rules)
    for shape in degrees_for(degree):
        cs, interp = termination_constraints(rules, shape)
        model = solve_bounded(cs, coeff_bound, budget, deadline)
        if model is None:
            continue
        concrete = interp.instantiate(model)
        if not check_terminating_classic(rules, concrete):  # pragma: no cover
            raise AssertionError("classic certificate failed re-validation")
        return DirectProof("termination", concrete, [1] * len(rules), shape, coeff_bound)
    return None
