"""The probabilistic dependency pair framework for innermost AST."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from ptast.compound import CoupledDT, cont, dtuples, make_compound
from ptast.direct import CheckReport, _check_symbols, degrees_for, symbols_of, template_interpretation
from ptast.dp_classic import (
    ClassicProblem,
    DependencyPair,
    Settings,
    cycles,
    graph_dot,
    interpretation_params,
    may_reach,
    solve_classic,
    unsolved,
    usable_rules_of,
)
from ptast.poly import (
    LINEAR,
    ConstraintSet,
    Interpretation,
    expected_poly,
    geq_constraint,
    gt_constraint,
    interpret,
)
from ptast.proof import PROVED, UNKNOWN, ProofNode, Verdict
from ptast.ptrs import PTRS, ProbRule, Rule, np
from ptast.solver import SolverBudgetExceeded, solve_bounded
from ptast.terms import Term


@dataclass(frozen=True)
class ProbProblem:
    """A probabilistic DP problem (P, S); S keeps the rule order of the system."""

    P: tuple[CoupledDT, ...]
    S: tuple[ProbRule, ...]

    def fingerprint(self) -> str:
        ps = "; ".join(f"({dt.name}) {dt}" for dt in self.P)
        ss = "; ".join(str(r) for r in self.S)
        return f"P = {{{ps}}}, S = {{{ss}}}"

    def names(self) -> list[str]:
        return [dt.name for dt in self.P]

    @property
    def lhss(self) -> list[Term]:
        return [r.lhs for r in self.S]

    def with_P(self, P: Iterable[CoupledDT]) -> ProbProblem:
        return ProbProblem(tuple(P), self.S)


def initial_problem(system: PTRS, labels: dict[str, str] | None = None) -> ProbProblem:
    """(DT(R), R)."""
    return ProbProblem(tuple(dtuples(system, labels)), tuple(system.rules))


def _reaches(t: Term, source: CoupledDT, problem: ProbProblem) -> list[int]:
    lhss = problem.lhss
    return [j for j, dt in enumerate(problem.P) if may_reach(t, source.lhs_sharp, dt.lhs_sharp, lhss)]


def prob_dep_graph(problem: ProbProblem) -> set[tuple[int, int]]:
    """Edges between DT indices, estimated with icap w.r.t. np(S)."""
    lhss = problem.lhss
    edges = set()
    for i, dt in enumerate(problem.P):
        targets = {t for d, _ in dt.rhs.support for t in cont(d)}
        for j, other in enumerate(problem.P):
            if any(may_reach(t, dt.lhs_sharp, other.lhs_sharp, lhss) for t in targets):
                edges.add((i, j))
    return edges


def prob_dep_graph_dot(problem: ProbProblem) -> str:
    return graph_dot(problem.names(), [str(dt) for dt in problem.P], prob_dep_graph(problem),
                     "prob_dependency_graph")


def prob_scc_processor(problem: ProbProblem) -> list[ProbProblem]:
    comps = cycles(len(problem.P), prob_dep_graph(problem))
    return [problem.with_P(problem.P[i] for i in comp) for comp in comps]


def usable_terms_processor(problem: ProbProblem) -> ProbProblem:
    """Drop the tuple terms of right-hand sides that cannot reach any DT.

    A changed DT keeps its name with a prime appended.
    """
    out = []
    for dt in problem.P:
        ds = []
        for d, _ in dt.rhs.support:
            ds.append(make_compound(t for t in cont(d) if _reaches(t, dt, problem)))
        new = dt.with_tuples(ds)
        if new != dt:
            new = CoupledDT(new.lhs_sharp, new.lhs, new.rhs, dt.name + "'")
        out.append(new)
    return problem.with_P(out)


def prob_usable_rules(problem: ProbProblem) -> list[ProbRule]:
    """U(P, S): least fixpoint over all terms in the supports, in rule order."""
    det = [Rule(r.lhs, t) for r in problem.S for t in r.rhs.support]
    owner = [i for i, r in enumerate(problem.S) for _ in r.rhs.support]
    used = usable_rules_of([d for dt in problem.P for d, _ in dt.rhs.support], det)
    keep = {owner[det.index(r)] for r in used}
    return [r for i, r in enumerate(problem.S) if i in keep]


def prob_usable_rules_processor(problem: ProbProblem) -> ProbProblem:
    return ProbProblem(problem.P, tuple(prob_usable_rules(problem)))


# ---------------------------------------------------------------------------
# probability removal

def removal_applicable(problem: ProbProblem) -> bool:
    return all(dt.is_deterministic for dt in problem.P) and all(r.is_deterministic for r in problem.S)


def np_problem(problem: ProbProblem) -> ClassicProblem:
    """(np(P), np(S)) for a problem without probabilistic choices."""
    if not removal_applicable(problem):
        raise ValueError("probability removal needs trivial probabilities everywhere")
    pairs: dict[DependencyPair, None] = {}
    for dt in problem.P:
        (d, _), = dt.rhs.support
        ts = list(dict.fromkeys(cont(d)))  # np(P) is a set
        for k, t in enumerate(ts, 1):
            name = dt.name if len(ts) == 1 else f"{dt.name}.{k}"
            pairs.setdefault(DependencyPair(dt.lhs_sharp, t, name), None)
    return ClassicProblem(tuple(pairs), tuple(np(problem.S)))


def probability_removal_processor(problem: ProbProblem, settings: Settings | None = None) -> ProofNode | None:
    """Delegate to the classic framework; None when not applicable."""
    if not removal_applicable(problem):
        return None
    classic = np_problem(problem)
    return solve_classic(classic, settings or Settings())


# ---------------------------------------------------------------------------
# reduction pairs

def _rpp_terms(problem: ProbProblem) -> list[Term]:
    terms = [t for r in problem.S for t in (r.lhs, *r.rhs.support)]
    for dt in problem.P:
        terms += [dt.lhs_sharp, dt.lhs]
        for d, r in dt.rhs.support:
            terms += [d, r]
    return terms


def prob_rpp_constraints(problem: ProbProblem, degree: str = LINEAR) -> tuple[ConstraintSet, Interpretation]:
    cs = ConstraintSet(source=f"probabilistic reduction pair ({degree}) on {{{','.join(problem.names())}}}")
    interp = template_interpretation(symbols_of(_rpp_terms(problem)), cs, degree, monotone=False)
    for i, r in enumerate(problem.S, 1):
        cs.add(geq_constraint(interpret(r.lhs, interp), expected_poly(r.rhs, interp), f"(1) rule {r}"))
    alts = []
    S = set(problem.S)
    for dt in problem.P:
        lhs = interpret(dt.lhs_sharp, interp)
        cs.add(geq_constraint(lhs, expected_poly(dt.proj1().rhs, interp), f"(2) DT {dt.name}"))
        in_S = dt.proj2() in S
        for j, (d, r) in enumerate(dt.rhs.support, 1):
            alt = [gt_constraint(lhs, interpret(d, interp), f"(3) DT {dt.name} branch {j}")]
            if in_S:
                alt.append(geq_constraint(interpret(dt.lhs, interp), interpret(r, interp),
                                          f"(3) DT {dt.name} branch {j} rule"))
            alts.append(alt)
    cs.add_group(alts, "(3) some DT strictly decreasing")
    return cs, interp


def strictly_decreasing_dts(problem: ProbProblem, interp: Interpretation) -> list[str]:
    S = set(problem.S)
    out = []
    for dt in problem.P:
        lhs = interpret(dt.lhs_sharp, interp)
        in_S = dt.proj2() in S
        for d, r in dt.rhs.support:
            if not gt_constraint(lhs, interpret(d, interp)).holds():
                continue
            if in_S and not geq_constraint(interpret(dt.lhs, interp), interpret(r, interp)).holds():
                continue
            out.append(dt.name)
            break
    return out


@dataclass
class ProbReductionPairResult:
    interpretation: Interpretation
    strict: list[str]
    remaining: ProbProblem
    degree: str


def prob_reduction_pair_processor(
    problem: ProbProblem,
    coeff_bound: int = 2,
    degree: str = LINEAR,
    budget: int | None = None,
    deadline: float | None = None,
    observer: Callable[[ConstraintSet], None] | None = None,
) -> ProbReductionPairResult | None:
    if not problem.P:
        raise ValueError("reduction pair processor needs at least one DT")
    for shape in degrees_for(degree):
        cs, interp = prob_rpp_constraints(problem, shape)
        if observer is not None:
            observer(cs)
        model = solve_bounded(cs, coeff_bound, budget, deadline)
        if model is None:
            continue
        concrete = interp.instantiate(model)
        strict = strictly_decreasing_dts(problem, concrete)
        rest = problem.with_P(dt for dt in problem.P if dt.name not in strict)
        return ProbReductionPairResult(concrete, strict, rest, shape)
    return None


def check_prob_rpp(problem: ProbProblem, interp: Interpretation, removed: Iterable[str]) -> CheckReport:
    """Re-validate conditions (1)-(3) by evaluating concrete polynomials."""
    removed = set(removed)
    problems = _check_symbols(interp, symbols_of(_rpp_terms(problem)), monotone=False)
    if problems:
        return CheckReport(False, problems)
    if not removed:
        problems.append("no DT is removed")
    for r in problem.S:
        if not geq_constraint(interpret(r.lhs, interp), expected_poly(r.rhs, interp)).holds():
            problems.append(f"(1) rule {r} is not weakly decreasing in expectation")
    strict = set(strictly_decreasing_dts(problem, interp))
    for dt in problem.P:
        if not geq_constraint(interpret(dt.lhs_sharp, interp), expected_poly(dt.proj1().rhs, interp)).holds():
            problems.append(f"(2) DT {dt.name} is not weakly decreasing in expectation")
        if dt.name in removed and dt.name not in strict:
            problems.append(f"(3) DT {dt.name} has no strictly decreasing branch")
    return CheckReport(not problems, problems)


# ---------------------------------------------------------------------------
# driver

def _dt_labels(dts: Sequence[CoupledDT]) -> str:
    return "{" + ",".join(dt.name for dt in dts) + "}"


def solve_prob(problem: ProbProblem, settings: Settings, seen: frozenset[str] = frozenset()) -> ProofNode:
    """Apply SCC, UT, UR, PR and RP in this order until every branch is empty."""
    fp = problem.fingerprint()
    if not problem.P:
        return ProofNode("empty", fp)
    if fp in seen:
        return unsolved(fp, "problem repeats")
    if settings.expired():
        return unsolved(fp, "time limit")
    seen = seen | {fp}

    subs = prob_scc_processor(problem)
    if [s.P for s in subs] != [problem.P]:
        return ProofNode(
            "dependency-graph", fp,
            {"sccs": [s.names() for s in subs],
             "summary": f"{len(subs)} SCC(s): " + " ".join(_dt_labels(s.P) for s in subs)},
            [solve_prob(s, settings, seen) for s in subs],
        )

    ut = usable_terms_processor(problem)
    if ut.P != problem.P:
        changed = [new.name for old, new in zip(problem.P, ut.P) if old != new]
        return ProofNode(
            "usable-terms", fp,
            {"changed": changed, "summary": "shrunk " + ",".join(changed)},
            [solve_prob(ut, settings, seen)],
        )

    used = prob_usable_rules(problem)
    if len(used) < len(problem.S):
        keep = [problem.S.index(r) + 1 for r in used]
        sub = ProbProblem(problem.P, tuple(used))
        return ProofNode(
            "usable-rules", fp,
            {"rules": keep, "summary": f"{len(used)} of {len(problem.S)} rules usable"},
            [solve_prob(sub, settings, seen)],
        )

    if removal_applicable(problem):
        child = solve_classic(np_problem(problem), settings)
        if child.solved:
            return ProofNode("probability-removal", fp,
                             {"summary": "no probabilities left; classic framework"}, [child])

    try:
        res = prob_reduction_pair_processor(problem, settings.coeff_bound, settings.degree,
                                            settings.budget, settings.deadline, settings.observer)
    except SolverBudgetExceeded as e:
        return unsolved(fp, str(e))
    if res is None:
        return unsolved(fp, "no reduction pair found")
    return ProofNode(
        "reduction-pair", fp,
        {"removed": res.strict, "degree": res.degree,
         "interpretation": interpretation_params(res.interpretation),
         "summary": "removed " + ",".join(res.strict)},
        [solve_prob(res.remaining, settings, seen)],
    )


def prove_iast(
    system: PTRS,
    coeff_bound: int = 2,
    degree: str = LINEAR,
    budget: int | None = None,
    timeout: float | None = None,
    observer: Callable[[ConstraintSet], None] | None = None,
) -> Verdict:
    """iAST via the chain criterion, starting from (DT(R), R).

    Unknown means no proof was found, never that the system is not iAST.
    """
    settings = Settings(coeff_bound, degree, budget,
                        None if timeout is None else time.monotonic() + timeout, observer)
    tree = solve_prob(initial_problem(system), settings)
    status = PROVED if tree.solved else UNKNOWN
    return Verdict(status, "iAST", tree, "" if tree.solved else _frontier_note(tree))


def _frontier_note(tree: ProofNode) -> str:
    n = len(tree.frontier())
    return f"{n} open problem{'s' if n != 1 else ''}"
