"""The classic dependency pair framework for innermost termination."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import networkx as nx

from ptast.compound import mark, tuple_labels
from ptast.direct import as_rules, degrees_for, symbols_of, template_interpretation, _check_symbols
from ptast.poly import (
    LINEAR,
    ConstraintSet,
    Interpretation,
    coefficient_map,
    geq_constraint,
    gt_constraint,
    interpret,
)
from ptast.proof import PROVED, UNKNOWN, ProofNode, Verdict
from ptast.ptrs import PTRS, ProbRule, Rule, classify
from ptast.solver import SolverBudgetExceeded, solve_bounded
from ptast.terms import (
    App,
    FreshVars,
    Position,
    Symbol,
    Term,
    Var,
    apply,
    icap,
    is_normal_form,
    rename_apart,
    unify,
)


@dataclass(frozen=True)
class DependencyPair:
    lhs: Term
    rhs: Term
    name: str = field(default="", compare=False)
    origin: tuple[int, Position] | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"{self.lhs} -> {self.rhs}"


def _defined(rules: Sequence[Rule]) -> set[Symbol]:
    return {r.lhs.symbol for r in rules}


def dependency_pairs(
    rules: PTRS | Iterable[Rule | ProbRule], labels: dict[str, str] | None = None
) -> list[DependencyPair]:
    """DP(R): one pair per rule and defined-rooted subterm of its right-hand side.

    Pairs are numbered from 1 in rule order, then by position.
    """
    rules = _classified(rules)
    defined = _defined(rules)
    syms = {s.symbol for r in rules for t in (r.lhs, r.rhs) for s in t.subterms() if isinstance(s, App)}
    labels = {**tuple_labels(syms), **(labels or {})}
    out = []
    for i, r in enumerate(rules):
        for pos, u in r.rhs.positions():
            if isinstance(u, App) and u.symbol in defined:
                out.append(
                    DependencyPair(mark(r.lhs, labels), mark(u, labels), str(len(out) + 1), (i, pos))
                )
    return out


def _classified(rules: PTRS | Iterable[Rule | ProbRule]) -> list[Rule]:
    if isinstance(rules, PTRS):
        return as_rules(rules)
    rules = list(rules)
    if not rules:
        return []
    prob = [r if isinstance(r, ProbRule) else ProbRule(r.lhs, _point(r.rhs)) for r in rules]
    return as_rules(classify(prob))


def _point(t: Term):
    from ptast.ptrs import MultiDistribution

    return MultiDistribution.point(t)


# ---------------------------------------------------------------------------
# dependency graph

def may_reach(t: Term, source: Term, target: Term, lhss: Sequence[Term]) -> bool:
    """Can ``t σ1`` rewrite innermost to ``target σ2`` with both
    ``source σ1`` and ``target σ2`` in normal form?

    Over-approximated with icap: rewritable subterms of ``t`` become fresh
    variables, then the result must unify with a renamed copy of ``target``.
    """
    capped = icap(t, lhss, context=source, fresh=FreshVars("_c"))
    goal = rename_apart(target, FreshVars("_t"))
    theta = unify(capped, goal)
    if theta is None:
        return False
    return is_normal_form(apply(source, theta), lhss) and is_normal_form(apply(goal, theta), lhss)


def estimate_dep_graph(
    pairs: Sequence[DependencyPair], rules: Sequence[Rule]
) -> set[tuple[int, int]]:
    """Edges ``(i, j)`` between pair indices (0-based)."""
    lhss = [r.lhs for r in rules]
    return {
        (i, j)
        for i, p in enumerate(pairs)
        for j, q in enumerate(pairs)
        if may_reach(p.rhs, p.lhs, q.lhs, lhss)
    }


def cycles(n: int, edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    """Maximal cycles: SCCs with more than one node or with a self-loop.

    Sorted by least member; members ascending.
    """
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    out = []
    for comp in nx.strongly_connected_components(g):
        members = sorted(comp)
        if len(members) > 1 or g.has_edge(members[0], members[0]):
            out.append(members)
    return sorted(out)


def graph_dot(names: Sequence[str], labels: Sequence[str], edges: Iterable[tuple[int, int]],
              title: str = "dependency_graph") -> str:
    lines = [f"digraph {title} {{"]
    for name, label in zip(names, labels):
        text = label.replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  "{name}" [label="({name}) {text}"];')
    for i, j in sorted(edges):
        lines.append(f'  "{names[i]}" -> "{names[j]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ClassicProblem:
    pairs: tuple[DependencyPair, ...]
    rules: tuple[Rule, ...]

    def fingerprint(self) -> str:
        ps = "; ".join(f"({p.name}) {p}" for p in self.pairs)
        rs = "; ".join(str(r) for r in self.rules)
        return f"D = {{{ps}}}, R = {{{rs}}}"

    def pair_names(self) -> list[str]:
        return [p.name for p in self.pairs]


def dep_graph_dot(problem: ClassicProblem) -> str:
    edges = estimate_dep_graph(problem.pairs, problem.rules)
    return graph_dot(problem.pair_names(), [str(p) for p in problem.pairs], edges)


def scc_processor(problem: ClassicProblem) -> list[ClassicProblem]:
    edges = estimate_dep_graph(problem.pairs, problem.rules)
    return [
        ClassicProblem(tuple(problem.pairs[i] for i in comp), problem.rules)
        for comp in cycles(len(problem.pairs), edges)
    ]


# ---------------------------------------------------------------------------
# usable rules

def usable_rules_of(terms: Iterable[Term], rules: Sequence[Rule]) -> list[Rule]:
    """Least set closed under the usable-rules recursion, in rule order."""
    by_root: dict[Symbol, list[int]] = {}
    for i, r in enumerate(rules):
        by_root.setdefault(r.lhs.symbol, []).append(i)
    used: set[int] = set()
    seen_roots: set[Symbol] = set()
    todo = list(terms)
    while todo:
        t = todo.pop()
        for s in t.subterms():
            if isinstance(s, Var) or s.symbol in seen_roots:
                continue
            seen_roots.add(s.symbol)
            for i in by_root.get(s.symbol, []):
                used.add(i)
                todo.append(rules[i].rhs)
    return [r for i, r in enumerate(rules) if i in used]


def usable_rules(problem: ClassicProblem) -> list[Rule]:
    return usable_rules_of([p.rhs for p in problem.pairs], problem.rules)


# ---------------------------------------------------------------------------
# reduction pairs

@dataclass
class ReductionPairResult:
    interpretation: Interpretation
    strict: list[str]
    remaining: ClassicProblem
    degree: str


def classic_rpp_constraints(
    problem: ClassicProblem, degree: str = LINEAR
) -> tuple[ConstraintSet, Interpretation]:
    cs = ConstraintSet(source=f"classic reduction pair ({degree})")
    terms = [t for p in problem.pairs for t in (p.lhs, p.rhs)]
    terms += [t for r in problem.rules for t in (r.lhs, r.rhs)]
    interp = template_interpretation(symbols_of(terms), cs, degree, monotone=False)
    for i, r in enumerate(problem.rules, 1):
        cs.add(geq_constraint(interpret(r.lhs, interp), interpret(r.rhs, interp), f"rule {i}"))
    for p in problem.pairs:
        cs.add(geq_constraint(interpret(p.lhs, interp), interpret(p.rhs, interp), f"pair {p.name}"))
    cs.add_group(
        [[gt_constraint(interpret(p.lhs, interp), interpret(p.rhs, interp), f"pair {p.name} strict")]
         for p in problem.pairs],
        "some pair strictly decreasing",
    )
    return cs, interp


def strictly_oriented(problem: ClassicProblem, interp: Interpretation) -> list[str]:
    return [
        p.name for p in problem.pairs
        if gt_constraint(interpret(p.lhs, interp), interpret(p.rhs, interp)).holds()
    ]


def reduction_pair_processor(
    problem: ClassicProblem,
    coeff_bound: int = 2,
    degree: str = LINEAR,
    budget: int | None = None,
    deadline: float | None = None,
    observer: Callable[[ConstraintSet], None] | None = None,
) -> ReductionPairResult | None:
    """Remove every pair that one weakly monotone interpretation orients strictly."""
    if not problem.pairs:
        raise ValueError("reduction pair processor needs at least one pair")
    for shape in degrees_for(degree):
        cs, interp = classic_rpp_constraints(problem, shape)
        if observer is not None:
            observer(cs)
        model = solve_bounded(cs, coeff_bound, budget, deadline)
        if model is None:
            continue
        concrete = interp.instantiate(model)
        strict = strictly_oriented(problem, concrete)
        rest = tuple(p for p in problem.pairs if p.name not in strict)
        return ReductionPairResult(concrete, strict, ClassicProblem(rest, problem.rules), shape)
    return None


def check_classic_rpp(problem: ClassicProblem, interp: Interpretation, strict: Iterable[str]):
    """Re-validate a classic reduction pair step by evaluation only."""
    from ptast.direct import CheckReport

    strict = set(strict)
    terms = [t for p in problem.pairs for t in (p.lhs, p.rhs)]
    terms += [t for r in problem.rules for t in (r.lhs, r.rhs)]
    problems = _check_symbols(interp, symbols_of(terms), monotone=False)
    if problems:
        return CheckReport(False, problems)
    if not strict:
        problems.append("no pair is removed")
    for i, r in enumerate(problem.rules, 1):
        if not geq_constraint(interpret(r.lhs, interp), interpret(r.rhs, interp)).holds():
            problems.append(f"rule {i} ({r}) is not weakly decreasing")
    for p in problem.pairs:
        rel = gt_constraint if p.name in strict else geq_constraint
        if not rel(interpret(p.lhs, interp), interpret(p.rhs, interp)).holds():
            problems.append(f"pair {p.name} ({p}) violates {rel.__name__.split('_')[0]}")
    return CheckReport(not problems, problems)


def interpretation_params(interp: Interpretation) -> dict[str, dict[str, str]]:
    return {str(f): coefficient_map(p) for f, p in interp.items()}


# ---------------------------------------------------------------------------
# driver

@dataclass
class Settings:
    coeff_bound: int = 2
    degree: str = LINEAR
    budget: int | None = None
    deadline: float | None = None
    # called with every reduction pair constraint set, e.g. for SMT export
    observer: Callable[[ConstraintSet], None] | None = None

    def expired(self) -> bool:
        return self.deadline is not None and time.monotonic() > self.deadline


def unsolved(problem: str, reason: str) -> ProofNode:
    return ProofNode("unsolved", problem, {"summary": reason})


def solve_classic(problem: ClassicProblem, settings: Settings, seen: frozenset[str] = frozenset()) -> ProofNode:
    fp = problem.fingerprint()
    if not problem.pairs:
        return ProofNode("empty", fp)
    if fp in seen:
        return unsolved(fp, "problem repeats")
    if settings.expired():
        return unsolved(fp, "time limit")
    seen = seen | {fp}

    subs = scc_processor(problem)
    if [s.pairs for s in subs] != [problem.pairs]:
        return ProofNode(
            "dependency-graph",
            fp,
            {"sccs": [s.pair_names() for s in subs],
             "summary": f"{len(subs)} SCC(s): " + " ".join("{" + ",".join(s.pair_names()) + "}" for s in subs)},
            [solve_classic(s, settings, seen) for s in subs],
        )

    used = usable_rules(problem)
    if len(used) < len(problem.rules):
        keep = [problem.rules.index(r) + 1 for r in used]
        sub = ClassicProblem(problem.pairs, tuple(used))
        return ProofNode(
            "usable-rules", fp,
            {"rules": keep, "summary": f"{len(used)} of {len(problem.rules)} rules usable"},
            [solve_classic(sub, settings, seen)],
        )

    try:
        res = reduction_pair_processor(problem, settings.coeff_bound, settings.degree,
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
        [solve_classic(res.remaining, settings, seen)],
    )


def initial_problem(rules: PTRS | Iterable[Rule | ProbRule]) -> ClassicProblem:
    rs = _classified(rules)
    return ClassicProblem(tuple(dependency_pairs(rs)), tuple(rs))


def prove_iterm(
    rules: PTRS | Iterable[Rule | ProbRule],
    coeff_bound: int = 2,
    degree: str = LINEAR,
    budget: int | None = None,
    timeout: float | None = None,
) -> Verdict:
    """Innermost termination via (DP(R), R); Unknown means no proof was found."""
    settings = Settings(coeff_bound, degree, budget,
                        None if timeout is None else time.monotonic() + timeout)
    tree = solve_classic(initial_problem(rules), settings)
    status = PROVED if tree.solved else UNKNOWN
    return Verdict(status, "innermost termination", tree)
