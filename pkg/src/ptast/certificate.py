"""JSON proof certificates and an independent replay checker.

The replay rebuilds every problem from the printed system, recomputes the
graph and usable-rules steps, and re-validates each recorded interpretation
by evaluating concrete polynomials only.
"""

from __future__ import annotations

import json
from typing import Any, Callable

from ptast import dp_classic as dc
from ptast import dp_prob as dpp
from ptast.direct import CheckReport, DirectProof, check_ast_direct, check_terminating_classic, as_rules
from ptast.poly import Interpretation, coefficient_map, from_coefficient_map
from ptast.proof import PROVED, UNKNOWN, ProofNode, Verdict
from ptast.ptrs import PTRS, parse_ptrs, print_ptrs
from ptast.terms import App, Symbol, Term

DP = "dp"
DIRECT = "direct"
CLASSIC = "classic"


def node_json(node: ProofNode) -> dict[str, Any]:
    params = {k: v for k, v in node.params.items() if k != "interpretation"}
    out: dict[str, Any] = {"processor": node.processor, "problem": node.problem, "params": params}
    if "interpretation" in node.params:
        out["interpretation"] = node.params["interpretation"]
    out["children"] = [node_json(c) for c in node.children]
    return out


def node_from_json(data: dict[str, Any]) -> ProofNode:
    params = dict(data.get("params", {}))
    if "interpretation" in data:
        params["interpretation"] = data["interpretation"]
    return ProofNode(data["processor"], data.get("problem", ""), params,
                     [node_from_json(c) for c in data.get("children", [])])


def direct_node(system: PTRS, proof: DirectProof | None, criterion: str = "direct-ast") -> ProofNode:
    if proof is None:
        return ProofNode("unsolved", system.name, {"summary": "no interpretation found"})
    return ProofNode(
        criterion, system.name or "system",
        {"degree": proof.degree, "coeff_bound": proof.coeff_bound,
         "strict_branches": proof.strict_branches,
         "interpretation": {str(f): coefficient_map(p) for f, p in proof.interpretation.items()},
         "summary": "monotone multilinear interpretation"},
    )


def certificate(system: PTRS, verdict: Verdict, method: str) -> dict[str, Any]:
    """The certificate as a JSON-ready dict with a fixed field order."""
    return {
        "system": print_ptrs(system),
        "name": system.name,
        "method": method,
        "property": verdict.property,
        "verdict": verdict.status,
        "tree": [node_json(verdict.proof)] if verdict.proof is not None else [],
    }


def dumps(cert: dict[str, Any]) -> str:
    return json.dumps(cert, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# replay

class ReplayError(ValueError):
    pass


def _symbols(terms: list[Term]) -> dict[str, Symbol]:
    out = {}
    for t in terms:
        for s in t.subterms():
            if isinstance(s, App):
                out.setdefault(str(s.symbol), s.symbol)
    return out


def _interp(data: dict[str, dict[str, str]], terms: list[Term]) -> Interpretation:
    syms = _symbols(terms)
    polys = {}
    for name, cmap in data.items():
        if name not in syms:
            raise ReplayError(f"interpretation mentions unknown symbol {name}")
        polys[syms[name]] = from_coefficient_map(cmap)
    return Interpretation(polys)


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise ReplayError(msg)


def _replay_classic(node: ProofNode, problem: dc.ClassicProblem, allow_open: bool) -> None:
    _expect(node.problem == problem.fingerprint(), f"problem mismatch at {node.processor}")
    kind = node.processor
    if kind == "empty":
        _expect(not problem.pairs, "empty leaf with pairs left")
    elif kind == "unsolved":
        _expect(allow_open, "open problem in a proof claimed complete")
    elif kind == "dependency-graph":
        subs = dc.scc_processor(problem)
        _expect([s.pair_names() for s in subs] == node.params["sccs"], "SCC split differs")
        _expect(len(subs) == len(node.children), "wrong number of subproblems")
        for s, c in zip(subs, node.children):
            _replay_classic(c, s, allow_open)
    elif kind == "usable-rules":
        used = dc.usable_rules(problem)
        _expect([problem.rules.index(r) + 1 for r in used] == node.params["rules"], "usable rules differ")
        _replay_classic(node.children[0], dc.ClassicProblem(problem.pairs, tuple(used)), allow_open)
    elif kind == "reduction-pair":
        terms = [t for p in problem.pairs for t in (p.lhs, p.rhs)]
        terms += [t for r in problem.rules for t in (r.lhs, r.rhs)]
        interp = _interp(node.params["interpretation"], terms)
        removed = node.params["removed"]
        report = dc.check_classic_rpp(problem, interp, removed)
        _expect(report.ok, "; ".join(report.problems))
        rest = dc.ClassicProblem(tuple(p for p in problem.pairs if p.name not in removed), problem.rules)
        _replay_classic(node.children[0], rest, allow_open)
    else:
        raise ReplayError(f"unknown classic processor {kind!r}")


def _replay_prob(node: ProofNode, problem: dpp.ProbProblem, allow_open: bool) -> None:
    _expect(node.problem == problem.fingerprint(), f"problem mismatch at {node.processor}")
    kind = node.processor
    if kind == "empty":
        _expect(not problem.P, "empty leaf with DTs left")
    elif kind == "unsolved":
        _expect(allow_open, "open problem in a proof claimed complete")
    elif kind == "dependency-graph":
        subs = dpp.prob_scc_processor(problem)
        _expect([s.names() for s in subs] == node.params["sccs"], "SCC split differs")
        _expect(len(subs) == len(node.children), "wrong number of subproblems")
        for s, c in zip(subs, node.children):
            _replay_prob(c, s, allow_open)
    elif kind == "usable-terms":
        _replay_prob(node.children[0], dpp.usable_terms_processor(problem), allow_open)
    elif kind == "usable-rules":
        used = dpp.prob_usable_rules(problem)
        _expect([problem.S.index(r) + 1 for r in used] == node.params["rules"], "usable rules differ")
        _replay_prob(node.children[0], dpp.ProbProblem(problem.P, tuple(used)), allow_open)
    elif kind == "probability-removal":
        _expect(dpp.removal_applicable(problem), "probability removal not applicable")
        _replay_classic(node.children[0], dpp.np_problem(problem), allow_open)
    elif kind == "reduction-pair":
        interp = _interp(node.params["interpretation"], dpp._rpp_terms(problem))
        removed = node.params["removed"]
        report = dpp.check_prob_rpp(problem, interp, removed)
        _expect(report.ok, "; ".join(report.problems))
        _replay_prob(node.children[0], problem.with_P(dt for dt in problem.P if dt.name not in removed),
                     allow_open)
    else:
        raise ReplayError(f"unknown processor {kind!r}")


def replay(cert: dict[str, Any] | str) -> CheckReport:
    """Independently re-check a certificate. Returns a failing report on any mismatch."""
    if isinstance(cert, str):
        cert = json.loads(cert)
    try:
        system = parse_ptrs(cert["system"], cert.get("name", ""))
        allow_open = cert["verdict"] == UNKNOWN
        if cert["verdict"] not in (PROVED, UNKNOWN):
            raise ReplayError(f"bad verdict {cert['verdict']!r}")
        if not cert["tree"]:
            _expect(allow_open, "a proved certificate needs a proof tree")
            return CheckReport(True)
        root = node_from_json(cert["tree"][0])
        if not allow_open:
            _expect(root.solved, "proof tree has open problems")
        method = cert["method"]
        if method == DP:
            _replay_prob(root, dpp.initial_problem(system), allow_open)
        elif method == CLASSIC:
            _replay_classic(root, dc.initial_problem(system), allow_open)
        elif method == DIRECT:
            _replay_direct(root, system, allow_open)
        else:
            raise ReplayError(f"unknown method {method!r}")
    except (ReplayError, KeyError, IndexError, ValueError) as e:
        return CheckReport(False, [f"{type(e).__name__}: {e}"])
    return CheckReport(True)


def _replay_direct(node: ProofNode, system: PTRS, allow_open: bool) -> None:
    if node.processor == "unsolved":
        _expect(allow_open, "open problem in a proof claimed complete")
        return
    terms = [t for r in system for t in (r.lhs, *r.rhs.support)]
    interp = _interp(node.params["interpretation"], terms)
    checks: dict[str, Callable[[], CheckReport]] = {
        "direct-ast": lambda: check_ast_direct(system, interp),
        "direct-termination": lambda: check_terminating_classic(as_rules(system), interp),
    }
    _expect(node.processor in checks, f"unknown direct criterion {node.processor!r}")
    report = checks[node.processor]()
    _expect(report.ok, "; ".join(report.problems))
