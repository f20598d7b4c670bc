"""Bounded finite-domain search for polynomial coefficient constraints.

Every atom is reduced to integer polynomial inequalities ``q(u) >= 0`` over
the unknowns ``u``, which range over ``[lower, bound]``. The search assigns
unknowns in index order trying ascending values, so the first model found is
the lexicographically least one. Pruning uses interval upper bounds: since
all unknowns are nonnegative, a monomial is monotone in each unknown.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from math import prod
from typing import Mapping

from ptast.poly import Atom, ConstraintSet, Poly

DEFAULT_NODE_BUDGET = 10**7
BUDGET_ENV = "PTAST_NODE_BUDGET"


class SolverBudgetExceeded(RuntimeError):
    """The node budget or the time limit ran out before the search finished."""


def node_budget(budget: int | None = None) -> int:
    if budget is not None:
        return budget
    env = os.environ.get(BUDGET_ENV)
    return int(env) if env else DEFAULT_NODE_BUDGET


# an integer inequality: sum(c * prod(u[i] for i in vars)) >= 0
Ineq = tuple[tuple[int, tuple[int, ...]], ...]


def to_ineq(p: Poly) -> Ineq:
    out = []
    for m, c in p.sorted_terms():
        if c.denominator != 1:
            raise ValueError("coefficient conditions must be integral")
        vs: list[int] = []
        for v, e in m:
            if not isinstance(v, int):
                raise ValueError("coefficient conditions may only mention unknowns")
            vs.extend([v] * e)
        out.append((int(c), tuple(vs)))
    return tuple(out)


def atom_ineqs(atom: Atom) -> list[Ineq]:
    return [to_ineq(c) for c in atom.coefficient_conditions()]


def _upper(ineq: Ineq, lo: list[int], hi: list[int]) -> int:
    total = 0
    for c, vs in ineq:
        total += c * prod(map((hi if c > 0 else lo).__getitem__, vs))
    return total


class _Row:
    """An inequality prepared for fast interval evaluation."""

    __slots__ = ("pos", "neg", "vars", "up", "down")

    def __init__(self, q: Ineq):
        self.pos = [(c, vs) for c, vs in q if c > 0]
        self.neg = [(c, vs) for c, vs in q if c < 0]
        pv = {v for _, vs in self.pos for v in vs}
        nv = {v for _, vs in self.neg for v in vs}
        self.vars = sorted(pv | nv)
        # raising v can only help when v is only in positive monomials, so only
        # its lower end needs narrowing; symmetrically for negative monomials
        self.up = sorted(pv)
        self.down = sorted(nv)

    def upper(self, lo: list[int], hi: list[int]) -> int:
        total = 0
        hg = hi.__getitem__
        lg = lo.__getitem__
        for c, vs in self.pos:
            total += c * prod(map(hg, vs))
        for c, vs in self.neg:
            total += c * prod(map(lg, vs))
        return total


@dataclass
class _Compiled:
    hard: list[_Row]
    groups: list[list[list[_Row]]]
    watch_hard: list[list[int]]
    watch_group: list[list[int]]
    infeasible: bool


def _compile(cs: ConstraintSet) -> _Compiled:
    n = len(cs.unknowns)
    infeasible = False

    def simplify(ineqs: list[Ineq]) -> list[Ineq] | None:
        # None: certainly false; drop conditions that always hold
        kept = []
        for q in ineqs:
            if all(c >= 0 for c, _ in q):
                continue
            if all(c <= 0 for c, _ in q) and any(not vs and c < 0 for c, vs in q):
                return None
            kept.append(q)
        return kept

    hard: list[Ineq] = []
    for a in cs.atoms:
        s = simplify(atom_ineqs(a))
        if s is None:
            infeasible = True
        else:
            hard.extend(s)
    hard = list(dict.fromkeys(hard))

    groups: list[list[list[Ineq]]] = []
    for g in cs.groups:
        alts = []
        for alt in g.alternatives:
            s = simplify([q for a in alt for q in atom_ineqs(a)])
            if s is not None:
                alts.append(s)
        if not alts:
            infeasible = True
        elif any(not alt for alt in alts):
            continue
        groups.append(alts)

    rows = [_Row(q) for q in hard]
    grows = [[[_Row(q) for q in alt] for alt in alts] for alts in groups]
    watch_hard: list[list[int]] = [[] for _ in range(n)]
    for k, row in enumerate(rows):
        for v in row.vars:
            watch_hard[v].append(k)
    watch_group: list[list[int]] = [[] for _ in range(n)]
    for k, alts in enumerate(grows):
        for v in sorted({v for alt in alts for row in alt for v in row.vars}):
            watch_group[v].append(k)
    return _Compiled(rows, grows, watch_hard, watch_group, infeasible)


class _Search:
    def __init__(self, comp: _Compiled, n: int, budget: int, deadline: float | None):
        self.c = comp
        self.n = n
        self.budget = budget
        self.deadline = deadline
        self.nodes = 0

    def _narrow(self, q: _Row, lo: list[int], hi: list[int], changed: list[int]) -> bool:
        if q.upper(lo, hi) < 0:
            return False
        for v in q.up:
            if lo[v] == hi[v]:
                continue
            a = lo[v]
            top = hi[v]
            while lo[v] < top:
                hi[v] = lo[v]
                ok = q.upper(lo, hi) >= 0
                hi[v] = top
                if ok:
                    break
                lo[v] += 1
            if lo[v] != a:
                changed.append(v)
        for v in q.down:
            if lo[v] == hi[v]:
                continue
            b = hi[v]
            bottom = lo[v]
            while hi[v] > bottom:
                lo[v] = hi[v]
                ok = q.upper(lo, hi) >= 0
                lo[v] = bottom
                if ok:
                    break
                hi[v] -= 1
            if hi[v] != b:
                changed.append(v)
        return True

    def propagate(self, start: list[int], lo: list[int], hi: list[int]) -> bool:
        c = self.c
        rows: dict[int, None] = {}
        groups: dict[int, None] = {}
        for v in start:
            rows.update(dict.fromkeys(c.watch_hard[v]))
            groups.update(dict.fromkeys(c.watch_group[v]))
        changed: list[int] = []
        while rows or groups:
            if rows:
                k = next(iter(rows))
                del rows[k]
                if not self._narrow(c.hard[k], lo, hi, changed):
                    return False
            else:
                k = next(iter(groups))
                del groups[k]
                alive = [alt for alt in c.groups[k] if all(q.upper(lo, hi) >= 0 for q in alt)]
                if not alive:
                    return False
                if len(alive) == 1:
                    for q in alive[0]:
                        if not self._narrow(q, lo, hi, changed):
                            return False
            for v in changed:
                rows.update(dict.fromkeys(c.watch_hard[v]))
                groups.update(dict.fromkeys(c.watch_group[v]))
            changed.clear()
        return True

    def run(self, order: list[int], lo: list[int], hi: list[int]) -> bool:
        """Search the unknowns in ``order``; on success ``lo`` holds the model."""
        if not order:
            return True
        # explicit stack of (position in order, lo, hi, next value)
        stack: list[tuple[int, list[int], list[int], int]] = [(0, lo, hi, lo[order[0]])]
        while stack:
            k, lo1, hi1, val = stack.pop()
            i = order[k]
            if val > hi1[i]:
                continue
            stack.append((k, lo1, hi1, val + 1))
            self.nodes += 1
            if self.nodes > self.budget:
                raise SolverBudgetExceeded(f"node budget {self.budget} exceeded")
            if self.deadline is not None and self.nodes % 1024 == 0 and time.monotonic() > self.deadline:
                raise SolverBudgetExceeded("time limit exceeded")
            lo2, hi2 = list(lo1), list(hi1)
            lo2[i] = hi2[i] = val
            if not self.propagate([i], lo2, hi2):
                continue
            k += 1
            while k < len(order) and lo2[order[k]] == hi2[order[k]]:
                k += 1
            if k == len(order):
                for v in order:
                    lo[v] = hi[v] = lo2[v]
                return True
            stack.append((k, lo2, hi2, lo2[order[k]]))
        return False


def _components(comp: _Compiled, n: int) -> list[list[int]]:
    """Unknowns grouped by shared constraints; each group ascending."""
    parent = list(range(n))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def link(vs: list[int]) -> None:
        for v in vs[1:]:
            parent[find(v)] = find(vs[0])

    for row in comp.hard:
        link(row.vars)
    for alts in comp.groups:
        link(sorted({v for alt in alts for row in alt for v in row.vars}))
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


@dataclass
class SolverResult:
    model: dict[int, int] | None
    nodes: int


def solve(
    cs: ConstraintSet,
    coeff_bound: int,
    budget: int | None = None,
    deadline: float | None = None,
) -> SolverResult:
    if coeff_bound < 1:
        raise ValueError("coefficient bound must be at least 1")
    comp = _compile(cs)
    n = len(cs.unknowns)
    if comp.infeasible:
        return SolverResult(None, 0)
    search = _Search(comp, n, node_budget(budget), deadline)
    lo, hi = list(cs.unknowns.lower), [coeff_bound] * n
    if any(x > y for x, y in zip(lo, hi)) or not search.propagate(list(range(n)), lo, hi):
        return SolverResult(None, search.nodes)
    # independent parts are solved separately; combining their
    # lexicographically least models gives the overall least model
    for order in _components(comp, n):
        order = [v for v in order if lo[v] != hi[v]]
        if not search.run(order, lo, hi):
            return SolverResult(None, search.nodes)
    found = lo
    model = dict(enumerate(found))
    if not check_model(cs, model):  # pragma: no cover - defensive
        raise AssertionError("solver returned a model violating the constraints")
    return SolverResult(model, search.nodes)


def solve_bounded(
    cs: ConstraintSet,
    coeff_bound: int,
    budget: int | None = None,
    deadline: float | None = None,
) -> dict[int, int] | None:
    """Lexicographically least model within ``[lower, coeff_bound]``, or None."""
    return solve(cs, coeff_bound, budget, deadline).model


def _ineq_value(q: Ineq, model: Mapping[int, int]) -> int:
    return sum(c * prod(model[v] for v in vs) for c, vs in q)


def check_model(cs: ConstraintSet, model: Mapping[int, int]) -> bool:
    def ok(atoms: list[Atom]) -> bool:
        return all(_ineq_value(q, model) >= 0 for a in atoms for q in atom_ineqs(a))

    return ok(cs.atoms) and all(any(ok(alt) for alt in g.alternatives) for g in cs.groups)


# ---------------------------------------------------------------------------
# SMT-LIB export

def _smt_int(c: int) -> str:
    return str(c) if c >= 0 else f"(- {-c})"


def _smt_term(q: Ineq) -> str:
    parts = []
    for c, vs in q:
        factors = [f"u{v}" for v in vs]
        if not factors:
            parts.append(_smt_int(c))
        elif c == 1:
            parts.append(factors[0] if len(factors) == 1 else f"(* {' '.join(factors)})")
        else:
            parts.append(f"(* {_smt_int(c)} {' '.join(factors)})")
    if not parts:
        return "0"
    return parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"


def _smt_conj(atoms: list[Atom]) -> str:
    conds = [f"(>= {_smt_term(q)} 0)" for a in atoms for q in atom_ineqs(a)]
    if not conds:
        return "true"
    return conds[0] if len(conds) == 1 else f"(and {' '.join(conds)})"


def smt_export(cs: ConstraintSet, coeff_bound: int | None = None) -> str:
    """SMT-LIB2 script (QF_NIA) for the constraint set."""
    lines = [
        "; ptast polynomial interpretation constraints",
        f"; source: {cs.source or 'unnamed'}",
        "(set-logic QF_NIA)",
    ]
    for i, (name, lower) in enumerate(zip(cs.unknowns.names, cs.unknowns.lower)):
        lines.append(f"(declare-const u{i} Int) ; {name}")
        lines.append(f"(assert (>= u{i} {lower}))")
        if coeff_bound is not None:
            lines.append(f"(assert (<= u{i} {coeff_bound}))")
    for a in cs.atoms:
        if a.label:
            lines.append(f"; {a.label}: {a}")
        for q in atom_ineqs(a):
            lines.append(f"(assert (>= {_smt_term(q)} 0))")
    for g in cs.groups:
        if g.label:
            lines.append(f"; {g.label}")
        alts = [_smt_conj(alt) for alt in g.alternatives]
        body = alts[0] if len(alts) == 1 else f"(or {' '.join(alts)})"
        lines.append(f"(assert {body})")
    lines += ["(check-sat)", "(get-model)"]
    return "\n".join(lines) + "\n"
