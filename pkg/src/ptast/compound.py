"""Tuple symbols, compound terms and coupled dependency tuples."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from ptast.ptrs import PTRS, MultiDistribution, ProbRule
from ptast.terms import App, Kind, Symbol, Term, compound


def sharp(f: Symbol, label: str | None = None) -> Symbol:
    """The tuple symbol f# of a defined symbol f."""
    return Symbol(f.name, f.arity, Kind.TUPLE, label)


def tuple_labels(symbols: Iterable[Symbol]) -> dict[str, str]:
    """Printed names for tuple symbols: upper-cased, or ``f#`` on a clash."""
    symbols = set(symbols)
    taken = {s.name for s in symbols}
    labels: dict[str, str] = {}
    for f in sorted((s for s in symbols if s.kind is Kind.DEFINED), key=lambda s: s.name):
        up = f.name.upper()
        clash = up in taken or up in labels.values() or up == f.name
        labels[f.name] = f"{f.name}#" if clash else up
    return labels


def mark(t: Term, labels: dict[str, str] | None = None) -> Term:
    """t# : replace the root symbol of ``t`` by its tuple symbol."""
    if not isinstance(t, App) or t.symbol.kind is not Kind.DEFINED:
        raise ValueError(f"{t} does not have a defined root")
    label = labels.get(t.symbol.name) if labels else None
    return App(sharp(t.symbol, label), t.args)


def unmark(t: Term) -> Term:
    assert isinstance(t, App) and t.symbol.kind is Kind.TUPLE
    return App(Symbol(t.symbol.name, t.symbol.arity, Kind.DEFINED), t.args)


def is_compound(t: Term) -> bool:
    return isinstance(t, App) and t.symbol.kind is Kind.COMPOUND


def cont(t: Term) -> list[Term]:
    """Content multiset of a compound term, in left-to-right order."""
    if not is_compound(t):
        return [t]
    out: list[Term] = []
    for a in t.args:
        out.extend(cont(a))
    return out


def make_compound(args: Iterable[Term]) -> Term:
    args = list(args)
    return App(compound(len(args)), args)


def normalize(t: Term) -> Term:
    """Flatten nested compound symbols; the content order is preserved."""
    if not is_compound(t):
        raise ValueError(f"{t} is not rooted by a compound symbol")
    return make_compound(cont(t))


def equivalent(s: Term, t: Term) -> bool:
    """The relation ≈: equal content multisets."""
    return Counter(cont(s)) == Counter(cont(t))


def defined_subterms(r: Term, defined: set[Symbol]) -> list[Term]:
    """Subterms with a defined root, by lexicographic position (with repeats)."""
    return [u for _, u in r.positions() if isinstance(u, App) and u.symbol in defined]


def dp_transform(
    r: Term, defined: set[Symbol], labels: dict[str, str] | None = None
) -> Term:
    return make_compound(mark(u, labels) for u in defined_subterms(r, defined))


@dataclass(frozen=True)
class CoupledDT:
    """<l#, l> -> {p_j : <d_j, r_j>}."""

    lhs_sharp: Term
    lhs: Term
    rhs: MultiDistribution[tuple[Term, Term]]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for d, _ in self.rhs.support:
            if not is_compound(d):
                raise ValueError(f"{d} is not a compound term")

    def proj1(self) -> ProbRule:
        return ProbRule(self.lhs_sharp, self.rhs.map(lambda dr: dr[0]))

    def proj2(self) -> ProbRule:
        return ProbRule(self.lhs, self.rhs.map(lambda dr: dr[1]))

    def with_tuples(self, ds: Iterable[Term]) -> CoupledDT:
        """Same DT with the compound parts replaced (in branch order)."""
        ds = list(ds)
        entries = [(p, (d, r)) for (p, (_, r)), d in zip(self.rhs, ds)]
        return CoupledDT(self.lhs_sharp, self.lhs, MultiDistribution(entries), self.name)

    @property
    def is_deterministic(self) -> bool:
        return len(self.rhs) == 1

    def __str__(self) -> str:
        body = ", ".join(f"{p} : <{d}, {r}>" for p, (d, r) in self.rhs)
        return f"<{self.lhs_sharp}, {self.lhs}> -> {{{body}}}"


def dtuple(rule: ProbRule, defined: set[Symbol], labels: dict[str, str] | None = None,
           name: str = "") -> CoupledDT:
    mu = rule.rhs.map(lambda r: (dp_transform(r, defined, labels), r))
    return CoupledDT(mark(rule.lhs, labels), rule.lhs, mu, name)


def dtuples(system: PTRS, labels: dict[str, str] | None = None) -> list[CoupledDT]:
    """DT(R): one coupled dependency tuple per rule, in rule order.

    ``labels`` overrides the printed names of tuple symbols, e.g.
    ``{"minus": "M"}``.
    """
    defined = system.defined_symbols()
    labels = {**tuple_labels(system.symbols()), **(labels or {})}
    return [dtuple(r, defined, labels, str(i + 1)) for i, r in enumerate(system.rules)]
