"""Innermost probabilistic rewriting, liftings, simulation and chain steps.

Exact computations use :class:`fractions.Fraction`; the Monte-Carlo
estimator is the only place that touches floating point.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence, Union

from ptast.compound import CoupledDT, is_compound, make_compound, normalize
from ptast.ptrs import PTRS, MultiDistribution, ProbRule
from ptast.terms import (
    App,
    InvalidPosition,
    Position,
    Substitution,
    Term,
    Var,
    apply,
    is_normal_form,
    match,
    replace_at,
    replace_path,
    subterm_at,
)

DEFAULT_SIZE_LIMIT = 10**6


class DistributionLimitError(RuntimeError):
    """The exact lifting grew beyond the configured number of entries."""


@dataclass(frozen=True, eq=False)
class Redex:
    position: Position
    rule_index: int
    substitution: Substitution

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Redex)
            and self.position == other.position
            and self.rule_index == other.rule_index
            and self.substitution == other.substitution
        )

    def __hash__(self) -> int:
        return hash((self.position, self.rule_index))


class Engine:
    """Rule index plus a normal-form memo for one PTRS.

    The memo is keyed by object identity, so shared subterms of successive
    terms are looked up in constant time without deep comparisons.
    """

    MEMO_LIMIT = 10**6

    def __init__(self, system: PTRS):
        self.system = system
        self.by_root: dict = defaultdict(list)
        for i, r in enumerate(system.rules):
            self.by_root[r.lhs.symbol].append((i, r))
        self._nf: dict[int, tuple[Term, bool]] = {}
        self.reset_tables()

    def reset_tables(self) -> None:
        self.table: dict[tuple, Term] = {}
        self.canon: dict[int, Term] = {}
        self._nf.clear()

    # hash-consing: interned terms are compared by identity

    def node(self, symbol, args: Sequence[Term]) -> Term:
        """The interned App(symbol, args); ``args`` must be interned."""
        key = (symbol, *map(id, args))
        found = self.table.get(key)
        if found is None:
            found = self.table[key] = App(symbol, args)
            self.canon[id(found)] = found
        return found

    def intern(self, t: Term) -> Term:
        if self.canon.get(id(t)) is t:
            return t
        done: dict[int, Term] = {}
        stack: list[tuple[Term, bool]] = [(t, False)]
        while stack:
            u, expanded = stack.pop()
            if id(u) in done:
                continue
            if self.canon.get(id(u)) is u:
                done[id(u)] = u
            elif isinstance(u, Var):
                key = ("v", u.name)
                found = self.table.get(key)
                if found is None:
                    found = self.table[key] = u
                    self.canon[id(u)] = u
                done[id(u)] = found
            elif not expanded:
                stack.append((u, True))
                stack.extend((a, False) for a in u.args)
            else:
                done[id(u)] = self.node(u.symbol, [done[id(a)] for a in u.args])
        return done[id(t)]

    def replace_interned(self, t: Term, pos: Position, new: Term) -> list[Term]:
        """Interned nodes of t[new]_pos along ``pos``, root first."""
        anc = []
        u = t
        for i in pos:
            anc.append(u)
            u = u.args[i - 1]
        spine = [new]
        for n in range(len(pos) - 1, -1, -1):
            args = list(anc[n].args)
            args[pos[n] - 1] = spine[-1]
            spine.append(self.node(anc[n].symbol, args))
        spine.reverse()
        return spine

    def step_interned(self, t: Term, d: Redex) -> list[tuple[Fraction, Term]]:
        rule = self.system.rules[d.rule_index]
        return [
            (p, self.replace_interned(t, d.position, self.intern(apply(r, d.substitution)))[0])
            for p, r in rule.rhs
        ]

    def matches(self, u: Term) -> list[tuple[int, Substitution]]:
        if not isinstance(u, App):
            return []
        out = []
        for i, r in self.by_root.get(u.symbol, ()):
            sigma = match(r.lhs, u)
            if sigma is not None:
                out.append((i, sigma))
        return out

    def _known(self, u: Term) -> bool:
        return True if isinstance(u, Var) else self._nf[id(u)][1]

    def is_nf(self, t: Term) -> bool:
        if isinstance(t, Var):
            return True
        memo = self._nf
        hit = memo.get(id(t))
        if hit is not None and hit[0] is t:
            return hit[1]
        if len(memo) > self.MEMO_LIMIT:
            memo.clear()
        stack: list[tuple[Term, bool]] = [(t, False)]
        while stack:
            u, expanded = stack.pop()
            hit = memo.get(id(u))
            if hit is not None and hit[0] is u:
                continue
            if not expanded:
                stack.append((u, True))
                stack.extend((a, False) for a in u.args if isinstance(a, App))
                continue
            nf = all(self._known(a) for a in u.args) and not self.matches(u)
            memo[id(u)] = (u, nf)
        return memo[id(t)][1]

    def redexes(self, t: Term, prefix: Position = ()) -> list[Redex]:
        """Innermost redexes below ``prefix``, leftmost first."""
        out: list[Redex] = []
        stack: list[tuple[Term, Position]] = [(t, prefix)]
        while stack:
            u, pos = stack.pop()
            if self.is_nf(u):
                continue
            if all(self.is_nf(a) for a in u.args):
                out.extend(Redex(pos, i, sigma) for i, sigma in self.matches(u))
            else:
                for k in range(len(u.args), 0, -1):
                    stack.append((u.args[k - 1], pos + (k,)))
        return out

    def step(self, t: Term, d: Redex) -> MultiDistribution[Term]:
        rule = self.system.rules[d.rule_index]
        return rule.rhs.map(lambda r: replace_at(t, d.position, apply(r, d.substitution)))


def innermost_redexes(t: Term, system: PTRS) -> list[Redex]:
    return Engine(system).redexes(t)


def step(t: Term, d: Redex, system: PTRS) -> MultiDistribution[Term]:
    """One innermost rewrite step at the redex described by ``d``."""
    if not 0 <= d.rule_index < len(system.rules):
        raise ValueError(f"rule index {d.rule_index} out of range")
    try:
        u = subterm_at(t, d.position)
    except InvalidPosition as e:
        raise ValueError(str(e)) from None
    rule = system.rules[d.rule_index]
    if apply(rule.lhs, d.substitution) != u:
        raise ValueError(f"rule {rule} does not match {u} with the given substitution")
    eng = Engine(system)
    if not all(eng.is_nf(a) for a in u.args):
        raise ValueError(f"{u} is not an innermost redex")
    return eng.step(t, d)


# ---------------------------------------------------------------------------
# exact lifting

def lift(
    t0: Term,
    system: PTRS,
    strategy: str = "leftmost",
    size_limit: int = DEFAULT_SIZE_LIMIT,
) -> Iterator[dict[Term, Fraction]]:
    """Yield mu_0, mu_1, ... of the lifted innermost rewrite sequence.

    Each term is rewritten at its leftmost (or rightmost) innermost redex
    with the first matching rule. Equal terms are merged; every copy would
    be rewritten the same way, so no normal-form mass changes.
    """
    if strategy not in ("leftmost", "rightmost"):
        raise ValueError(f"unknown strategy {strategy!r}")
    eng = Engine(system)
    cache: dict[int, list[tuple[Fraction, Term]]] = {}
    dist: dict[Term, Fraction] = {eng.intern(t0): Fraction(1)}
    while True:
        yield dist
        nxt: dict[Term, Fraction] = defaultdict(Fraction)
        for t, p in dist.items():
            succ = cache.get(id(t))
            if succ is None:
                rs = eng.redexes(t)
                if not rs:
                    succ = [(Fraction(1), t)]
                else:
                    d = rs[0] if strategy == "leftmost" else _rightmost(rs)
                    succ = eng.step_interned(t, d)
                cache[id(t)] = succ
            for q, u in succ:
                nxt[u] += p * q
        if len(nxt) > size_limit:
            raise DistributionLimitError(
                f"distribution has {len(nxt)} entries, limit is {size_limit}"
            )
        dist = dict(nxt)


def _rightmost(rs: list[Redex]) -> Redex:
    last = rs[-1].position
    return next(r for r in rs if r.position == last)


def nf_mass(dist: Mapping[Term, Fraction], system: PTRS) -> Fraction:
    eng = Engine(system)
    return sum((p for t, p in dist.items() if eng.is_nf(t)), Fraction(0))


def lift_exact(
    t0: Term,
    system: PTRS,
    depth: int,
    strategy: str = "leftmost",
    size_limit: int = DEFAULT_SIZE_LIMIT,
) -> list[Fraction]:
    """[|mu_0|, ..., |mu_depth|] for the lifting that starts in {1 : t0}."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    eng = Engine(system)
    out: list[Fraction] = []
    for dist in lift(t0, system, strategy, size_limit):
        out.append(sum((p for t, p in dist.items() if eng.is_nf(t)), Fraction(0)))
        if len(out) > depth:
            return out
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# Monte-Carlo simulation

class _Sampler:
    """State machine for sampled runs over hash-consed terms.

    Terms are interned, so a state is identified by object identity and
    the redex list and successors of a state are computed once. Walks that
    revisit states (such as the random walk on g^k(0)) then cost O(1) per
    step; fresh states are derived incrementally from their predecessor.
    """

    CACHE_LIMIT = 500_000

    def __init__(self, eng: Engine):
        self.eng = eng
        self.reset()

    def reset(self) -> None:
        self.info: dict[int, tuple[Redex, ...]] = {}
        self.trans: dict[tuple[int, int, int], Term] = {}
        self.eng.reset_tables()

    def redexes(self, t: Term) -> tuple[Redex, ...]:
        rs = self.info.get(id(t))
        if rs is None:
            rs = self.info[id(t)] = tuple(self.eng.redexes(t))
        return rs

    def advance(self, t: Term, rng: random.Random) -> Term | None:
        """Sample a successor of the interned term ``t``; None for normal forms."""
        rs = self.redexes(t)
        if not rs:
            return None
        k = rng.randrange(len(rs))
        d = rs[k]
        rule = self.eng.system.rules[d.rule_index]
        x, acc, j = rng.random(), 0.0, len(rule.rhs) - 1
        for n, (p, _) in enumerate(rule.rhs):
            acc += float(p)
            if x < acc:
                j = n
                break
        key = (id(t), k, j)
        nxt = self.trans.get(key)
        if nxt is None:
            nxt = self.trans[key] = self._successor(t, rs, d, rule.rhs[j][1])
        return nxt

    def _successor(self, t: Term, rs: tuple[Redex, ...], d: Redex, r: Term) -> Term:
        new = self.eng.intern(apply(r, d.substitution))
        pos = d.position
        spine = self.eng.replace_interned(t, pos, new)
        succ = spine[0]
        if id(succ) in self.info:
            return succ
        out = [e for e in rs if e.position != pos]
        out.extend(self.eng.redexes(new, pos))
        if self.eng.is_nf(new):
            # an ancestor may have become an innermost redex
            for n in range(len(pos) - 1, -1, -1):
                node = spine[n]
                if not all(self.eng.is_nf(a) for a in node.args):
                    break
                found = self.eng.matches(node)
                if found:
                    out.extend(Redex(pos[:n], i, sg) for i, sg in found)
                    break
        self.info[id(succ)] = tuple(out)
        return succ


def mc_estimate(
    t0: Term,
    system: PTRS,
    max_steps: int,
    samples: int,
    seed: int,
) -> float:
    """Fraction of sampled runs that reach a normal form within ``max_steps``.

    The redex (position and rule) is drawn uniformly among all innermost
    redex descriptors, the branch by the rule's probabilities.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    rng = random.Random(seed)
    sampler = _Sampler(Engine(system))
    hits = 0
    for _ in range(samples):
        if len(sampler.eng.table) > sampler.CACHE_LIMIT:
            sampler.reset()
        t = sampler.eng.intern(t0)
        for _ in range(max_steps):
            nxt = sampler.advance(t, rng)
            if nxt is None:
                break
            t = nxt
        if not sampler.redexes(t):
            hits += 1
    return hits / samples


# ---------------------------------------------------------------------------
# chain steps on compound terms

@dataclass(frozen=True)
class Keep:
    def __str__(self) -> str:
        return "keep"


KEEP = Keep()


@dataclass(frozen=True)
class RewriteAt:
    position: Position


MirrorChoice = Union[Keep, RewriteAt]


class ChainStepError(ValueError):
    pass


def _args(a: Term) -> tuple[Term, ...]:
    if not is_compound(a):
        raise ChainStepError(f"{a} is not a compound term")
    if normalize(a) != a:
        raise ChainStepError(f"{a} is not normalized")
    return a.args


def _mirror(
    args: tuple[Term, ...],
    i: int,
    mirrors: Mapping[int, MirrorChoice],
    redex: Term,
) -> dict[int, Position]:
    out: dict[int, Position] = {}
    for k, choice in mirrors.items():
        if k == i or not 1 <= k <= len(args):
            raise ChainStepError(f"mirror index {k} is not another argument")
        if isinstance(choice, RewriteAt):
            try:
                found = subterm_at(args[k - 1], choice.position)
            except InvalidPosition:
                found = None
            if found != redex:
                raise ChainStepError(
                    f"argument {k} does not contain {redex} at {choice.position}"
                )
            out[k] = choice.position
    return out


def _assemble(
    args: tuple[Term, ...],
    i: int,
    new_i: Term,
    mirrored: Mapping[int, Position],
    r: Term,
) -> Term:
    parts = [
        new_i if k == i else replace_at(s, mirrored[k], r) if k in mirrored else s
        for k, s in enumerate(args, 1)
    ]
    return normalize(make_compound(parts))


def pptrs_step(
    a: Term,
    i: int,
    dt: CoupledDT,
    sigma: Substitution,
    mirrors: Mapping[int, MirrorChoice],
    P: Sequence[CoupledDT],
    S: PTRS,
) -> MultiDistribution[Term]:
    """Rewrite argument ``i`` (1-based) of ``a`` with ``dt``.

    Arguments listed in ``mirrors`` with :class:`RewriteAt` apply the
    DT's rule to the copy of the redex at that position; all others stay.
    """
    args = _args(a)
    if dt not in P:
        raise ChainStepError("dependency tuple is not in P")
    if not 1 <= i <= len(args):
        raise ChainStepError(f"argument index {i} out of range")
    s_i = args[i - 1]
    if apply(dt.lhs_sharp, sigma) != s_i:
        raise ChainStepError(f"{dt.lhs_sharp} does not match {s_i} with the given substitution")
    if not is_normal_form(s_i, S.lhss):
        raise ChainStepError(f"{s_i} is not in normal form w.r.t. S")
    redex = apply(dt.lhs, sigma)
    mirrored = _mirror(args, i, mirrors, redex)
    if mirrored and dt.proj2() not in S.rules:
        raise ChainStepError(f"rule {dt.proj2()} is not in S")
    return dt.rhs.map(
        lambda dr: _assemble(args, i, apply(dr[0], sigma), mirrored, apply(dr[1], sigma))
    )


def s_step(
    a: Term,
    i: int,
    pi: Position,
    rule: ProbRule,
    mirrors: Mapping[int, MirrorChoice],
    S: PTRS,
) -> MultiDistribution[Term]:
    """Innermost S-step inside argument ``i`` with simultaneous copies."""
    args = _args(a)
    if rule not in S.rules:
        raise ChainStepError(f"rule {rule} is not in S")
    if not 1 <= i <= len(args):
        raise ChainStepError(f"argument index {i} out of range")
    try:
        u = subterm_at(args[i - 1], pi)
    except InvalidPosition:
        raise ChainStepError(f"position {pi} is not valid in argument {i}") from None
    sigma = match(rule.lhs, u)
    if sigma is None:
        raise ChainStepError(f"{rule.lhs} does not match {u}")
    if not all(is_normal_form(x, S.lhss) for x in u.args):
        raise ChainStepError(f"{u} is not an innermost redex")
    mirrored = _mirror(args, i, mirrors, u)
    return rule.rhs.map(
        lambda r: _assemble(
            args, i, replace_at(args[i - 1], pi, apply(r, sigma)), mirrored, apply(r, sigma)
        )
    )


Policy = Callable[[Term, Sequence[CoupledDT], PTRS], "MultiDistribution[Term] | None"]


def _first_occurrences(args: tuple[Term, ...], i: int, redex: Term) -> dict[int, MirrorChoice]:
    out: dict[int, MirrorChoice] = {}
    for k, s in enumerate(args, 1):
        if k == i:
            continue
        pos = next((p for p, u in s.positions() if u == redex), None)
        if pos is not None:
            out[k] = RewriteAt(pos)
    return out


def greedy_policy(mirror: bool = True) -> Policy:
    """Expansion policy: first applicable DT step, else leftmost innermost
    S-step; copies of the redex are rewritten along iff ``mirror``."""

    def policy(a: Term, P: Sequence[CoupledDT], S: PTRS) -> MultiDistribution[Term] | None:
        args = _args(a)
        for i, s in enumerate(args, 1):
            if not is_normal_form(s, S.lhss):
                continue
            for dt in P:
                sigma = match(dt.lhs_sharp, s)
                if sigma is None:
                    continue
                redex = apply(dt.lhs, sigma)
                ms = _first_occurrences(args, i, redex) if mirror else {}
                if ms and dt.proj2() not in S.rules:
                    ms = {}
                return pptrs_step(a, i, dt, sigma, ms, P, S)
        eng = Engine(S)
        for i, s in enumerate(args, 1):
            rs = eng.redexes(s)
            if rs:
                d = rs[0]
                u = subterm_at(s, d.position)
                ms = _first_occurrences(args, i, u) if mirror else {}
                return s_step(a, i, d.position, S.rules[d.rule_index], ms, S)
        return None

    return policy


def chain_leaf_mass(
    P: Sequence[CoupledDT],
    S: PTRS,
    root: Term,
    policy: Policy,
    depth: int,
) -> Fraction:
    """Leaf mass of the chain tree that ``policy`` unfolds, cut at ``depth``."""
    dist: dict[Term, Fraction] = {root: Fraction(1)}
    leaves = Fraction(0)
    for level in range(depth + 1):
        nxt: dict[Term, Fraction] = defaultdict(Fraction)
        for t, p in dist.items():
            succ = policy(t, P, S)
            if succ is None:
                leaves += p
            elif level < depth:
                for q, u in succ:
                    nxt[u] += p * q
        dist = nxt
    return leaves
