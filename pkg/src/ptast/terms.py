"""First-order terms, substitutions, positions, matching and unification."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping

Position = tuple[int, ...]
Substitution = dict[str, "Term"]

ROOT: Position = ()


class Kind(Enum):
    CONSTRUCTOR = "constructor"
    DEFINED = "defined"
    TUPLE = "tuple"
    COMPOUND = "compound"


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    kind: Kind = Kind.CONSTRUCTOR
    # printed form; tuple symbols print upper-cased, compounds as c<n>
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.name, self.arity, self.kind.value)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        if self.label is not None:
            return self.label
        if self.kind is Kind.COMPOUND:
            return f"c{self.arity}"
        if self.kind is Kind.TUPLE:
            return self.name.upper()
        return self.name

    def __repr__(self) -> str:
        return f"Symbol({self.name!r}, {self.arity}, {self.kind.name})"

    @property
    def is_compound(self) -> bool:
        return self.kind is Kind.COMPOUND


def compound(n: int) -> Symbol:
    return Symbol("c", n, Kind.COMPOUND)


class InvalidPosition(ValueError):
    pass


class Term:
    """Immutable first-order term; structural equality is semantic equality."""

    __slots__ = ()

    def variables(self) -> set[str]:
        out: set[str] = set()
        _collect_vars(self, out)
        return out

    def var_list(self) -> list[str]:
        """Variables in left-to-right order of first occurrence."""
        seen: dict[str, None] = {}
        for t in self.subterms():
            if isinstance(t, Var):
                seen.setdefault(t.name, None)
        return list(seen)

    def subterms(self) -> Iterator[Term]:
        stack: list[Term] = [self]
        while stack:
            t = stack.pop()
            yield t
            if isinstance(t, App):
                stack.extend(reversed(t.args))

    def positions(self) -> Iterator[tuple[Position, Term]]:
        """All (position, subterm) pairs in preorder, i.e. lexicographic order."""
        stack: list[tuple[Position, Term]] = [(ROOT, self)]
        while stack:
            pos, t = stack.pop()
            yield pos, t
            if isinstance(t, App):
                for i in range(len(t.args), 0, -1):
                    stack.append((pos + (i,), t.args[i - 1]))

    def size(self) -> int:
        return sum(1 for _ in self.subterms())

    def depth(self) -> int:
        if isinstance(self, App) and self.args:
            return 1 + max(a.depth() for a in self.args)
        return 0


class Var(Term):
    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("V", name))

    def __eq__(self, other: object) -> bool:
        return self is other or (isinstance(other, Var) and other.name == self.name)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Var({self.name!r})"

    def __str__(self) -> str:
        return self.name

    def __reduce__(self):
        return (Var, (self.name,))


class App(Term):
    __slots__ = ("symbol", "args", "_hash")

    def __init__(self, symbol: Symbol, args: Iterable[Term] = ()):
        args = tuple(args)
        if len(args) != symbol.arity:
            raise ValueError(
                f"symbol {symbol} has arity {symbol.arity}, got {len(args)} arguments"
            )
        self.symbol = symbol
        self.args = args
        self._hash = hash((symbol, args))

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, App) or self._hash != other._hash:
            return False
        # iterative, so deep terms such as g^1000(0) compare without recursion
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if type(a) is not type(b) or a._hash != b._hash:
                return False
            if isinstance(a, Var):
                if a.name != b.name:
                    return False
            elif a.symbol != b.symbol:
                return False
            else:
                stack.extend(zip(a.args, b.args))
        return True

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"App({self.symbol!r}, {self.args!r})"

    def __str__(self) -> str:
        if not self.args:
            return str(self.symbol)
        return f"{self.symbol}({','.join(str(a) for a in self.args)})"

    def __reduce__(self):
        return (App, (self.symbol, self.args))

    @property
    def root(self) -> Symbol:
        return self.symbol


def _collect_vars(t: Term, out: set[str]) -> None:
    for s in t.subterms():
        if isinstance(s, Var):
            out.add(s.name)


def root(t: Term) -> Symbol | None:
    return t.symbol if isinstance(t, App) else None


# ---------------------------------------------------------------------------
# substitutions

def apply(t: Term, sigma: Mapping[str, Term]) -> Term:
    if not sigma:
        return t
    if isinstance(t, Var):
        return sigma.get(t.name, t)
    new_args = tuple(apply(a, sigma) for a in t.args)
    if all(n is o for n, o in zip(new_args, t.args)):
        return t
    return App(t.symbol, new_args)


def compose(s1: Mapping[str, Term], s2: Mapping[str, Term]) -> Substitution:
    """The substitution ``t -> apply(apply(t, s1), s2)``."""
    out = {x: apply(t, s2) for x, t in s1.items()}
    for x, t in s2.items():
        out.setdefault(x, t)
    return {x: t for x, t in out.items() if not (isinstance(t, Var) and t.name == x)}


# ---------------------------------------------------------------------------
# positions

def subterm_at(t: Term, pos: Position) -> Term:
    for i in pos:
        if not isinstance(t, App) or not 1 <= i <= len(t.args):
            raise InvalidPosition(f"position {pos} is not valid")
        t = t.args[i - 1]
    return t


def replace_at(t: Term, pos: Position, u: Term) -> Term:
    return replace_path(t, pos, u)[0]


def replace_path(t: Term, pos: Position, u: Term) -> list[Term]:
    """Like replace_at, but return the new nodes along ``pos`` from the root down."""
    spine = [t]
    for i in pos:
        node = spine[-1]
        if not isinstance(node, App) or not 1 <= i <= len(node.args):
            raise InvalidPosition(f"position {pos} is not valid")
        spine.append(node.args[i - 1])
    new = [u]
    for node, i in zip(reversed(spine[:-1]), reversed(pos)):
        args = list(node.args)
        args[i - 1] = new[-1]
        new.append(App(node.symbol, args))
    new.reverse()
    return new


def is_valid_position(t: Term, pos: Position) -> bool:
    try:
        subterm_at(t, pos)
    except InvalidPosition:
        return False
    return True


# ---------------------------------------------------------------------------
# matching and unification

def match(pattern: Term, subject: Term) -> Substitution | None:
    """Return sigma with ``apply(pattern, sigma) == subject``, or None."""
    sigma: Substitution = {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if isinstance(p, Var):
            bound = sigma.get(p.name)
            if bound is None:
                sigma[p.name] = s
            elif bound != s:
                return None
        elif isinstance(s, App) and s.symbol == p.symbol:
            stack.extend(zip(p.args, s.args))
        else:
            return None
    return sigma


def occurs(x: str, t: Term) -> bool:
    return any(isinstance(s, Var) and s.name == x for s in t.subterms())


def unify(s: Term, t: Term) -> Substitution | None:
    """Most general unifier with occurs check; the result is idempotent."""
    sigma: Substitution = {}
    eqs = [(s, t)]
    while eqs:
        a, b = eqs.pop()
        a = _walk(a, sigma)
        b = _walk(b, sigma)
        if a == b:
            continue
        if isinstance(b, Var) and not isinstance(a, Var):
            a, b = b, a
        if isinstance(a, Var):
            b_full = _resolve(b, sigma)
            if occurs(a.name, b_full):
                return None
            sigma[a.name] = b_full
            continue
        if a.symbol != b.symbol:
            return None
        eqs.extend(zip(a.args, b.args))
    return {x: _resolve(u, sigma) for x, u in sigma.items()}


def _walk(t: Term, sigma: Substitution) -> Term:
    while isinstance(t, Var) and t.name in sigma:
        t = sigma[t.name]
    return t


def _resolve(t: Term, sigma: Substitution) -> Term:
    if isinstance(t, Var):
        u = _walk(t, sigma)
        return u if isinstance(u, Var) else _resolve(u, sigma)
    if not any(v in sigma for v in t.variables()):
        return t
    return App(t.symbol, [_resolve(a, sigma) for a in t.args])


# ---------------------------------------------------------------------------
# renaming and fresh variables

class FreshVars:
    """Monotone counter producing names outside the user namespace."""

    def __init__(self, prefix: str = "_v"):
        self.prefix = prefix
        self._count = itertools.count()

    def __call__(self) -> Var:
        return Var(f"{self.prefix}{next(self._count)}")


def rename_apart(t: Term, fresh: FreshVars) -> Term:
    return apply(t, {x: fresh() for x in t.var_list()})


# ---------------------------------------------------------------------------
# normal forms and icap

def is_redex(t: Term, lhss: Iterable[Term]) -> bool:
    return isinstance(t, App) and any(
        isinstance(l, App) and l.symbol == t.symbol and match(l, t) is not None
        for l in lhss
    )


def is_normal_form(t: Term, lhss: Iterable[Term]) -> bool:
    lhss = list(lhss)
    roots = {l.symbol for l in lhss if isinstance(l, App)}
    return not any(
        isinstance(s, App) and s.symbol in roots and is_redex(s, lhss)
        for s in t.subterms()
    )


def icap(
    t: Term,
    lhss: Iterable[Term],
    context: Term | None = None,
    fresh: FreshVars | None = None,
) -> Term:
    """Replace every subterm that may still be rewritten by a fresh variable.

    Variables are kept: they stand for normal forms. ``context`` is a term
    whose instance must stay in normal form (the left-hand side the
    variables come from); unifiers that make it reducible are discarded.
    """
    lhss = [l for l in lhss if isinstance(l, App)]
    fresh = fresh or FreshVars()
    renamer = FreshVars("_w")

    def cap(u: Term) -> Term:
        if isinstance(u, Var):
            return u
        capped = App(u.symbol, [cap(a) for a in u.args])
        for l in lhss:
            if l.symbol != u.symbol:
                continue
            l2 = rename_apart(l, renamer)
            theta = unify(capped, l2)
            if theta is None:
                continue
            redex = apply(l2, theta)
            if not all(is_normal_form(a, lhss) for a in redex.args):
                continue
            if context is not None and not is_normal_form(apply(context, theta), lhss):
                continue
            return fresh()
        return capped

    return cap(t)
