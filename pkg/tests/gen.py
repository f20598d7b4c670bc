"""Seeded generators for terms, substitutions and small rewrite systems."""

from __future__ import annotations

import random

from ptast.ptrs import PTRS, parse_ptrs
from ptast.terms import App, Kind, Symbol, Term, Var

F = Symbol("f", 2, Kind.DEFINED)
G = Symbol("g", 1, Kind.DEFINED)
A = Symbol("a", 0, Kind.CONSTRUCTOR)
S = Symbol("s", 1, Kind.CONSTRUCTOR)
SIGNATURE = [F, G, A, S]
VARS = ["x", "y", "z", "u"]


def term(rng: random.Random, depth: int = 3, variables: list[str] = VARS, symbols=SIGNATURE) -> Term:
    if depth == 0 or rng.random() < 0.25:
        if variables and rng.random() < 0.6:
            return Var(rng.choice(variables))
        consts = [s for s in symbols if s.arity == 0]
        return App(rng.choice(consts))
    f = rng.choice(symbols)
    return App(f, [term(rng, depth - 1, variables, symbols) for _ in range(f.arity)])


def ground(rng: random.Random, depth: int = 3, symbols=SIGNATURE) -> Term:
    return term(rng, depth, [], symbols)


def substitution(rng: random.Random, names, depth: int = 2) -> dict[str, Term]:
    return {x: term(rng, depth) for x in names}


# small deterministic systems over 0, s, c and f, g, h

_CONS = [("0", 0), ("s", 1), ("c", 2)]
_DEFS = [("f", 1), ("g", 2), ("h", 1)]


def _pattern(rng: random.Random, seen: set[str], depth: int) -> str:
    if depth == 0 or rng.random() < 0.4:
        v = rng.choice("xyz")
        seen.add(v)
        return v
    name, arity = rng.choice(_CONS)
    if arity == 0:
        return name
    return f"{name}({','.join(_pattern(rng, seen, depth - 1) for _ in range(arity))})"


def _rhs(rng: random.Random, variables: set[str], depth: int) -> str:
    if depth == 0 or rng.random() < 0.3:
        if variables and rng.random() < 0.8:
            return rng.choice(sorted(variables))
        return "0"
    name, arity = rng.choice(_CONS + _DEFS)
    if arity == 0:
        return name
    return f"{name}({','.join(_rhs(rng, variables, depth - 1) for _ in range(arity))})"


def deterministic_system(rng: random.Random, name: str) -> PTRS:
    lines = []
    for _ in range(rng.randint(1, 3)):
        f, arity = rng.choice(_DEFS)
        seen: set[str] = set()
        lhs = f"{f}({','.join(_pattern(rng, seen, 2) for _ in range(arity))})"
        lines.append(f"  {lhs} -> {{1 : {_rhs(rng, seen, 2)}}}")
    return parse_ptrs("(VAR x y z)\n(RULES\n" + "\n".join(lines) + "\n)\n", name)
