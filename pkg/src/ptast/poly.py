"""Polynomials, polynomial interpretations and coefficient constraints.

A :class:`Poly` has rational coefficients over two kinds of variables:
term variables (``str``) and unknown coefficients (``int`` indices into an
:class:`Unknowns` registry). Interpretations of function symbols are
polynomials over the placeholder variables ``x1, ..., xn``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

from ptast.ptrs import MultiDistribution
from ptast.terms import App, Kind, Symbol, Term, Var

Coeff = Fraction
VarKey = Union[str, int]
Mono = tuple[tuple[VarKey, int], ...]

ONE: Mono = ()


def _key(item: tuple[VarKey, int]) -> tuple[bool, VarKey]:
    # term variables before unknowns; never compares str with int
    return (isinstance(item[0], int), item[0])


def _mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    exps: dict[VarKey, int] = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items(), key=_key))


class Poly:
    """Immutable sparse polynomial with Fraction coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Mono, Fraction | int] | None = None):
        self.terms: dict[Mono, Fraction] = {
            m: Fraction(c) for m, c in (terms or {}).items() if c != 0
        }

    @staticmethod
    def const(c: Fraction | int) -> Poly:
        return Poly({ONE: c})

    @staticmethod
    def var(x: VarKey) -> Poly:
        return Poly({((x, 1),): 1})

    # arithmetic ----------------------------------------------------------

    def __add__(self, other: Poly | int | Fraction) -> Poly:
        other = _lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Poly | int | Fraction) -> Poly:
        return self + (-_lift(other))

    def __rsub__(self, other: Poly | int | Fraction) -> Poly:
        return _lift(other) - self

    def __mul__(self, other: Poly | int | Fraction) -> Poly:
        if not isinstance(other, Poly):
            return Poly({m: c * other for m, c in self.terms.items()})
        out: dict[Mono, Fraction] = {}
        for (m1, c1), (m2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            m = _mono_mul(m1, m2)
            out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    # inspection ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def constant(self) -> Fraction:
        return self.terms.get(ONE, Fraction(0))

    def coefficient(self, mono: Mono) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    def variables(self) -> set[VarKey]:
        return {v for m in self.terms for v, _ in m}

    def unknowns(self) -> set[int]:
        return {v for v in self.variables() if isinstance(v, int)}

    def max_exponent(self) -> int:
        return max((e for m in self.terms for _, e in m), default=0)

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def split(self) -> dict[Mono, Poly]:
        """Group by monomials over term variables.

        Returns ``{m: c_m}`` where each ``c_m`` is a polynomial over the
        unknowns only and ``self = sum(c_m * m)``.
        """
        out: dict[Mono, dict[Mono, Fraction]] = {}
        for m, c in self.terms.items():
            tv = tuple(p for p in m if isinstance(p[0], str))
            uk = tuple(p for p in m if isinstance(p[0], int))
            d = out.setdefault(tv, {})
            d[uk] = d.get(uk, 0) + c
        return {m: Poly(d) for m, d in out.items()}

    # substitution and evaluation -------------------------------------------

    def substitute(self, mapping: Mapping[VarKey, Poly]) -> Poly:
        """Simultaneous substitution of variables by polynomials."""
        out = Poly()
        powers: dict[tuple[VarKey, int], Poly] = {}
        for m, c in self.terms.items():
            acc = Poly.const(c)
            for v, e in m:
                if v in mapping:
                    pw = powers.get((v, e))
                    if pw is None:
                        pw = Poly.const(1)
                        for _ in range(e):
                            pw = pw * mapping[v]
                        powers[(v, e)] = pw
                    acc = acc * pw
                else:
                    acc = acc * Poly({((v, e),): 1})
            out = out + acc
        return out

    def evaluate(self, values: Mapping[VarKey, int | Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            prod = c
            for v, e in m:
                prod *= Fraction(values[v]) ** e
            total += prod
        return total

    def assign(self, values: Mapping[VarKey, int | Fraction]) -> Poly:
        """Partially evaluate: replace the given variables by numbers."""
        return self.substitute({v: Poly.const(x) for v, x in values.items()})

    # printing --------------------------------------------------------------

    def sorted_terms(self) -> list[tuple[Mono, Fraction]]:
        def order(item: tuple[Mono, Fraction]):
            m, _ = item
            return (sum(e for _, e in m), [_key(p) + (p[1],) for p in m])

        return sorted(self.terms.items(), key=order)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = [
                (f"u{v}" if isinstance(v, int) else v) + (f"^{e}" if e > 1 else "")
                for v, e in m
            ]
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(f"{c}*" + "*".join(factors))
        s = " + ".join(parts)
        return s.replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Poly({self})"


def _lift(x: Poly | int | Fraction) -> Poly:
    return x if isinstance(x, Poly) else Poly.const(x)


def placeholder(i: int) -> str:
    """Name of the i-th argument variable (1-based) in symbol interpretations."""
    return f"x{i}"


# ---------------------------------------------------------------------------
# unknowns and templates

@dataclass
class Unknowns:
    """Registry of unknown coefficients with their natural-number domains."""

    names: list[str] = field(default_factory=list)
    lower: list[int] = field(default_factory=list)

    def new(self, name: str, lower: int = 0) -> Poly:
        self.names.append(name)
        self.lower.append(lower)
        return Poly.var(len(self.names) - 1)

    def __len__(self) -> int:
        return len(self.names)


LINEAR = "linear"
MULTILINEAR = "multilinear"
DEGREES = (LINEAR, MULTILINEAR)


def template(
    f: Symbol, unknowns: Unknowns, degree: str = LINEAR, monotone: bool = False
) -> Poly:
    """A polynomial over ``x1..xn`` with fresh unknown coefficients.

    In monotone mode every coefficient of a single variable ``xi`` is at
    least 1, which makes the polynomial strictly monotone in each argument.
    """
    if degree not in DEGREES:
        raise ValueError(f"unknown degree {degree!r}")
    n = f.arity
    if degree == LINEAR:
        subsets: Iterable[tuple[int, ...]] = [()] + [(i,) for i in range(1, n + 1)]
    else:
        subsets = [c for k in range(n + 1) for c in itertools.combinations(range(1, n + 1), k)]
    p = Poly()
    for s in subsets:
        tag = "".join(map(str, s)) or "0"
        lo = 1 if monotone and len(s) == 1 else 0
        u = unknowns.new(f"{f}_{tag}", lo)
        mono = Poly({tuple((placeholder(i), 1) for i in s): 1})
        p = p + u * mono
    return p


def additive(n: int) -> Poly:
    """x1 + ... + xn, the fixed interpretation of compound symbols."""
    return sum((Poly.var(placeholder(i)) for i in range(1, n + 1)), Poly())


class UnmappedSymbol(KeyError):
    pass


class Interpretation:
    """Map from symbols to polynomials over placeholder variables.

    Compound symbols are interpreted additively unless mapped explicitly.
    """

    def __init__(self, polys: Mapping[Symbol, Poly] | None = None, com_additive: bool = True):
        self.polys: dict[Symbol, Poly] = dict(polys or {})
        self.com_additive = com_additive
        self._cache: dict[Term, Poly] = {}

    def __getitem__(self, f: Symbol) -> Poly:
        p = self.polys.get(f)
        if p is None:
            if f.kind is Kind.COMPOUND and self.com_additive:
                return additive(f.arity)
            raise UnmappedSymbol(f"no interpretation for symbol {f}")
        return p

    def __contains__(self, f: Symbol) -> bool:
        return f in self.polys or (f.kind is Kind.COMPOUND and self.com_additive)

    def items(self) -> Iterator[tuple[Symbol, Poly]]:
        return iter(sorted(self.polys.items(), key=lambda kv: _symbol_order(kv[0])))

    def instantiate(self, model: Mapping[int, int]) -> Interpretation:
        vals = {i: Poly.const(v) for i, v in model.items()}
        return Interpretation(
            {f: p.substitute(vals) for f, p in self.polys.items()}, self.com_additive
        )

    def __str__(self) -> str:
        lines = []
        for f, p in self.items():
            args = ",".join(placeholder(i) for i in range(1, f.arity + 1))
            lhs = f"{f}({args})" if f.arity else str(f)
            lines.append(f"{lhs} = {p}")
        return "\n".join(lines)


def _symbol_order(f: Symbol) -> tuple:
    kinds = {Kind.TUPLE: 0, Kind.DEFINED: 1, Kind.CONSTRUCTOR: 2, Kind.COMPOUND: 3}
    return (kinds[f.kind], f.name, f.arity)


def interpret(t: Term, interp: Interpretation) -> Poly:
    """Pol(t): the homomorphic image of ``t``."""
    cached = interp._cache.get(t)
    if cached is not None:
        return cached
    if isinstance(t, Var):
        out = Poly.var(t.name)
    else:
        f = interp[t.symbol]
        args = {placeholder(i): interpret(a, interp) for i, a in enumerate(t.args, 1)}
        out = f.substitute(args)
    interp._cache[t] = out
    return out


def expected_poly(mu: MultiDistribution[Term], interp: Interpretation) -> Poly:
    """sum_j p_j * Pol(r_j)."""
    return sum((interpret(r, interp) * p for p, r in mu), Poly())


def is_multilinear(p: Poly) -> bool:
    return p.max_exponent() <= 1


def is_monotone(p: Poly, arity: int) -> bool:
    """The sufficient syntactic test: each xi has a linear coefficient >= 1."""
    return all(p.coefficient(((placeholder(i), 1),)) >= 1 for i in range(1, arity + 1))


def is_weakly_monotone(p: Poly) -> bool:
    return all(c >= 0 for c in p.terms.values())


# ---------------------------------------------------------------------------
# absolute positiveness

GEQ = ">="
GT = ">"


@dataclass(frozen=True)
class Atom:
    """``lhs >= rhs`` or ``lhs > rhs`` for all natural values of term variables."""

    rel: str
    lhs: Poly
    rhs: Poly
    label: str = ""

    def __str__(self) -> str:
        return f"{self.lhs} {self.rel} {self.rhs}"

    def coefficient_conditions(self) -> list[Poly]:
        """Polynomials over unknowns that must all be >= 0 (absolute positiveness).

        Rational coefficients are cleared by multiplying with the LCM of
        their denominators.
        """
        diff = self.lhs - self.rhs
        parts = diff.split()
        if self.rel == GT:
            parts[ONE] = parts.get(ONE, Poly()) - 1
        out = []
        for m in sorted(parts, key=lambda m: [_key(p) + (p[1],) for p in m]):
            c = parts[m]
            den = math.lcm(*(q.denominator for q in c.terms.values())) if c.terms else 1
            out.append(c * den)
        return out

    def holds(self) -> bool:
        """Decide the atom for concrete polynomials (no unknowns)."""
        diff = self.lhs - self.rhs
        if diff.unknowns():
            raise ValueError("atom still contains unknowns")
        if any(c < 0 for c in diff.terms.values()):
            return False
        return self.rel == GEQ or diff.constant() >= 1


def geq_constraint(p: Poly, q: Poly, label: str = "") -> Atom:
    return Atom(GEQ, p, q, label)


def gt_constraint(p: Poly, q: Poly, label: str = "") -> Atom:
    return Atom(GT, p, q, label)


@dataclass
class Group:
    """At least one alternative (a conjunction of atoms) must hold."""

    alternatives: list[list[Atom]]
    label: str = ""


@dataclass
class ConstraintSet:
    unknowns: Unknowns = field(default_factory=Unknowns)
    atoms: list[Atom] = field(default_factory=list)
    groups: list[Group] = field(default_factory=list)
    source: str = ""

    def add(self, atom: Atom) -> None:
        self.atoms.append(atom)

    def add_group(self, alternatives: list[list[Atom]], label: str = "") -> None:
        self.groups.append(Group(alternatives, label))


# ---------------------------------------------------------------------------
# reading and writing concrete interpretations

def mono_key(m: Mono) -> str:
    """Printed monomial, ``1`` for the constant: ``x1*x2``."""
    if not m:
        return "1"
    return "*".join(str(v) + (f"^{e}" if e > 1 else "") for v, e in m)


def parse_mono(text: str) -> Mono:
    text = text.strip()
    if text == "1":
        return ONE
    exps: dict[VarKey, int] = {}
    for f in text.split("*"):
        name, _, e = f.strip().partition("^")
        exps[name] = exps.get(name, 0) + (int(e) if e else 1)
    return tuple(sorted(exps.items(), key=_key))


def coefficient_map(p: Poly) -> dict[str, str]:
    """JSON-friendly form: monomial key -> rational string."""
    return {mono_key(m): str(c) for m, c in p.sorted_terms()}


def from_coefficient_map(cmap: Mapping[str, str | int]) -> Poly:
    return Poly({parse_mono(k): Fraction(v) for k, v in cmap.items()})


def parse_poly(text: str) -> Poly:
    """Read a concrete polynomial such as ``4 + 3*x1 + 1/2*x1*x2``."""
    out = Poly()
    for part in text.replace("-", "+-").split("+"):
        part = part.strip()
        if not part:
            continue
        sign = 1
        if part.startswith("-"):
            sign, part = -1, part[1:].strip()
        coeff = Fraction(1)
        factors = []
        for f in part.split("*"):
            f = f.strip()
            if f[0].isdigit():
                coeff *= Fraction(f)
            else:
                factors.append(f)
        out = out + Poly({parse_mono("*".join(factors) or "1"): sign * coeff})
    return out


def interpretation_from_strings(
    polys: Mapping[str, str], symbols: Iterable[Symbol]
) -> Interpretation:
    """Build an interpretation keyed by symbol names; tuple symbols may be
    given by their printed name (``MINUS``) or as ``minus#``."""
    out: dict[Symbol, Poly] = {}
    for f in symbols:
        for key in (str(f), f"{f.name}#" if f.kind is Kind.TUPLE else f.name):
            if key in polys:
                out[f] = parse_poly(polys[key])
                break
    return Interpretation(out)
