"""Probabilistic rewrite rules, multi-distributions and the text format."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Generic, Iterable, Iterator, Sequence, TypeVar

from ptast.terms import App, Kind, Symbol, Term, Var

T = TypeVar("T")
U = TypeVar("U")


class ProbabilityError(ValueError):
    pass


class MultiDistribution(Generic[T]):
    """Finite multiset of ``(probability, payload)`` pairs with total mass 1.

    Entries are kept in a list: equal pairs are distinct members.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[tuple[Fraction | int | str, T]]):
        es = tuple((Fraction(p), x) for p, x in entries)
        if not es:
            raise ProbabilityError("a multi-distribution needs at least one entry")
        for p, _ in es:
            if not 0 < p <= 1:
                raise ProbabilityError(f"probability {p} is not in (0, 1]")
        total = sum(p for p, _ in es)
        if total != 1:
            raise ProbabilityError(f"probabilities sum to {total}, not 1")
        self.entries = es

    @classmethod
    def point(cls, x: T) -> MultiDistribution[T]:
        return cls([(Fraction(1), x)])

    def __iter__(self) -> Iterator[tuple[Fraction, T]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, j: int) -> tuple[Fraction, T]:
        return self.entries[j]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MultiDistribution) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        return f"MultiDistribution({list(self.entries)!r})"

    def __str__(self) -> str:
        return "{" + ", ".join(f"{p} : {x}" for p, x in self.entries) + "}"

    @property
    def support(self) -> list[T]:
        return [x for _, x in self.entries]

    @property
    def probabilities(self) -> list[Fraction]:
        return [p for p, _ in self.entries]

    def map(self, f: Callable[[T], U]) -> MultiDistribution[U]:
        return MultiDistribution((p, f(x)) for p, x in self.entries)

    def is_trivial(self) -> bool:
        return len(self.entries) == 1


@dataclass(frozen=True)
class Rule:
    """A non-probabilistic rewrite rule."""

    lhs: Term
    rhs: Term

    def __str__(self) -> str:
        return f"{self.lhs} -> {self.rhs}"


@dataclass(frozen=True)
class ProbRule:
    lhs: Term
    rhs: MultiDistribution[Term]

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise ValueError(f"left-hand side {self.lhs} is a variable")
        lvars = self.lhs.variables()
        for r in self.rhs.support:
            extra = r.variables() - lvars
            if extra:
                raise ValueError(
                    f"variables {sorted(extra)} of {r} do not occur in {self.lhs}"
                )

    @property
    def is_deterministic(self) -> bool:
        return len(self.rhs) == 1

    def __str__(self) -> str:
        if self.is_deterministic:
            return f"{self.lhs} -> {self.rhs[0][1]}"
        return f"{self.lhs} -> {self.rhs}"


class PTRS:
    """A finite set of probabilistic rules, kept in source order.

    Symbol kinds are stored in the symbols themselves. Use
    :func:`classify` (or the parser) to assign them from the rules;
    sub-systems built from an existing system keep the parent's kinds.
    """

    def __init__(self, rules: Iterable[ProbRule] = (), name: str = ""):
        self.rules: tuple[ProbRule, ...] = tuple(rules)
        self.name = name

    def __iter__(self) -> Iterator[ProbRule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PTRS) and self.rules == other.rules

    def __hash__(self) -> int:
        return hash(self.rules)

    def __repr__(self) -> str:
        return f"PTRS({len(self.rules)} rules)"

    def __str__(self) -> str:
        return print_ptrs(self)

    @property
    def lhss(self) -> list[Term]:
        return [r.lhs for r in self.rules]

    def rules_for(self, f: Symbol) -> list[ProbRule]:
        return [r for r in self.rules if isinstance(r.lhs, App) and r.lhs.symbol == f]

    def index(self, rule: ProbRule) -> int:
        return self.rules.index(rule)

    def subset(self, keep: Iterable[ProbRule]) -> PTRS:
        keep = set(keep)
        return PTRS([r for r in self.rules if r in keep], self.name)

    @property
    def is_deterministic(self) -> bool:
        return all(r.is_deterministic for r in self.rules)

    def symbols(self) -> set[Symbol]:
        out: set[Symbol] = set()
        for r in self.rules:
            for t in [r.lhs, *r.rhs.support]:
                out.update(s.symbol for s in t.subterms() if isinstance(s, App))
        return out

    def defined_symbols(self) -> set[Symbol]:
        return {r.lhs.symbol for r in self.rules}


def classify_symbols(rules: Iterable[ProbRule]) -> tuple[set[Symbol], set[Symbol]]:
    """Split the symbols of ``rules`` into (defined, constructors) by lhs roots."""
    rules = list(rules)
    defined_keys = {(r.lhs.symbol.name, r.lhs.symbol.arity) for r in rules}
    defined: set[Symbol] = set()
    constructors: set[Symbol] = set()
    for r in rules:
        for t in [r.lhs, *r.rhs.support]:
            for s in t.subterms():
                if isinstance(s, App) and s.symbol.kind in (Kind.CONSTRUCTOR, Kind.DEFINED):
                    key = (s.symbol.name, s.symbol.arity)
                    sym = Symbol(key[0], key[1],
                                 Kind.DEFINED if key in defined_keys else Kind.CONSTRUCTOR)
                    (defined if key in defined_keys else constructors).add(sym)
    return defined, constructors


def classify(rules: Iterable[ProbRule], name: str = "") -> PTRS:
    """Build a PTRS whose symbols carry kinds computed from the rules."""
    rules = list(rules)
    defined, _ = classify_symbols(rules)
    keys = {(f.name, f.arity) for f in defined}

    def rekind(t: Term) -> Term:
        if isinstance(t, Var):
            return t
        s = t.symbol
        if s.kind in (Kind.CONSTRUCTOR, Kind.DEFINED):
            kind = Kind.DEFINED if (s.name, s.arity) in keys else Kind.CONSTRUCTOR
            if kind is not s.kind:
                s = Symbol(s.name, s.arity, kind)
        return App(s, [rekind(a) for a in t.args])

    return PTRS(
        [ProbRule(rekind(r.lhs), r.rhs.map(rekind)) for r in rules], name
    )


def np(rules: Iterable[ProbRule]) -> list[Rule]:
    """Non-probabilistic variant: one rule per support element, in order."""
    return [Rule(r.lhs, t) for r in rules for t in r.rhs.support]


def print_ptrs(system: PTRS) -> str:
    seen: dict[str, None] = {}
    for r in system.rules:
        for v in r.lhs.var_list():
            seen.setdefault(v, None)
    lines = ["(VAR" + "".join(f" {v}" for v in seen) + ")", "(RULES"]
    lines += [f"  {r}" for r in system.rules]
    lines.append(")")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<arrow>->)"
    r"|(?P<ident>[A-Za-z0-9][A-Za-z0-9_']*)|(?P<punct>[(){},:/])"
)
_COMPOUND_NAME = re.compile(r"c\d+")
_DEFAULT_VAR = re.compile(r"[u-z][A-Za-z0-9_']*")


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


@dataclass
class _Raw:
    """Parsed term before symbols are resolved."""

    name: str
    args: list[_Raw] | None
    line: int
    col: int


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def next(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.next()

    def at_block(self, name: str) -> bool:
        return (
            self.tok.text == "("
            and self.toks[self.i + 1].kind == "ident"
            and self.toks[self.i + 1].text == name
        )

    def term(self) -> _Raw:
        tok = self.tok
        if tok.kind != "ident":
            raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")
        self.next()
        if self.tok.text != "(":
            return _Raw(tok.text, None, tok.line, tok.col)
        self.next()
        args = [self.term()]
        while self.tok.text == ",":
            self.next()
            args.append(self.term())
        self.expect(")")
        return _Raw(tok.text, args, tok.line, tok.col)

    def number(self) -> Fraction:
        tok = self.tok
        if tok.kind != "ident" or not tok.text.isdigit():
            raise self.error(f"expected a probability, found {tok.text or 'end of input'!r}")
        self.next()
        num = int(tok.text)
        if self.tok.text == "/":
            self.next()
            dtok = self.tok
            if dtok.kind != "ident" or not dtok.text.isdigit():
                raise self.error("expected a denominator")
            self.next()
            if int(dtok.text) == 0:
                raise self.error("zero denominator", dtok)
            return Fraction(num, int(dtok.text))
        return Fraction(num)

    def rule(self) -> tuple[_Raw, list[tuple[Fraction, _Raw]], _Tok]:
        start = self.tok
        lhs = self.term()
        self.expect("->")
        if self.tok.text == "{":
            self.next()
            entries = [self.entry()]
            while self.tok.text == ",":
                self.next()
                entries.append(self.entry())
            self.expect("}")
        else:
            entries = [(Fraction(1), self.term())]
        return lhs, entries, start

    def entry(self) -> tuple[Fraction, _Raw]:
        p = self.number()
        self.expect(":")
        return p, self.term()


def parse_ptrs(text: str, name: str = "") -> PTRS:
    """Parse the rule-file format into a validated PTRS."""
    p = _Parser(text)
    declared: set[str] | None = None
    raw_rules: list[tuple[_Raw, list[tuple[Fraction, _Raw]], _Tok]] = []
    while p.tok.kind != "eof":
        if p.at_block("VAR"):
            p.next()
            p.next()
            declared = declared or set()
            while p.tok.kind == "ident":
                declared.add(p.next().text)
            p.expect(")")
        elif p.at_block("RULES"):
            p.next()
            p.next()
            while p.tok.text != ")":
                if p.tok.kind == "eof":
                    raise p.error("unterminated RULES block")
                raw_rules.append(p.rule())
            p.next()
        else:
            raw_rules.append(p.rule())

    def is_var(r: _Raw) -> bool:
        if r.args is not None:
            return False
        if declared is not None:
            return r.name in declared
        return bool(_DEFAULT_VAR.fullmatch(r.name))

    arities: dict[str, int] = {}

    def check(r: _Raw) -> None:
        if is_var(r):
            return
        if _COMPOUND_NAME.fullmatch(r.name):
            raise ParseError(f"symbol name {r.name!r} is reserved", r.line, r.col)
        n = len(r.args or [])
        if arities.setdefault(r.name, n) != n:
            raise ParseError(
                f"symbol {r.name!r} used with arity {n} and {arities[r.name]}", r.line, r.col
            )
        for a in r.args or []:
            check(a)

    for lhs, entries, _ in raw_rules:
        check(lhs)
        for _, r in entries:
            check(r)

    def build(r: _Raw) -> Term:
        if is_var(r):
            return Var(r.name)
        return App(Symbol(r.name, len(r.args or [])), [build(a) for a in r.args or []])

    rules = []
    for lhs, entries, start in raw_rules:
        l = build(lhs)
        if isinstance(l, Var):
            raise ParseError(f"left-hand side {l} is a variable", start.line, start.col)
        try:
            mu = MultiDistribution((q, build(r)) for q, r in entries)
            rules.append(ProbRule(l, mu))
        except ValueError as e:
            raise ParseError(str(e), start.line, start.col) from None
    return classify(rules, name)


def parse_term(text: str, system: PTRS | None = None, variables: Sequence[str] = ()) -> Term:
    """Parse a term over the signature of ``system``.

    Identifiers listed in ``variables`` become variables. Symbols of
    ``system`` keep their kind; anything else, including a known name used
    with another arity, is a fresh constructor.
    """
    p = _Parser(text)
    raw = p.term()
    if p.tok.kind != "eof":
        raise p.error(f"trailing input {p.tok.text!r}")
    known: dict[tuple[str, int], Symbol] = {}
    if system is not None:
        known = {(s.name, s.arity): s for s in system.symbols()}

    def build(r: _Raw) -> Term:
        if r.args is None and r.name in variables:
            return Var(r.name)
        n = len(r.args or [])
        sym = known.get((r.name, n))
        if sym is None:
            if _COMPOUND_NAME.fullmatch(r.name):
                raise ParseError(f"symbol name {r.name!r} is reserved", r.line, r.col)
            sym = Symbol(r.name, n)
        return App(sym, [build(a) for a in r.args or []])

    return build(raw)
