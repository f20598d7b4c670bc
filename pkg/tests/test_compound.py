import pytest

from ptast import corpus
from ptast.compound import (
    cont,
    dtuples,
    equivalent,
    make_compound,
    mark,
    normalize,
    tuple_labels,
    unmark,
)
from ptast.ptrs import parse_ptrs
from ptast.terms import App, Kind, Symbol, Var

x, y = Var("x"), Var("y")
G = Symbol("g", 1, Kind.DEFINED)


def test_cont_and_normalize_flatten_in_order():
    inner = make_compound([App(G, [x]), make_compound([])])
    t = make_compound([x, inner, y])
    assert cont(t) == [x, App(G, [x]), y]
    assert str(normalize(t)) == "c3(x,g(x),y)"
    assert cont(App(G, [x])) == [App(G, [x])]
    with pytest.raises(ValueError):
        normalize(App(G, [x]))


def test_equivalence_is_multiset_equality():
    assert equivalent(make_compound([x, y, x]), make_compound([y, make_compound([x, x])]))
    assert not equivalent(make_compound([x, y]), make_compound([x, x, y]))


def test_mark_and_unmark():
    t = App(G, [x])
    m = mark(t)
    assert m.symbol.kind is Kind.TUPLE and str(m) == "G(x)"
    assert unmark(m) == t
    with pytest.raises(ValueError):
        mark(x)


def test_tuple_labels_avoid_clashes():
    f, F = Symbol("f", 1, Kind.DEFINED), Symbol("F", 0, Kind.CONSTRUCTOR)
    assert tuple_labels([f, F]) == {"f": "f#"}
    assert tuple_labels([f]) == {"f": "F"}


def test_rw_tuple():
    (dt,) = dtuples(corpus.load("rw"))
    assert str(dt) == "<G(x), g(x)> -> {1/2 : <c0, x>, 1/2 : <c2(G(g(x)),G(x)), g(g(x))>}"
    assert str(dt.proj1()) == "G(x) -> {1/2 : c0, 1/2 : c2(G(g(x)),G(x))}"
    assert dt.proj2() == corpus.load("rw").rules[0]


def test_repeated_subterms_are_kept():
    (dt,) = dtuples(corpus.load("triple"))
    d = dt.rhs[0][1][0]
    assert str(d) == "c3(G(x),G(x),G(x))"


def test_with_tuples_replaces_compounds_only():
    (dt,) = dtuples(corpus.load("rw"))
    new = dt.with_tuples([make_compound([]), make_compound([x])])
    assert [r for _, (_, r) in new.rhs] == [r for _, (_, r) in dt.rhs]
    assert str(new.rhs[1][1][0]) == "c1(x)"


def test_empty_system_has_no_tuples():
    assert dtuples(parse_ptrs("(VAR)\n(RULES\n)\n")) == []
