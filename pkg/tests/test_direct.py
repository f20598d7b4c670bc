import pytest

from ptast import corpus
from ptast.direct import (
    as_rules,
    check_ast_direct,
    check_terminating_classic,
    prove_ast_direct,
    prove_terminating_classic,
)
from ptast.poly import MULTILINEAR, interpretation_from_strings
from ptast.ptrs import parse_ptrs


def test_minus_terminates_with_known_witness():
    system = corpus.load("minus")
    witness = interpretation_from_strings({"minus": "x1 + x2 + 1", "s": "x1 + 1", "0": "0"},
                                          system.symbols())
    assert check_terminating_classic(as_rules(system), witness).ok
    assert prove_terminating_classic(system) is not None


def test_div_is_out_of_reach_for_plain_interpretations():
    assert prove_terminating_classic(corpus.load("div")) is None


def test_empty_rule_set():
    assert prove_terminating_classic([]) is not None
    assert prove_ast_direct(parse_ptrs("(VAR)\n(RULES\n)\n")) is not None


def test_pdiv_needs_dependency_pairs():
    assert prove_ast_direct(corpus.load("pdiv")) is None
    assert prove_ast_direct(corpus.load("pdiv"), degree=MULTILINEAR) is None


def test_incompl_needs_a_larger_bound():
    assert prove_ast_direct(corpus.load("incompl")) is None
    proof = prove_ast_direct(corpus.load("incompl"), coeff_bound=4)
    assert {str(f): str(p) for f, p in proof.interpretation.items()} == {
        "b": "3", "f": "2 + x1", "g": "4", "stop": "0"}


def test_r1_is_ast():
    proof = prove_ast_direct(corpus.load("r1"))
    assert proof is not None and proof.strict_branches


def test_checker_rejects_non_monotone_and_weak():
    system = corpus.load("rw")
    flat = interpretation_from_strings({"g": "1", "0": "0"}, system.symbols())
    report = check_ast_direct(system, flat)
    assert not report.ok and any("monotone" in p for p in report.problems)
    weak = interpretation_from_strings({"g": "x1", "0": "0"}, system.symbols())
    report = check_ast_direct(system, weak)
    assert not report.ok and any("strictly" in p for p in report.problems)


def test_checker_reports_missing_symbols():
    system = corpus.load("rw")
    report = check_ast_direct(system, interpretation_from_strings({}, system.symbols()))
    assert not report.ok
