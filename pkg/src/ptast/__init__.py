"""Almost-sure termination analysis for probabilistic term rewrite systems.

The package proves innermost almost-sure termination (iAST) of probabilistic
term rewrite systems with a probabilistic dependency pair framework, and
almost-sure termination (AST) with direct polynomial interpretations.
"""

from ptast.terms import App, Kind, Symbol, Term, Var
from ptast.ptrs import PTRS, MultiDistribution, ProbRule, parse_ptrs, parse_term

__all__ = [
    "App",
    "Kind",
    "MultiDistribution",
    "PTRS",
    "ProbRule",
    "Symbol",
    "Term",
    "Var",
    "parse_ptrs",
    "parse_term",
]

__version__ = "0.1.0"
