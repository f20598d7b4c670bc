"""Command-line interface: ``ptast prove | simulate | analyze``.

Exit status: 0 proved (or command succeeded), 1 input error, 2 unknown,
3 resource limit hit while simulating.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from ptast import certificate as cert
from ptast.compound import dtuples
from ptast.direct import prove_ast_direct
from ptast.dp_classic import dependency_pairs
from ptast.dp_prob import initial_problem, prob_dep_graph_dot, prove_iast
from ptast.poly import DEGREES, LINEAR, ConstraintSet
from ptast.proof import PROVED, UNKNOWN, ProofNode, Verdict
from ptast.ptrs import PTRS, ParseError, parse_ptrs, parse_term
from ptast.rewriting import DistributionLimitError, lift_exact, mc_estimate
from ptast.solver import SolverBudgetExceeded, smt_export

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNKNOWN = 2
EXIT_RESOURCE = 3


class InputError(Exception):
    pass


def load(path: str) -> PTRS:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"{path}: {e.strerror or e}") from None
    try:
        return parse_ptrs(text, Path(path).stem)
    except ParseError as e:
        raise InputError(f"{path}:{e}") from None


# ---------------------------------------------------------------------------
# prove

def run_dp(system: PTRS, args: argparse.Namespace) -> Verdict:
    return prove_iast(system, args.coeff_bound, args.degree, timeout=args.timeout / 1000)


def run_direct(system: PTRS, args: argparse.Namespace) -> Verdict:
    deadline = time.monotonic() + args.timeout / 1000
    note = ""
    try:
        proof = prove_ast_direct(system, args.coeff_bound, args.degree, deadline=deadline)
    except SolverBudgetExceeded as e:
        proof, note = None, str(e)
    node = cert.direct_node(system, proof)
    if note:
        node.params["summary"] = note
    return Verdict(PROVED if proof else UNKNOWN, "AST", node, note)


def cmd_prove(args: argparse.Namespace) -> int:
    system = load(args.file)
    methods = ["dp", "direct"] if args.method == "both" else [args.method]
    results: list[tuple[str, Verdict]] = []
    for m in methods:
        v = run_dp(system, args) if m == "dp" else run_direct(system, args)
        results.append((m, v))
        if v.proved:
            break
    decided = next(((m, v) for m, v in results if v.proved), results[0])
    if args.json:
        sys.stdout.write(cert.dumps(cert.certificate(system, decided[1], decided[0])))
    else:
        for m, v in results:
            print(f"[{m}] {v}")
            if v.proof is not None:
                print(v.proof.render())
        final = decided[1]
        print(f"{final.property} proved" if final.proved else "unknown: no proof found")
    return EXIT_OK if decided[1].proved else EXIT_UNKNOWN


# ---------------------------------------------------------------------------
# simulate

def cmd_simulate(args: argparse.Namespace) -> int:
    system = load(args.file)
    try:
        term = parse_term(args.term, system)
    except (ParseError, ValueError) as e:
        raise InputError(f"bad start term: {e}") from None
    if args.mc:
        est = mc_estimate(term, system, args.depth, args.samples, args.seed)
        print(f"{est:.6f}  (samples={args.samples}, max_steps={args.depth}, seed={args.seed})")
        return EXIT_OK
    try:
        masses = lift_exact(term, system, args.depth, size_limit=args.size_limit)
    except DistributionLimitError as e:
        print(f"resource error: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    print("n  |mu_n|")
    for n, m in enumerate(masses):
        print(f"{n}  {m}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze

def cmd_analyze(args: argparse.Namespace) -> int:
    system = load(args.file)
    print("dependency tuples:")
    for dt in dtuples(system):
        print(f"({dt.name}) {dt}")
    if system.is_deterministic:
        print("dependency pairs:")
        for p in dependency_pairs(system):
            print(f"({p.name}) {p}")
    if args.dot:
        Path(args.dot).write_text(prob_dep_graph_dot(initial_problem(system)), encoding="utf-8")
    if args.emit_smt:
        out = Path(args.emit_smt)
        out.mkdir(parents=True, exist_ok=True)
        stages: list[ConstraintSet] = []
        try:
            prove_iast(system, args.coeff_bound, args.degree, timeout=args.timeout / 1000,
                       observer=stages.append)
        except SolverBudgetExceeded:
            pass
        for k, cs in enumerate(stages, 1):
            cs.source = f"{system.name}: stage {k}: {cs.source}"
            (out / f"{system.name}-rpp-{k:02d}.smt2").write_text(
                smt_export(cs, args.coeff_bound), encoding="utf-8")
        print(f"wrote {len(stages)} SMT-LIB file(s) to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def _natural(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("expected a natural number")
    return n


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("expected a positive number")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ptast", description="(innermost) almost-sure termination of PTRSs")
    sub = p.add_subparsers(dest="command", required=True)

    def search_options(q: argparse.ArgumentParser) -> None:
        q.add_argument("--coeff-bound", type=_positive, default=2)
        q.add_argument("--degree", choices=DEGREES, default=LINEAR)
        q.add_argument("--timeout", type=_positive, default=60000, help="milliseconds per method")

    q = sub.add_parser("prove", help="prove iAST (dp) or AST (direct)")
    q.add_argument("file")
    q.add_argument("--method", choices=["dp", "direct", "both"], default="both")
    search_options(q)
    q.add_argument("--json", action="store_true", help="print the proof certificate as JSON")
    q.set_defaults(func=cmd_prove)

    q = sub.add_parser("simulate", help="probability of reaching a normal form")
    q.add_argument("file")
    q.add_argument("--term", required=True)
    q.add_argument("--depth", type=_natural, required=True)
    mode = q.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--mc", action="store_true")
    q.add_argument("--samples", type=_positive, default=10000)
    q.add_argument("--seed", type=_natural, default=0)
    q.add_argument("--size-limit", type=_positive, default=10**6)
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("analyze", help="print dependency tuples, export graph and constraints")
    q.add_argument("file")
    q.add_argument("--dot", metavar="PATH")
    q.add_argument("--emit-smt", metavar="DIR")
    search_options(q)
    q.set_defaults(func=cmd_analyze)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
