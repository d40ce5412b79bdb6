"""Command-line interface.

Exit codes: 0 success, 1 check failed (unbalanced network, solutions
differ), 2 singular system, 3 invalid input, 64 usage error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import devices as dev
from . import fileio, perphase, solver
from .errors import ParseError, SingularSystem, ThreePhaseError, ValidationError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_SINGULAR = 2
EXIT_INVALID = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not x > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="threephase", description="Linear three-phase network analysis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve a network file")
    p.add_argument("network")
    p.add_argument("--out", help="write the solution here instead of stdout")
    p.add_argument("--mode", choices=("full", "per-phase", "auto"), default="auto")
    p.add_argument("--tol", type=_positive_float, default=perphase.BALANCE_TOL, help="balance tolerance for auto mode")

    p = sub.add_parser("check-balanced", help="report whether a network is balanced")
    p.add_argument("network")
    p.add_argument("--tol", type=_positive_float, default=perphase.BALANCE_TOL)

    p = sub.add_parser("compare", help="compare the terminal quantities of two solutions")
    p.add_argument("sol_a")
    p.add_argument("sol_b")
    p.add_argument("--tol", type=_positive_float, default=1e-8)

    p = sub.add_parser("delta2y", help="replace delta sources by their wye equivalents")
    p.add_argument("network")
    p.add_argument("--out", required=True)
    return parser


def _solve(args) -> int:
    network = fileio.load(args.network)
    mode = args.mode
    report = None
    if mode == "auto":
        report = perphase.check_balanced(network, args.tol)
        mode = "per-phase" if report.balanced and report.spec.all_gammas_zero() else "full"
    if mode == "per-phase":
        sol, report = perphase.solve_balanced(network, args.tol)
        sol.diagnostics = solver.residuals(network, sol)
    else:
        sol = solver.solve(network)
    sol.metadata.update(
        {
        "mode": mode,
        "mode_requested": args.mode,
        "balance_tol": args.tol,
        "system_rcond_min": solver.SYSTEM_RCOND,
        "residual_rtol": solver.RESIDUAL_RTOL,
        }
    )
    if report is not None:
        sol.metadata["balance_report"] = report.lines()
    text = fileio.dumps(fileio.solution_to_dict(sol)) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for bus_id, r in sol.diagnostics.delta_source_kcl.items():
        if r > dev.KCL_RTOL:
            print(f"warning: delta source {bus_id} draws zero-sequence current ({r:.3e})", file=sys.stderr)
    return EXIT_OK


def _check_balanced(args) -> int:
    report = perphase.check_balanced(fileio.load(args.network), args.tol)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.balanced else EXIT_FAIL


def max_relative_difference(a: dict, b: dict) -> float:
    """Largest difference over ``v``, ``i``, ``s``, each relative to its own scale."""
    worst = 0.0
    for q in ("v", "i", "s"):
        scale = max(float(np.max(np.abs(a[q]), initial=0.0)), float(np.max(np.abs(b[q]), initial=0.0)))
        diff = float(np.max(np.abs(a[q] - b[q]), initial=0.0))
        if diff > 0:
            worst = max(worst, diff / scale)
    return worst


def _compare(args) -> int:
    ids_a, qa = fileio.terminal_arrays(fileio.load_solution_dict(args.sol_a), f"{args.sol_a}: ")
    ids_b, qb = fileio.terminal_arrays(fileio.load_solution_dict(args.sol_b), f"{args.sol_b}: ")
    if ids_a != ids_b:
        print("solutions cover different buses")
        return EXIT_FAIL
    diff = max_relative_difference(qa, qb)
    ok = diff <= args.tol
    print(f"max relative difference {diff:.3e} ({'within' if ok else 'exceeds'} tol {args.tol:g})")
    return EXIT_OK if ok else EXIT_FAIL


def _delta2y(args) -> int:
    network = fileio.load(args.network)
    converted = [dev.delta_to_y(d) if isinstance(d, (dev.VoltageSourceDelta, dev.CurrentSourceDelta)) else d for d in network.devices]
    fileio.save_network(network.with_devices(converted), args.out)
    return EXIT_OK


_COMMANDS = {"solve": _solve, "check-balanced": _check_balanced, "compare": _compare, "delta2y": _delta2y}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SingularSystem as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (ValidationError, ParseError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ThreePhaseError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


def cli(argv=None) -> int:
    """Run the CLI and return the exit code, translating ``SystemExit``."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
