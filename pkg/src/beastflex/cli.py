"""Command line front end: ``beastflex solve`` and ``beastflex bench``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import bench
from .linalg import HermitianPencil, IndefiniteB, SingularShift
from .mmio import MatrixMarketError
from .problems import (EigenProblem, laplacian_1d, laplacian_eigenvalues, laplacian_problem,
                       matrix_market_problem, reference_spectrum, toy_problem)
from .quadrature import Interval
from .solver import CONVERGED, SolverConfig, run

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2
EXIT_VERIFY_FAILED = 3


class InputError(Exception):
    pass


def exit_code(status: str, verified: bool | None = None) -> int:
    """Exit status from the solver outcome and the optional oracle check."""
    if status != CONVERGED:
        return EXIT_NOT_CONVERGED
    if verified is False:
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def _on_off(value: str) -> bool:
    v = value.lower()
    if v in ("on", "yes", "true", "1"):
        return True
    if v in ("off", "no", "false", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected on or off, got {value!r}")


def _add_config_flags(p):
    p.add_argument("--mode", default="m-out", choices=["c", "m-in", "m-out"])
    p.add_argument("--switch", type=_on_off, default=True, metavar="{on,off}")
    p.add_argument("--adaptive-q", type=_on_off, default=False, metavar="{on,off}")
    p.add_argument("--moments", type=int, default=4, help="initial number of moments s")
    p.add_argument("--quad", default="gauss", choices=["gauss", "trapezoid"])
    p.add_argument("--q", type=int, default=16, help="quadrature nodes on the full contour")
    p.add_argument("--ecc", type=float, default=1.0, help="ellipse eccentricity (1 = circle)")
    p.add_argument("--subspace-factor", type=float, default=1.5)
    p.add_argument("--m0", type=int, default=None, help="initial subspace size (default from n_expect)")
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beastflex", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="compute the eigenpairs inside an interval")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", metavar="PATH", help="Matrix Market file holding A")
    src.add_argument("--toy", action="store_true", help="diagonal 100x100 test matrix")
    src.add_argument("--laplacian", type=int, metavar="N", help="1D Laplacian of order N")
    s.add_argument("--matrix-b", metavar="PATH", help="Matrix Market file holding B (default I)")
    s.add_argument("--interval", type=float, nargs=2, metavar=("LO", "HI"))
    s.add_argument("--n-expect", type=int, help="estimated eigenvalue count in the interval")
    _add_config_flags(s)
    s.add_argument("--trace", metavar="OUT.csv", help="write the per-iteration trace")
    s.add_argument("--verify", action="store_true", help="score the result against a dense eigensolve")

    b = sub.add_parser("bench", help="compare solvers on a problem suite")
    b.add_argument("--suite", metavar="FILE", help="JSON list of problem specs (default: desk suite)")
    b.add_argument("--solvers", default="c,m-x-out",
                   help="comma separated, e.g. c,c-ad,m-n-in,m-x-in,m-n-out,m-x-out")
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("--q", type=int, default=16)
    b.add_argument("--ecc", type=float, default=1.0)
    b.add_argument("--m0", type=int, default=None)
    b.add_argument("--tol", type=float, default=1e-13)
    b.add_argument("--max-iter", type=int, default=50)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", metavar="CSV", help="bench CSV path (default stdout)")
    return parser


def _problem(args) -> EigenProblem:
    if args.matrix_b and not args.matrix:
        raise InputError("--matrix-b needs --matrix")
    interval = Interval(*args.interval) if args.interval else None
    if args.toy:
        base = toy_problem()
        if interval is None:
            return base
        lam = np.diag(base.pencil.A)
        n_in = int(np.count_nonzero(interval.contains(lam)))
        return EigenProblem(base.pencil, interval, args.n_expect or n_in, "toy")
    if args.laplacian is not None:
        n = args.laplacian
        if n < 2:
            raise InputError(f"--laplacian needs N >= 2, got {n}")
        if interval is None:
            count = min(20, n)
            return laplacian_problem(n, (n - count) // 2, count)
        n_in = int(np.count_nonzero(interval.contains(laplacian_eigenvalues(n))))
        return EigenProblem(HermitianPencil(laplacian_1d(n)), interval, args.n_expect or n_in,
                            f"laplacian{n}")
    if interval is None:
        raise InputError("--matrix needs --interval LO HI")
    if args.n_expect is None:
        raise InputError("--matrix needs --n-expect K")
    return matrix_market_problem(args.matrix, interval, args.n_expect, args.matrix_b)


def _config(args, n_expect=None) -> SolverConfig:
    return SolverConfig(mode=args.mode, switch_on_stagnation=args.switch, adaptive_q=args.adaptive_q,
                        s_initial=args.moments, subspace_factor=args.subspace_factor, n_expect=n_expect,
                        tol=args.tol, max_iter=args.max_iter, rule_kind=args.quad, q=args.q, ecc=args.ecc,
                        rng_seed=args.seed, m0=args.m0)


def cmd_solve(args) -> int:
    problem = _problem(args)
    config = _config(args, args.n_expect)
    try:
        result = run(problem, config)
    except SingularShift as exc:
        raise InputError(f"a quadrature node hits an eigenvalue: {exc}") from None
    if args.trace:
        bench.write_trace(result.trace, args.trace)
    print(f"status: {result.status}")
    print(f"iterations: {result.iterations}  rhs_ovl: {result.counters.rhs_ovl}  "
          f"bls_ovl: {result.counters.bls_ovl}")
    print(f"pairs found: {len(result.lam)}")
    for lam, res in zip(result.lam, result.residual):
        print(f"  {lam: .15e}  residual {res:.3e}")
    verified = None
    if args.verify:
        match = bench.compare_with_oracle(result, reference_spectrum(problem), problem.interval)
        verified = not match.missed and not match.spurious
        print(f"verify: {match.found_count} matched, {len(match.missed)} missed, "
              f"{len(match.spurious)} spurious")
    return exit_code(result.status, verified)


def cmd_bench(args) -> int:
    problems = bench.load_suite(args.suite) if args.suite else bench.desk_suite()
    solvers = [s for s in args.solvers.split(",") if s.strip()]
    try:
        solvers = [bench.solver_name(s) for s in solvers]
    except ValueError as exc:
        raise InputError(str(exc)) from None
    base = SolverConfig(q=args.q, ecc=args.ecc, m0=args.m0, tol=args.tol, max_iter=args.max_iter,
                        rng_seed=args.seed)
    rows = bench.run_bench(problems, solvers, args.repeats, base)
    aggregates = bench.aggregate(rows)
    if args.out:
        bench.write_bench(rows, aggregates, args.out)
        print(bench.ratio_table(rows))
    else:
        bench.write_bench(rows, aggregates, sys.stdout)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "solve":
            return cmd_solve(args)
        return cmd_bench(args)
    except (InputError, FileNotFoundError, MatrixMarketError, IndefiniteB, OSError, ValueError) as exc:
        msg = " ".join(str(exc).split())
        print(f"beastflex: error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
