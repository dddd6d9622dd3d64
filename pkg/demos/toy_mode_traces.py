"""Convergence traces of the three iteration modes on the diagonal toy problem.

The toy matrix is diag(-2.99, -2.89, ..., 6.91) with 20 eigenvalues in
[-1, 1].  Each run starts from a 32-column subspace; multi-moment runs use 4
moments of 8 columns and may drop to single-moment when the smallest
unconverged residual stalls.  Traces are written as CSV next to this script.
"""
import os

from beastflex.bench import compare_with_oracle, write_trace
from beastflex.problems import reference_spectrum, toy_problem
from beastflex.solver import SolverConfig, run

here = os.path.dirname(os.path.abspath(__file__))
problem = toy_problem()
reference = reference_spectrum(problem)

runs = {
    "c": SolverConfig(mode="c", m0=32),
    "m-n-in": SolverConfig(mode="m_in", m0=32, switch_on_stagnation=False),
    "m-x-out": SolverConfig(mode="m_out", m0=32),
    "m-out forced switch at 9": SolverConfig(mode="m_out", m0=32, switch_on_stagnation=False, forced_switch_at=9),
}

for name, cfg in runs.items():
    res = run(problem, cfg)
    found = compare_with_oracle(res, reference, problem.interval).found_count
    print(f"\n{name}: {res.status}, {found}/20 pairs, rhs_ovl {res.counters.rhs_ovl}, bls_ovl {res.counters.bls_ovl}")
    print(" it mode  s rhs_1 rank    res_min    res_max locked")
    for r in res.trace:
        print(f"{r.iteration:3d} {r.mode:>4} {r.s:2d} {r.rhs_1:5d} {r.rank:4d} {r.res_min:10.2e} {r.res_max:10.2e} {r.locked:6d}")
    write_trace(res.trace, os.path.join(here, f"trace_{name.split()[0]}.csv"))
