"""Right-hand-side cost of the six solver variants on the desk suite.

Runs every variant over the toy problem, three Laplacian windows and two
dense Hermitian problems with a tight eigenvalue cluster, then prints the
RHS_ovl : BLS_ovl table and the mean cost over problems all variants solved.
Set BEAST_FLEX_THREADS to run problems concurrently.
"""
from beastflex.bench import SOLVERS, aggregate, ratio_table, robustness_suite, run_bench
from beastflex.solver import SolverConfig

rows = run_bench(robustness_suite(), list(SOLVERS), repeats=1, base=SolverConfig())
print(ratio_table(rows))

print("\nfailures per solver")
for name in SOLVERS:
    failed = [r.problem for r in rows if r.solver == name and not r.success]
    print(f"  {name:14s} {len(failed)}  {' '.join(failed)}")

print("\nmean rhs_ovl over problems every solver finished")
for a in aggregate(rows):
    print(f"  {a.solver:14s} {a.mean_rhs_ovl:8.1f}  ({a.problems} problems)")

# one solver that never finishes empties the common set, so repeat without the ones that failed everywhere
always_failed = {n for n in SOLVERS if not any(r.success for r in rows if r.solver == n)}
if always_failed:
    print(f"\nsame, leaving out {', '.join(sorted(always_failed))}")
    for a in aggregate([r for r in rows if r.solver not in always_failed]):
        print(f"  {a.solver:14s} {a.mean_rhs_ovl:8.1f}  ({a.problems} problems)")
