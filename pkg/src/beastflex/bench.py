"""Benchmark harness: oracle scoring, trace CSV, and RHS_ovl/BLS_ovl comparison tables."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from .problems import (EigenProblem, clustered_hermitian_problem, laplacian_problem,
                       matrix_market_problem, reference_spectrum, toy_problem)
from .quadrature import Interval
from .solver import CONVERGED, IterationRecord, SolverConfig, run
from .subspace import worker_count

TRACE_COLUMNS = ("iteration", "mode", "s", "q", "rhs_1", "rank", "res_min", "res_avg", "res_max",
                 "locked", "rhs_ovl", "bls_ovl")
BENCH_COLUMNS = ("problem", "solver", "repeat", "rhs_ovl", "bls_ovl", "iterations", "found_count",
                 "expected_count", "success", "status")

# solver name -> SolverConfig overrides
SOLVERS = {
    "beast_c_n": dict(mode="c", adaptive_q=False, switch_on_stagnation=False),
    "beast_c_ad": dict(mode="c", adaptive_q=True, switch_on_stagnation=False),
    "beast_m_n_in": dict(mode="m_in", switch_on_stagnation=False),
    "beast_m_x_in": dict(mode="m_in", switch_on_stagnation=True),
    "beast_m_n_out": dict(mode="m_out", switch_on_stagnation=False),
    "beast_m_x_out": dict(mode="m_out", switch_on_stagnation=True),
}
# starting node count of the adaptive-q solver; it only ever grows q
ADAPTIVE_Q_START = 8


def solver_name(name: str) -> str:
    """Canonical solver name; accepts short forms like ``c``, ``c-ad`` or ``m-x-out``."""
    key = name.strip().lower().replace("-", "_")
    if key in SOLVERS:
        return key
    if key in ("c", "c_n"):
        return "beast_c_n"
    key = "beast_" + key if not key.startswith("beast_") else key
    if key in SOLVERS:
        return key
    raise ValueError(f"unknown solver {name!r}; expected one of {sorted(SOLVERS)}")


def solver_config(name: str, base: SolverConfig) -> SolverConfig:
    name = solver_name(name)
    overrides = dict(SOLVERS[name])
    if overrides.get("adaptive_q"):
        overrides["q"] = min(base.q, ADAPTIVE_Q_START)
    return SolverConfig(**{**asdict(base), **overrides})


# --- oracle comparison -------------------------------------------------------

@dataclass(frozen=True)
class OracleMatch:
    found_count: int
    missed: list
    spurious: list


def compare_with_oracle(computed, reference, interval: Interval | None = None, rtol: float = 1e-8):
    """Match computed eigenvalues to reference ones, counting multiplicity.

    Two values match when they differ by at most rtol * max(1, |lam|).  Both
    lists are sorted and matched greedily, which is optimal for tolerance
    windows on the real line.  ``computed`` may be a SolveResult or an array;
    ``reference`` a ReferenceSpectrum or an array.
    """
    comp = np.sort(np.asarray(getattr(computed, "lam", computed), dtype=float))
    ref = np.sort(np.asarray(getattr(reference, "lam", reference), dtype=float))
    if interval is not None:
        comp = comp[interval.contains(comp)]
    i = j = 0
    found, missed, spurious = 0, [], []
    while i < len(ref) and j < len(comp):
        atol = rtol * max(1.0, abs(ref[i]))
        if abs(comp[j] - ref[i]) <= atol:
            found += 1
            i += 1
            j += 1
        elif comp[j] < ref[i]:
            spurious.append(float(comp[j]))
            j += 1
        else:
            missed.append(float(ref[i]))
            i += 1
    missed.extend(float(x) for x in ref[i:])
    spurious.extend(float(x) for x in comp[j:])
    return OracleMatch(found, missed, spurious)


# --- trace CSV ---------------------------------------------------------------

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_trace(trace, dest):
    """Write IterationRecords as CSV to a path or text stream."""
    own = isinstance(dest, (str, os.PathLike))
    fh = open(dest, "w", newline="") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for rec in trace:
            w.writerow([_fmt(getattr(rec, c)) for c in TRACE_COLUMNS])
    finally:
        if own:
            fh.close()


def trace_to_csv(trace) -> str:
    buf = io.StringIO()
    write_trace(trace, buf)
    return buf.getvalue()


def read_trace(src):
    own = isinstance(src, (str, os.PathLike))
    fh = open(src, newline="") if own else src
    try:
        rows = list(csv.DictReader(fh))
    finally:
        if own:
            fh.close()
    types = {f.name: f.type for f in fields(IterationRecord)}
    out = []
    for row in rows:
        kw = {}
        for c in TRACE_COLUMNS:
            t = types[c]
            kw[c] = row[c] if t == "str" else (float(row[c]) if t == "float" else int(row[c]))
        out.append(IterationRecord(**kw))
    return out


# --- benchmark ---------------------------------------------------------------

@dataclass(frozen=True)
class BenchRow:
    problem: str
    solver: str
    repeat: int
    rhs_ovl: int
    bls_ovl: int
    iterations: int
    found_count: int
    expected_count: int
    success: bool
    status: str


@dataclass(frozen=True)
class AggregateRow:
    solver: str
    mean_rhs_ovl: float
    mean_bls_ovl: float
    problems: int


def desk_suite(n_laplacian: int = 200) -> list:
    """Toy problem plus three 20-eigenvalue Laplacian windows."""
    return [toy_problem(),
            laplacian_problem(n_laplacian, 60, 20),
            laplacian_problem(n_laplacian, 90, 20),
            laplacian_problem(n_laplacian, 130, 20)]


def robustness_suite() -> list:
    """Desk suite plus two dense random Hermitian problems with an interior cluster."""
    return desk_suite() + [clustered_hermitian_problem(150, seed=1),
                           clustered_hermitian_problem(150, seed=2, complex_valued=False)]


def load_suite(path) -> list:
    """Problems from a JSON list of specs.

    Each entry has a ``kind``: ``toy``; ``laplacian`` with ``n``, ``first``,
    ``count``; ``clustered`` with ``n`` and ``seed``; or ``matrix`` with
    ``path``, ``interval`` and ``n_expect`` (optional ``path_b``).  Any entry
    may give a ``label``; relative paths resolve against the suite file.
    """
    with open(path) as fh:
        specs = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    problems = []
    for spec in specs:
        kind = spec.get("kind")
        label = spec.get("label")
        if kind == "toy":
            p = toy_problem()
            if "interval" in spec:
                p = EigenProblem(p.pencil, Interval(*spec["interval"]), spec.get("n_expect", p.n_expect),
                                 label or p.label)
        elif kind == "laplacian":
            p = laplacian_problem(spec["n"], spec["first"], spec["count"], label)
        elif kind == "clustered":
            p = clustered_hermitian_problem(spec.get("n", 150), seed=spec.get("seed", 0),
                                            complex_valued=spec.get("complex", True), label=label)
        elif kind == "matrix":
            mpath = os.path.join(base, spec["path"])
            bpath = os.path.join(base, spec["path_b"]) if spec.get("path_b") else None
            p = matrix_market_problem(mpath, Interval(*spec["interval"]), spec["n_expect"], bpath, label)
        else:
            raise ValueError(f"unknown problem kind {kind!r} in {path}")
        problems.append(p)
    return problems


def bench_one(problem: EigenProblem, name: str, repeat: int, base: SolverConfig, reference=None) -> BenchRow:
    cfg = solver_config(name, base)
    cfg = SolverConfig(**{**asdict(cfg), "rng_seed": base.rng_seed + repeat, "n_expect": None})
    reference = reference_spectrum(problem) if reference is None else reference
    try:
        result = run(problem, cfg)
    except Exception as exc:  # recorded, never aborts the suite
        return BenchRow(problem.label, solver_name(name), repeat, 0, 0, 0, 0, len(reference), False,
                        f"Error:{type(exc).__name__}")
    match = compare_with_oracle(result, reference, problem.interval)
    success = match.found_count == len(reference) and result.status == CONVERGED
    return BenchRow(problem.label, solver_name(name), repeat, result.counters.rhs_ovl,
                    result.counters.bls_ovl, result.iterations, match.found_count, len(reference),
                    success, result.status)


def run_bench(problems, solvers, repeats: int = 1, base: SolverConfig | None = None, workers=None):
    """One BenchRow per (problem, solver, repeat), in that order."""
    base = base or SolverConfig()
    solvers = [solver_name(s) for s in solvers]
    refs = [reference_spectrum(p) for p in problems]
    jobs = [(p, ref, s, r) for p, ref in zip(problems, refs) for s in solvers for r in range(repeats)]
    nworkers = worker_count(workers)
    if nworkers > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            return list(pool.map(lambda j: bench_one(j[0], j[2], j[3], base, j[1]), jobs))
    return [bench_one(p, s, r, base, ref) for p, ref, s, r in jobs]


def aggregate(rows) -> list:
    """Per-solver mean cost over (problem, repeat) cases that every solver solved."""
    solvers = list(dict.fromkeys(r.solver for r in rows))
    cases = {}
    for r in rows:
        cases.setdefault((r.problem, r.repeat), []).append(r)
    good = {k for k, rs in cases.items() if all(x.success for x in rs)
            and {x.solver for x in rs} == set(solvers)}
    out = []
    for s in solvers:
        sel = [r for r in rows if r.solver == s and (r.problem, r.repeat) in good]
        if sel:
            out.append(AggregateRow(s, float(np.mean([r.rhs_ovl for r in sel])),
                                    float(np.mean([r.bls_ovl for r in sel])), len(sel)))
        else:
            out.append(AggregateRow(s, math.nan, math.nan, 0))
    return out


def write_bench(rows, aggregates, dest):
    """Bench CSV: one line per row, then one ``MEAN`` line per solver.

    Aggregate lines carry the mean rhs_ovl and bls_ovl, and the number of
    averaged cases in the ``repeat`` column.
    """
    own = isinstance(dest, (str, os.PathLike))
    fh = open(dest, "w", newline="") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for r in rows:
            w.writerow([r.problem, r.solver, r.repeat, r.rhs_ovl, r.bls_ovl, r.iterations,
                        r.found_count, r.expected_count, int(r.success), r.status])
        for a in aggregates:
            w.writerow(["MEAN", a.solver, a.problems, _fmt(a.mean_rhs_ovl), _fmt(a.mean_bls_ovl),
                        "", "", "", "", "aggregate"])
    finally:
        if own:
            fh.close()


def ratio_table(rows) -> str:
    """Text table of ``RHS_ovl : BLS_ovl`` per problem and solver, ``-`` for failures."""
    solvers = list(dict.fromkeys(r.solver for r in rows))
    problems = list(dict.fromkeys(r.problem for r in rows))
    cell = {}
    for r in rows:
        if r.repeat == 0:
            cell[(r.problem, r.solver)] = f"{r.rhs_ovl} : {r.bls_ovl}" if r.success else "-"
    width = max([len(p) for p in problems] + [7])
    lines = [" ".join([f"{'problem':<{width}}"] + [f"{s:>15}" for s in solvers])]
    for p in problems:
        lines.append(" ".join([f"{p:<{width}}"] + [f"{cell.get((p, s), ''):>15}" for s in solvers]))
    return "\n".join(lines)
