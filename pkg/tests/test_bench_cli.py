import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beastflex import bench
from beastflex.bench import (BENCH_COLUMNS, TRACE_COLUMNS, BenchRow, aggregate, compare_with_oracle,
                             read_trace, run_bench, solver_name, trace_to_csv, write_bench, write_trace)
from beastflex.cli import EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_VERIFY_FAILED, exit_code, main
from beastflex.mmio import write_matrix_market
from beastflex.problems import laplacian_1d, toy_problem
from beastflex.solver import CONVERGED, MAX_ITERATIONS, STALLED, IterationRecord, SolverConfig, run


class TestOracle:
    def test_exact(self):
        lam = -0.99 + 0.1 * np.arange(20)
        m = compare_with_oracle(lam, lam)
        assert (m.found_count, m.missed, m.spurious) == (20, [], [])

    def test_one_missed(self):
        lam = np.arange(5.0)
        m = compare_with_oracle(lam[:4], lam)
        assert m.found_count == 4 and m.missed == [4.0] and m.spurious == []

    def test_multiplicity(self):
        ref = np.array([0.5, 0.5])
        assert compare_with_oracle([0.5], ref).found_count == 1
        m = compare_with_oracle([0.5, 0.5 + 1e-12], ref)
        assert m.found_count == 2 and not m.missed

    def test_spurious(self):
        m = compare_with_oracle([0.1, 0.2, 0.3], [0.1, 0.3])
        assert m.found_count == 2 and m.spurious == [0.2]

    def test_tolerance_scales(self):
        assert compare_with_oracle([1000.0 + 5e-6], [1000.0]).found_count == 1
        assert compare_with_oracle([0.1 + 5e-8], [0.1]).found_count == 0

    @settings(max_examples=50)
    @given(st.lists(st.floats(-10, 10), max_size=15), st.randoms())
    def test_self_match_any_order(self, vals, rnd):
        shuffled = list(vals)
        rnd.shuffle(shuffled)
        m = compare_with_oracle(shuffled, vals)
        assert m.found_count == len(vals) and not m.missed and not m.spurious


class TestTrace:
    def test_round_trip(self, tmp_path):
        res = run(toy_problem(), SolverConfig(mode="m_out", m0=32))
        path = tmp_path / "t.csv"
        write_trace(res.trace, path)
        assert path.read_text().splitlines()[0] == ",".join(TRACE_COLUMNS)
        assert tuple(read_trace(path)) == res.trace

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.integers(1, 99), st.sampled_from("MC"),
                              st.floats(allow_nan=False, allow_infinity=False, min_value=0)), max_size=5))
    def test_round_trip_values(self, items):
        recs = [IterationRecord(i, m, 1, 16, 8, 8, r, r / 3, r * 7, 0, 64, 8) for i, m, r in items]
        assert read_trace(io.StringIO(trace_to_csv(recs))) == recs

    def test_nan_round_trip(self):
        rec = IterationRecord(1, "C", 1, 16, 8, 0, math.nan, math.nan, math.nan, 0, 64, 8)
        back = read_trace(io.StringIO(trace_to_csv([rec])))[0]
        assert math.isnan(back.res_min)


def row(problem, solver, rhs, ok=True, repeat=0):
    return BenchRow(problem, solver, repeat, rhs, rhs // 10, 3, 20 if ok else 19, 20, ok,
                    CONVERGED if ok else MAX_ITERATIONS)


class TestBench:
    def test_solver_names(self):
        assert solver_name("c") == "beast_c_n"
        assert solver_name("m-x-out") == "beast_m_x_out"
        assert solver_name("c-ad") == "beast_c_ad"
        assert solver_name("beast_m_n_in") == "beast_m_n_in"
        with pytest.raises(ValueError):
            solver_name("lobpcg")

    def test_adaptive_solver_starts_low(self):
        cfg = bench.solver_config("c-ad", SolverConfig())
        assert cfg.adaptive_q and cfg.q == bench.ADAPTIVE_Q_START

    def test_aggregate_excludes_failures(self):
        rows = [row("a", "x", 100), row("a", "y", 200), row("b", "x", 300), row("b", "y", 900, ok=False),
                row("c", "x", 500), row("c", "y", 700)]
        agg = {a.solver: a for a in aggregate(rows)}
        assert agg["x"].mean_rhs_ovl == 300.0 and agg["y"].mean_rhs_ovl == 450.0
        assert agg["x"].problems == 2

    def test_aggregate_all_failed(self):
        agg = aggregate([row("a", "x", 100, ok=False), row("a", "y", 100)])
        assert all(math.isnan(a.mean_rhs_ovl) for a in agg)

    @settings(max_examples=40)
    @given(st.lists(st.tuples(st.integers(0, 4), st.integers(1, 5000), st.integers(1, 5000),
                              st.booleans(), st.booleans()), min_size=1, max_size=8, unique_by=lambda t: t[0]))
    def test_aggregate_recomputes(self, cases):
        rows = []
        for pid, rx, ry, okx, oky in cases:
            rows += [row(f"p{pid}", "x", rx, okx), row(f"p{pid}", "y", ry, oky)]
        agg = {a.solver: a for a in aggregate(rows)}
        good = [(rx, ry) for _, rx, ry, okx, oky in cases if okx and oky]
        if good:
            assert agg["x"].mean_rhs_ovl == np.mean([g[0] for g in good])
            assert agg["y"].mean_rhs_ovl == np.mean([g[1] for g in good])

    def test_desk_suite_csv(self):
        rows = run_bench(bench.desk_suite(), ["c", "m-x-out"], repeats=1, base=SolverConfig(m0=32))
        buf = io.StringIO()
        write_bench(rows, aggregate(rows), buf)
        lines = list(csv.reader(io.StringIO(buf.getvalue())))
        assert tuple(lines[0]) == BENCH_COLUMNS
        assert len(lines) == 1 + 8 + 2
        assert [ln[0] for ln in lines[-2:]] == ["MEAN", "MEAN"]
        assert all(r.success for r in rows)
        # deterministic (problem, solver, repeat) order
        assert [(r.problem, r.solver) for r in rows[:2]] == [("toy", "beast_c_n"), ("toy", "beast_m_x_out")]

    def test_parallel_rows_same_order(self, monkeypatch):
        probs = bench.desk_suite()[:2]
        serial = run_bench(probs, ["c", "m-x-out"], 2, SolverConfig(m0=32))
        monkeypatch.setenv("BEAST_FLEX_THREADS", "4")
        threaded = run_bench(probs, ["c", "m-x-out"], 2, SolverConfig(m0=32))
        assert serial == threaded

    def test_failing_solver_does_not_abort(self, monkeypatch):
        calls = []

        def flaky(problem, cfg):
            calls.append(cfg.mode)
            if cfg.mode == "c":
                raise RuntimeError("boom")
            return run(problem, cfg)

        monkeypatch.setattr(bench, "run", flaky)
        rows = run_bench([toy_problem()], ["c", "m-x-out"], 1, SolverConfig(m0=32))
        assert rows[0].status == "Error:RuntimeError" and not rows[0].success
        assert rows[1].success

    def test_suite_file(self, tmp_path):
        write_matrix_market(tmp_path / "lap.mtx", laplacian_1d(60), "symmetric")
        spec = [{"kind": "toy"}, {"kind": "laplacian", "n": 80, "first": 10, "count": 8},
                {"kind": "matrix", "path": "lap.mtx", "interval": [0.1, 0.5], "n_expect": 8, "label": "mm"}]
        (tmp_path / "suite.json").write_text(json.dumps(spec))
        probs = bench.load_suite(tmp_path / "suite.json")
        assert [p.label for p in probs][::2] == ["toy", "mm"]
        with pytest.raises(ValueError):
            (tmp_path / "bad.json").write_text(json.dumps([{"kind": "nope"}]))
            bench.load_suite(tmp_path / "bad.json")


class TestExitCodes:
    def test_total_function(self):
        table = {(s, v): exit_code(s, v) for s in (CONVERGED, MAX_ITERATIONS, STALLED) for v in (None, True, False)}
        assert table[(CONVERGED, None)] == table[(CONVERGED, True)] == EXIT_OK
        assert table[(CONVERGED, False)] == EXIT_VERIFY_FAILED
        assert {table[(s, v)] for s in (MAX_ITERATIONS, STALLED) for v in (None, True, False)} == {EXIT_NOT_CONVERGED}


class TestCLI:
    def test_toy_single_moment(self, capsys, tmp_path):
        trace = tmp_path / "trace.csv"
        code = main(["solve", "--toy", "--mode", "c", "--q", "16", "--quad", "gauss", "--tol", "1e-13",
                     "--verify", "--trace", str(trace)])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "pairs found: 20" in out and "20 matched, 0 missed, 0 spurious" in out
        assert trace.read_text().startswith(",".join(TRACE_COLUMNS) + "\n")

    def test_empty_interval(self, capsys):
        assert main(["solve", "--toy", "--interval", "10", "11", "--verify"]) == EXIT_OK
        assert "pairs found: 0" in capsys.readouterr().out

    def test_missing_matrix(self, capsys):
        code = main(["solve", "--matrix", "missing.mtx", "--interval", "0", "1", "--n-expect", "2"])
        err = capsys.readouterr().err
        assert code == EXIT_INPUT
        assert "missing.mtx" in err and err.count("\n") == 1

    def test_matrix_needs_interval(self, capsys):
        assert main(["solve", "--matrix", "a.mtx"]) == EXIT_INPUT
        assert capsys.readouterr().err.count("\n") == 1

    def test_bad_matrix_file(self, tmp_path, capsys):
        path = tmp_path / "p.mtx"
        path.write_text("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n")
        assert main(["solve", "--matrix", str(path), "--interval", "0", "1", "--n-expect", "1"]) == EXIT_INPUT
        assert "p.mtx" in capsys.readouterr().err

    def test_matrix_file(self, tmp_path, capsys):
        write_matrix_market(tmp_path / "lap.mtx", laplacian_1d(80), "symmetric")
        code = main(["solve", "--matrix", str(tmp_path / "lap.mtx"), "--interval", "0.5", "1.5",
                     "--n-expect", "14", "--verify"])
        assert code == EXIT_OK

    def test_generalized_matrix_file(self, tmp_path):
        n = 40
        write_matrix_market(tmp_path / "a.mtx", laplacian_1d(n), "symmetric")
        write_matrix_market(tmp_path / "b.mtx", np.diag(np.linspace(1.0, 2.0, n)), "symmetric")
        code = main(["solve", "--matrix", str(tmp_path / "a.mtx"), "--matrix-b", str(tmp_path / "b.mtx"),
                     "--interval", "0.5", "1.0", "--n-expect", "8", "--verify", "--tol", "1e-11"])
        assert code == EXIT_OK

    def test_max_iterations(self):
        assert main(["solve", "--toy", "--mode", "c", "--max-iter", "1"]) == EXIT_NOT_CONVERGED

    def test_laplacian(self):
        assert main(["solve", "--laplacian", "100", "--verify"]) == EXIT_OK

    def test_bench_stdout(self, capsys):
        assert main(["bench", "--solvers", "c,m-x-out", "--m0", "32"]) == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == ",".join(BENCH_COLUMNS) and len(lines) == 11

    def test_bench_bad_solver(self, capsys):
        assert main(["bench", "--solvers", "nope"]) == EXIT_INPUT

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "beastflex", "solve", "--matrix", str(tmp_path / "x.mtx"),
                               "--interval", "0", "1", "--n-expect", "1"], capture_output=True, text=True)
        assert proc.returncode == 1 and "x.mtx" in proc.stderr
