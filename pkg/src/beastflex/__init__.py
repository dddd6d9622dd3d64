"""Contour-integration eigensolver for Hermitian pencils with moment subspaces and solve-count tracing."""
from .bench import compare_with_oracle, read_trace, run_bench, write_trace
from .linalg import HermitianPencil, IndefiniteB, SingularShift, hermitian_definite_eig
from .mmio import read_matrix_market, write_matrix_market
from .problems import (EigenProblem, clustered_hermitian_problem, laplacian_problem,
                       matrix_market_problem, random_initial_block, reference_spectrum, toy_problem)
from .quadrature import Interval, adapt_q, build_contour, filter_value
from .ritz import extract, lock_converged, smallest_nonconverged_residual
from .solver import BeastSolver, IterationRecord, SolveResult, SolverConfig, run
from .subspace import CostCounters, build_subspace, orthonormalize_truncate

__version__ = "0.1.0"

__all__ = [
    "BeastSolver", "CostCounters", "EigenProblem", "HermitianPencil", "IndefiniteB", "Interval",
    "IterationRecord", "SingularShift", "SolveResult", "SolverConfig", "adapt_q", "build_contour",
    "build_subspace", "clustered_hermitian_problem", "compare_with_oracle", "extract",
    "filter_value", "hermitian_definite_eig", "laplacian_problem", "lock_converged",
    "matrix_market_problem", "orthonormalize_truncate", "random_initial_block", "read_matrix_market",
    "read_trace", "reference_spectrum", "run", "run_bench", "smallest_nonconverged_residual",
    "toy_problem", "write_matrix_market", "write_trace",
]
