"""Filtered subspace construction by contour integration with moments.

For a block Y and a rule (z_j, w_j) the moment blocks are

    U_k = sum_j w_j z_j^k (z_j B - A)^{-1} B Y,   k = 0 .. s-1,

and the subspace is U = [U_0 | U_1 | ... | U_{s-1}].  Each node costs one
factorization and one block solve whatever ``s`` is; the moments only change
how the solutions are accumulated.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linalg import HermitianPencil, SingularShift, factor_shifted, svd_with_values
from .quadrature import ContourRule

THREADS_ENV = "BEAST_FLEX_THREADS"
DEFAULT_DELTA = 1e-14


class ZeroSubspace(ArithmeticError):
    """The filtered block is identically zero."""


@dataclass
class CostCounters:
    """Cumulative single right-hand-side solves and block solves."""

    rhs_ovl: int = 0
    bls_ovl: int = 0

    def add(self, block_solves: int, rhs_per_block: int):
        self.bls_ovl += block_solves
        self.rhs_ovl += block_solves * rhs_per_block

    def snapshot(self):
        return self.rhs_ovl, self.bls_ovl


@dataclass(frozen=True)
class MomentConfig:
    s: int
    rhs_1: int

    def __post_init__(self):
        if self.s < 1 or self.rhs_1 < 1:
            raise ValueError(f"need s >= 1 and rhs_1 >= 1, got s={self.s}, rhs_1={self.rhs_1}")

    @property
    def m0(self) -> int:
        return self.s * self.rhs_1


@dataclass(eq=False)
class SubspaceBlock:
    U: np.ndarray
    s: int
    rhs_1: int
    block_solves: int = 0
    singular_values: np.ndarray | None = field(default=None, repr=False)
    numerical_rank: int | None = None

    @property
    def m0(self) -> int:
        return self.U.shape[1]

    def moment(self, k: int):
        """The k-th moment block U_k."""
        return self.U[:, k * self.rhs_1:(k + 1) * self.rhs_1]


def worker_count(workers=None) -> int:
    if workers is None:
        try:
            workers = int(os.environ.get(THREADS_ENV, "0") or 0)
        except ValueError:
            workers = 0
    return max(1, workers)


def moment_weights(rule: ContourRule, s: int, scaled: bool = False):
    """Array (s, stored_nodes) of w_j z_j^k.

    With ``scaled`` the monomials are taken in the normalized variable
    (z - c) / r, which spans the same subspace but keeps the blocks balanced.
    """
    z = rule.nodes
    if scaled:
        z = (z - rule.center) / rule.radius_real
    return rule.coeffs[None, :] * z[None, :] ** np.arange(s)[:, None]


def build_subspace(pencil: HermitianPencil, Y, rule: ContourRule, s: int = 1,
                   counters: CostCounters | None = None, workers=None,
                   scaled_moments: bool = False) -> SubspaceBlock:
    Y = np.asarray(Y)
    if Y.ndim != 2 or Y.shape[0] != pencil.n:
        raise ValueError(f"Y must be {pencil.n} x p, got shape {Y.shape}")
    if s < 1:
        raise ValueError("need at least one moment")
    p = Y.shape[1]
    weights = moment_weights(rule, s, scaled_moments)

    # real pencil + real Y: the conjugate node contributes the conjugate term
    real_symmetry = rule.half_contour and pencil.is_real and not np.iscomplexobj(Y)
    adjoint_pass = rule.half_contour and not real_symmetry

    def solve_node(j):
        try:
            factor = factor_shifted(pencil, rule.nodes[j])
        except SingularShift as exc:
            raise SingularShift(f"singular shift at node {j}: {exc}", z=exc.z, node_index=j) from None
        X = factor.solve(Y)
        Xc = factor.solve(Y, adjoint=True) if adjoint_pass else None
        return X, Xc

    nodes = range(rule.stored_nodes)
    nworkers = min(worker_count(workers), rule.stored_nodes)
    if nworkers > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            solutions = list(pool.map(solve_node, nodes))
    else:
        solutions = [solve_node(j) for j in nodes]

    # accumulate in node order so results do not depend on scheduling
    blocks = [np.zeros((pencil.n, p), dtype=complex) for _ in range(s)]
    for j, (X, Xc) in enumerate(solutions):
        for k in range(s):
            blocks[k] += weights[k, j] * X
            if Xc is not None:
                blocks[k] += np.conj(weights[k, j]) * Xc
    U = np.hstack(blocks)
    if real_symmetry:
        U = 2.0 * U.real

    block_solves = rule.stored_nodes * (2 if adjoint_pass else 1)
    if counters is not None:
        counters.add(block_solves, p)
    return SubspaceBlock(U=U, s=s, rhs_1=p, block_solves=block_solves)


def orthonormalize_truncate(U, delta: float = DEFAULT_DELTA):
    """Orthonormal basis of the columns of U with singular values above delta * sigma_max.

    Returns (Q, rank, sigma) with the full singular spectrum in ``sigma``.
    """
    block = U if isinstance(U, SubspaceBlock) else None
    U = block.U if block is not None else np.asarray(U)
    if U.shape[1] == 0:
        raise ZeroSubspace("empty block")
    Q, sigma = svd_with_values(U)
    if sigma[0] == 0.0:
        raise ZeroSubspace("filtered block is identically zero")
    rank = int(np.count_nonzero(sigma > delta * sigma[0]))
    if block is not None:
        block.singular_values = sigma
        block.numerical_rank = rank
    return Q[:, :rank], rank, sigma
