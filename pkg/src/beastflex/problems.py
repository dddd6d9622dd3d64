"""Test problems, random starting blocks, and the dense reference spectrum."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import HermitianPencil, hermitian_definite_eig
from .mmio import read_matrix_market
from .quadrature import Interval


@dataclass(frozen=True, eq=False)
class EigenProblem:
    pencil: HermitianPencil
    interval: Interval
    n_expect: int
    label: str = ""

    def __post_init__(self):
        if self.n_expect < 0:
            raise ValueError("n_expect must be non-negative")

    @property
    def n(self) -> int:
        return self.pencil.n


@dataclass(frozen=True, eq=False)
class ReferenceSpectrum:
    lam: np.ndarray
    X: np.ndarray

    def __len__(self):
        return len(self.lam)


def toy_problem() -> EigenProblem:
    """diag(-2.99, -2.89, ..., 6.91) with B = I on [-1, 1]; 20 eigenvalues inside."""
    diag = np.round(-2.99 + 0.1 * np.arange(100), 2)
    return EigenProblem(HermitianPencil(np.diag(diag)), Interval(-1.0, 1.0), 20, "toy")


def laplacian_1d(n: int) -> np.ndarray:
    """Tridiagonal [-1, 2, -1] matrix; eigenvalues 2 - 2 cos(k pi / (n + 1))."""
    if n < 2:
        raise ValueError("laplacian needs n >= 2")
    return 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)


def laplacian_eigenvalues(n: int) -> np.ndarray:
    k = np.arange(1, n + 1)
    return 2.0 - 2.0 * np.cos(k * np.pi / (n + 1))


def laplacian_problem(n: int, first: int, count: int, label: str | None = None) -> EigenProblem:
    """1D Laplacian with an interval holding eigenvalues first .. first+count-1 (0-based, ascending).

    Interval endpoints sit halfway between neighbouring eigenvalues.
    """
    lam = laplacian_eigenvalues(n)
    if first < 0 or count < 1 or first + count > n:
        raise ValueError(f"cannot take {count} eigenvalues from index {first} of {n}")
    lo = lam[first] - 0.5 * (lam[first] - lam[first - 1]) if first > 0 else lam[0] - 0.5 * lam[0]
    last = first + count - 1
    hi = lam[last] + 0.5 * (lam[last + 1] - lam[last]) if last + 1 < n else 0.5 * (lam[last] + 4.0)
    label = label or f"laplacian{n}[{first}:{first + count}]"
    return EigenProblem(HermitianPencil(laplacian_1d(n)), Interval(float(lo), float(hi)), count, label)


def clustered_hermitian_problem(n: int = 150, seed: int = 0, cluster_size: int = 6,
                                cluster_center: float = 0.3, cluster_spread: float = 1e-4,
                                complex_valued: bool = True, label: str | None = None) -> EigenProblem:
    """Dense random Hermitian matrix with a tight eigenvalue cluster inside [-0.5, 0.5].

    The rest of the spectrum is uniform on [-5, 5], keeping a gap of 0.02 around
    the interval ends.
    """
    rng = np.random.default_rng(seed)
    bulk = rng.uniform(-5.0, 5.0, size=n - cluster_size)
    interval = Interval(-0.5, 0.5)
    for end in (interval.lo, interval.hi):
        d = bulk - end
        near = np.abs(d) < 0.02
        bulk[near] = end + np.where(d[near] >= 0, 0.02, -0.02)
    cluster = cluster_center + cluster_spread * np.linspace(-1.0, 1.0, cluster_size)
    lam = np.sort(np.concatenate([bulk, cluster]))
    G = rng.standard_normal((n, n))
    if complex_valued:
        G = G + 1j * rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(G)
    A = (Q * lam) @ Q.conj().T
    A = 0.5 * (A + A.conj().T)
    n_in = int(np.count_nonzero(interval.contains(lam)))
    return EigenProblem(HermitianPencil(A), interval, n_in, label or f"clustered{n}s{seed}")


def matrix_market_problem(path, interval: Interval, n_expect: int, path_b=None,
                          label: str | None = None) -> EigenProblem:
    A = read_matrix_market(path, hermitian=True)
    B = read_matrix_market(path_b, hermitian=True) if path_b is not None else None
    return EigenProblem(HermitianPencil(A, B), interval, n_expect, label or str(path))


def random_initial_block(n: int, p: int, seed=None) -> np.ndarray:
    """n x p block of standard normal entries from a seeded PCG64 generator.

    ``seed`` may also be a ``numpy.random.Generator``, which is then advanced.
    """
    if n < 1 or p < 1:
        raise ValueError("block dimensions must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.standard_normal((n, p))


def reference_spectrum(problem: EigenProblem) -> ReferenceSpectrum:
    """All eigenpairs of the dense problem with eigenvalues in the (closed) interval."""
    lam, X = hermitian_definite_eig(problem.pencil)
    inside = problem.interval.contains(lam)
    return ReferenceSpectrum(lam[inside], X[:, inside])
