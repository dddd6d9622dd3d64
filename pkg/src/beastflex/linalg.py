"""Dense kernels: shifted factor/solve, SVD, and the reference Hermitian-definite eigensolver."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla


class SingularShift(np.linalg.LinAlgError):
    """zB - A is (numerically) singular at the requested shift."""

    def __init__(self, message, z=None, node_index=None):
        super().__init__(message)
        self.z = z
        self.node_index = node_index


class IndefiniteB(np.linalg.LinAlgError):
    """B is not Hermitian positive definite."""


def _is_hermitian(M, rtol=1e-12):
    scale = max(np.abs(M).max(initial=0.0), np.finfo(float).tiny)
    return np.abs(M - M.conj().T).max(initial=0.0) <= rtol * scale


@dataclass(frozen=True, eq=False)
class HermitianPencil:
    """Matrix pair (A, B) with Hermitian A and Hermitian positive definite B.

    ``B=None`` stands for the identity and is kept implicit throughout.
    """

    A: np.ndarray
    B: np.ndarray | None = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        A = np.asarray(self.A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if self.check and not _is_hermitian(A):
            raise ValueError("A is not Hermitian")
        object.__setattr__(self, "A", A)
        if self.B is not None:
            B = np.asarray(self.B)
            if B.shape != A.shape:
                raise ValueError(f"B has shape {B.shape}, A has {A.shape}")
            if self.check:
                if not _is_hermitian(B):
                    raise IndefiniteB("B is not Hermitian")
                try:
                    sla.cholesky(B, lower=True)
                except np.linalg.LinAlgError:
                    raise IndefiniteB("B is not positive definite") from None
            object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def identity_b(self) -> bool:
        return self.B is None

    @property
    def is_real(self) -> bool:
        return not (np.iscomplexobj(self.A) or (self.B is not None and np.iscomplexobj(self.B)))

    def apply_b(self, X):
        return X if self.B is None else self.B @ X

    def b_inner(self, X, Y):
        return X.conj().T @ self.apply_b(Y)

    def norm_estimate(self):
        """(||A||_2, ||B||_2), cached after the first call."""
        cached = self.__dict__.get("_norms")
        if cached is None:
            na = np.linalg.norm(self.A, 2)
            nb = 1.0 if self.B is None else np.linalg.norm(self.B, 2)
            cached = (na, nb)
            object.__setattr__(self, "_norms", cached)
        return cached


@dataclass(frozen=True, eq=False)
class ShiftedFactor:
    """LU factorization of zB - A."""

    z: complex
    lu: np.ndarray
    piv: np.ndarray
    pencil: HermitianPencil

    def solve(self, Y, adjoint=False):
        """X with (zB - A) X = B Y, or with the adjoint shift when ``adjoint``.

        For Hermitian A and B, (zB - A)^H = conj(z) B - A, so the adjoint
        solve gives the solution at the conjugate node from the same factor.
        """
        rhs = self.pencil.apply_b(Y)
        return sla.lu_solve((self.lu, self.piv), rhs, trans=2 if adjoint else 0,
                            check_finite=False)


def factor_shifted(pencil: HermitianPencil, z: complex) -> ShiftedFactor:
    n = pencil.n
    M = -pencil.A.astype(complex)
    if pencil.B is None:
        M[np.diag_indices(n)] += z
    else:
        M += z * pencil.B
    scale = np.linalg.norm(M, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= n * np.finfo(float).eps * scale:
        raise SingularShift(f"zB - A is singular at z={z}", z=z)
    return ShiftedFactor(z=complex(z), lu=lu, piv=piv, pencil=pencil)


def solve_shifted(factor: ShiftedFactor, Y, adjoint=False):
    return factor.solve(Y, adjoint=adjoint)


def svd_with_values(U):
    """Thin SVD: left singular vectors and descending singular values."""
    U = np.asarray(U)
    if U.size == 0:
        raise ValueError("cannot take the SVD of an empty block")
    Q, sigma, _ = np.linalg.svd(U, full_matrices=False)
    return Q, sigma


def hermitian_definite_eig(pencil: HermitianPencil):
    """All eigenpairs of the pencil, eigenvalues ascending, vectors B-orthonormal."""
    try:
        if pencil.B is None:
            return sla.eigh(pencil.A)
        return sla.eigh(pencil.A, pencil.B)
    except np.linalg.LinAlgError as exc:
        raise IndefiniteB(str(exc)) from None
