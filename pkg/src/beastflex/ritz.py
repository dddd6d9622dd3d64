"""Rayleigh-Ritz extraction, residuals, and locking of converged pairs."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .linalg import HermitianPencil
from .quadrature import Interval


class ReducedIndefinite(np.linalg.LinAlgError):
    """The projected B lost positive definiteness."""


@dataclass(eq=False)
class RitzSet:
    lam: np.ndarray
    X: np.ndarray
    residual: np.ndarray
    in_interval: np.ndarray
    converged: np.ndarray
    locked: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.locked is None:
            self.locked = np.zeros(len(self.lam), dtype=bool)

    def __len__(self):
        return len(self.lam)

    @property
    def active(self):
        return ~self.locked

    def subset(self, mask):
        return RitzSet(self.lam[mask], self.X[:, mask], self.residual[mask],
                       self.in_interval[mask], self.converged[mask], self.locked[mask])


@dataclass(eq=False)
class LockedStore:
    """Converged eigenpairs, vectors B-orthonormal."""

    X: np.ndarray
    lam: np.ndarray = field(default_factory=lambda: np.zeros(0))
    residual: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def empty(cls, n, dtype=float):
        return cls(np.zeros((n, 0), dtype=dtype))

    def __len__(self):
        return self.X.shape[1]


def residual_norms(pencil: HermitianPencil, X, lam):
    """Column norms of A X - B X diag(lam)."""
    R = pencil.A @ X - pencil.apply_b(X) * lam[None, :]
    return np.linalg.norm(R, axis=0)


def extract(pencil: HermitianPencil, Q, interval: Interval, tol: float,
            relative: bool = False) -> RitzSet:
    """Ritz pairs of the pencil from the orthonormal basis Q, values ascending.

    Ritz vectors are scaled to unit 2-norm.  With ``relative`` the residual is
    divided by ||A|| + |lam| ||B||.
    """
    AQ = pencil.A @ Q
    A_u = Q.conj().T @ AQ
    A_u = 0.5 * (A_u + A_u.conj().T)
    if pencil.B is None:
        lam, W = sla.eigh(A_u)
    else:
        B_u = Q.conj().T @ (pencil.B @ Q)
        B_u = 0.5 * (B_u + B_u.conj().T)
        try:
            lam, W = sla.eigh(A_u, B_u)
        except np.linalg.LinAlgError as exc:
            raise ReducedIndefinite(f"projected B is not positive definite: {exc}") from None
    X = Q @ W
    X /= np.linalg.norm(X, axis=0)
    res = residual_norms(pencil, X, lam)
    if relative:
        na, nb = pencil.norm_estimate()
        res = res / (na + np.abs(lam) * nb)
    inside = interval.contains(lam)
    return RitzSet(lam=lam, X=X, residual=res, in_interval=inside, converged=res < tol)


def smallest_nonconverged_residual(ritz: RitzSet, tol: float, statistic: str = "min"):
    """r_SNC: the smallest residual among in-interval active pairs still at or above tol.

    Returns None when no such pair exists.  ``statistic="max"`` takes the
    largest instead.
    """
    mask = ritz.in_interval & ritz.active & (ritz.residual >= tol)
    if not mask.any():
        return None
    vals = ritz.residual[mask]
    return float(vals.min() if statistic == "min" else vals.max())


def b_orthogonalize(pencil: HermitianPencil, V, basis, passes: int = 2):
    """Remove from the columns of V their B-components along the B-orthonormal ``basis``.

    Modified Gram-Schmidt over the basis vectors, repeated ``passes`` times.
    """
    if basis.shape[1] == 0 or V.shape[1] == 0:
        return V
    dtype = np.result_type(V, basis)
    V = V.astype(dtype, copy=True)
    Bbasis = pencil.apply_b(basis)
    for _ in range(passes):
        for i in range(basis.shape[1]):
            coef = Bbasis[:, i].conj() @ V
            V -= np.outer(basis[:, i], coef)
    return V


def b_normalize(pencil: HermitianPencil, V):
    norms = np.sqrt(np.real(np.einsum("ij,ij->j", V.conj(), pencil.apply_b(V))))
    return V / norms


def lock_converged(pencil: HermitianPencil, ritz: RitzSet, store: LockedStore):
    """Move newly converged in-interval pairs into ``store``.

    The remaining active Ritz vectors are B-orthogonalized against the whole
    store and rescaled to unit 2-norm.  Returns (ritz, store); ``ritz.locked``
    flags the pairs that were moved.
    """
    new = ritz.in_interval & ritz.converged & ~ritz.locked
    X = ritz.X.copy()
    if new.any():
        Xn = X[:, new]
        stored = store.X.astype(np.result_type(store.X, Xn))
        # Ritz vectors are already mutually B-orthogonal; this guards accumulated drift
        for i in range(Xn.shape[1]):
            v = b_orthogonalize(pencil, Xn[:, i:i + 1], stored)
            stored = np.hstack([stored, b_normalize(pencil, v)])
        store = LockedStore(stored,
                            np.concatenate([store.lam, ritz.lam[new]]),
                            np.concatenate([store.residual, ritz.residual[new]]))
    locked = ritz.locked | new
    active = ~locked
    if active.any() and len(store):
        Xa = b_orthogonalize(pencil, X[:, active], store.X)
        X = X.astype(Xa.dtype)
        norms = np.linalg.norm(Xa, axis=0)
        X[:, active] = Xa / np.where(norms > 0, norms, 1.0)
    out = RitzSet(ritz.lam, X, ritz.residual, ritz.in_interval, ritz.converged, locked)
    return out, store
