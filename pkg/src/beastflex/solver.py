"""Flexible contour-integration subspace iteration.

One driver covers the single-moment scheme (mode ``c``), multi-moment inner
iterations (``m_in``, restart from the zeroth moment block) and multi-moment
outer iterations (``m_out``, restart from random combinations of the Ritz
vectors).  Multi-moment runs may drop to single-moment when the smallest
unconverged residual stagnates; single-moment runs may grow the quadrature
node count between iterations.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import HermitianPencil, SingularShift
from .problems import EigenProblem, random_initial_block
from .quadrature import (GAUSS_LEGENDRE, ContourRule, adapt_q, build_contour, filter_value,
                         normalize_rule_kind)
from .ritz import (LockedStore, RitzSet, b_orthogonalize, extract, lock_converged,
                   smallest_nonconverged_residual)
from .subspace import DEFAULT_DELTA, CostCounters, ZeroSubspace, build_subspace, orthonormalize_truncate

log = logging.getLogger(__name__)

MODE_C = "c"
MODE_M_IN = "m_in"
MODE_M_OUT = "m_out"
MODES = (MODE_C, MODE_M_IN, MODE_M_OUT)

CONVERGED = "Converged"
MAX_ITERATIONS = "MaxIterations"
STALLED = "Stalled"


class EmptyActiveSet(RuntimeError):
    """No active Ritz vectors are left to restart from."""


def normalize_mode(mode: str) -> str:
    m = mode.lower().replace("-", "_")
    if m in ("m_in", "min", "in"):
        return MODE_M_IN
    if m in ("m_out", "mout", "out"):
        return MODE_M_OUT
    if m in ("c", "feast"):
        return MODE_C
    raise ValueError(f"unknown mode {mode!r}; expected one of c, m-in, m-out")


@dataclass(frozen=True)
class SolverConfig:
    mode: str = MODE_M_OUT
    switch_on_stagnation: bool = True
    adaptive_q: bool = False
    s_initial: int = 4
    subspace_factor: float = 1.5
    n_expect: int | None = None
    tol: float = 1e-13
    max_iter: int = 50
    stagnation_threshold: float = 0.01
    stagnation_statistic: str = "min"
    rule_kind: str = GAUSS_LEGENDRE
    q: int = 16
    ecc: float = 1.0
    half_contour: bool = True
    rng_seed: int = 0
    min_rhs: int = 4
    delta: float = DEFAULT_DELTA
    scaled_moments: bool = False
    relative_residual: bool = False
    forced_switch_at: int | None = None
    m0: int | None = None
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", normalize_mode(self.mode))
        object.__setattr__(self, "rule_kind", normalize_rule_kind(self.rule_kind))
        if self.subspace_factor <= 1:
            raise ValueError("subspace_factor must exceed 1")
        if self.s_initial < 1:
            raise ValueError("need at least one moment")
        if self.tol <= 0 or self.stagnation_threshold <= 0:
            raise ValueError("tolerances must be positive")
        if self.stagnation_statistic not in ("min", "max"):
            raise ValueError("stagnation_statistic is 'min' or 'max'")
        if self.max_iter < 1 or self.min_rhs < 1:
            raise ValueError("max_iter and min_rhs must be positive")

    @property
    def initial_moments(self) -> int:
        return 1 if self.mode == MODE_C else self.s_initial


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    mode: str
    s: int
    q: int
    rhs_1: int
    rank: int
    res_min: float
    res_avg: float
    res_max: float
    locked: int
    rhs_ovl: int
    bls_ovl: int


@dataclass(frozen=True, eq=False)
class SolveResult:
    lam: np.ndarray
    X: np.ndarray
    residual: np.ndarray
    trace: tuple
    counters: CostCounters
    status: str
    switched_at: int | None = None

    @property
    def iterations(self) -> int:
        return len(self.trace)


@dataclass(eq=False)
class SolverState:
    iteration: int
    mode: str
    s: int
    q: int
    rule: ContourRule
    Y: np.ndarray
    locked: LockedStore
    counters: CostCounters = field(default_factory=CostCounters)
    ritz: RitzSet | None = None
    r_snc_prev: float | None = None
    drop: float | None = None
    switched_at: int | None = None
    trace: list = field(default_factory=list)


def detect_stagnation(r_prev, r_cur, threshold: float = 0.01) -> bool:
    """True when the residual fell by less than ``threshold`` since the last iteration."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if r_prev is None or r_cur is None or r_prev == 0:
        return False
    return r_cur / r_prev > threshold


def resize_subspace(config: SolverConfig, locked_count: int, s_current: int, n_expect: int | None = None):
    """(rhs_1, m0_active) for the next iteration."""
    n_expect = config.n_expect if n_expect is None else n_expect
    remaining = max(n_expect - locked_count, 1)
    if config.m0 is not None:
        m0_active = math.ceil(config.m0 * remaining / max(n_expect, 1))
    else:
        m0_active = math.ceil(config.subspace_factor * remaining)
    rhs_1 = max(config.min_rhs, math.ceil(m0_active / s_current))
    return rhs_1, s_current * rhs_1


def _interval_distance(lam, center, radius):
    return np.maximum(np.abs(lam - center) - radius, 0.0), np.abs(lam - center)


def next_initial_vectors(mode: str, U0, ritz: RitzSet, rhs_target: int, rng: np.random.Generator,
                         interval=None):
    """Starting block for the next iteration.

    ``m_in`` reuses the zeroth moment block, ``m_out`` mixes the active Ritz
    vectors with a standard normal matrix, and ``c`` takes the active Ritz
    vectors themselves.  When ``c`` has more active vectors than
    ``rhs_target`` the ones with Ritz values nearest the interval are kept.
    """
    if rhs_target < 1:
        raise ValueError("rhs_target must be positive")
    mode = normalize_mode(mode)
    if mode == MODE_M_IN:
        if U0 is None:
            raise ValueError("inner iterations need the zeroth moment block")
        return U0
    active = ritz.active
    Xa = ritz.X[:, active]
    if Xa.shape[1] == 0:
        raise EmptyActiveSet("no active Ritz vectors left")
    if mode == MODE_M_OUT:
        R = rng.standard_normal((Xa.shape[1], rhs_target))
        return Xa @ R
    if Xa.shape[1] > rhs_target and interval is not None:
        dist, to_center = _interval_distance(ritz.lam[active], interval.center, interval.radius)
        keep = np.lexsort((to_center, dist))[:rhs_target]
        Xa = Xa[:, np.sort(keep)]
    return Xa


def spurious_pairs(ritz: RitzSet, Y, U, rule: ContourRule, ratio: float = 0.5, rcond: float = DEFAULT_DELTA):
    """Flag in-interval Ritz pairs whose vectors the filter did not amplify.

    Valid for single-moment blocks U = F(Y).  Each Ritz vector is written as
    x = U c, and its gain ||x|| / ||Y c|| is compared with |f_0(lam)|.  A
    true eigenvector approximation has gain close to |f_0(lam)|; a mixture of
    outside eigenvectors whose Rayleigh quotient happens to fall inside the
    interval is damped like the outside eigenvalues it is built from.
    """
    flags = np.zeros(len(ritz), dtype=bool)
    cand = ritz.in_interval & ritz.active & ~ritz.converged
    if not cand.any():
        return flags
    X = ritz.X[:, cand]
    C = np.linalg.lstsq(U, X, rcond=rcond)[0]
    gain = np.linalg.norm(X, axis=0) / np.linalg.norm(Y @ C, axis=0)
    expected = np.abs(filter_value(rule, 0, ritz.lam[cand]))
    flags[cand] = gain < ratio * expected
    return flags


def convergence_check(ritz: RitzSet, sigma, delta: float = DEFAULT_DELTA, locked_count: int = 0,
                      spurious=None) -> bool:
    """All in-interval active pairs converged and the subspace not saturated.

    The subspace counts as saturated when it has full numerical rank and every
    Ritz value it produced lies inside the interval, so there is no spare
    column that could have exposed a further eigenvalue.  Pairs flagged in
    ``spurious`` do not hold up convergence.
    """
    pending = ritz.in_interval & ritz.active & ~ritz.converged
    if spurious is not None:
        pending &= ~np.asarray(spurious, dtype=bool)
    if pending.any():
        return False
    sigma = np.asarray(sigma)
    rank = int(np.count_nonzero(sigma > delta * sigma[0])) if sigma.size and sigma[0] > 0 else 0
    full_rank = rank == sigma.size
    return not (full_rank and ritz.in_interval.all())


def _pad_block(Y, width, n, rng):
    if Y.shape[1] >= width:
        return Y
    extra = rng.standard_normal((n, width - Y.shape[1]))
    return np.hstack([Y, extra.astype(Y.dtype) if np.iscomplexobj(Y) else extra])


def _compress_block(Y, width):
    # keep the dominant directions of an over-wide block
    U, sv, _ = np.linalg.svd(Y, full_matrices=False)
    return U[:, :width] * sv[:width]


def _residual_summary(ritz: RitzSet | None, locked: LockedStore, count: int):
    res = list(locked.residual)
    if ritz is not None:
        res.extend(ritz.residual[ritz.active])
    if not res:
        return math.nan, math.nan, math.nan
    res = np.sort(np.asarray(res, dtype=float))[:max(count, 1)]
    return float(res.min()), float(res.mean()), float(res.max())


class BeastSolver:
    """Stateful driver; ``run`` performs the whole iteration."""

    def __init__(self, problem: EigenProblem, config: SolverConfig):
        if config.n_expect is None:
            config = replace(config, n_expect=problem.n_expect)
        self.problem = problem
        self.config = config
        self.rng = np.random.default_rng(config.rng_seed)

    @property
    def pencil(self) -> HermitianPencil:
        return self.problem.pencil

    def _rule(self, q):
        cfg = self.config
        return build_contour(self.problem.interval, cfg.ecc, cfg.rule_kind, q, cfg.half_contour)

    def _cap_rhs(self, rhs_1, locked):
        return max(1, min(rhs_1, self.problem.n - locked))

    def initial_state(self) -> SolverState:
        cfg = self.config
        s = cfg.initial_moments
        rhs_1, _ = resize_subspace(cfg, 0, s)
        rhs_1 = self._cap_rhs(rhs_1, 0)
        Y = random_initial_block(self.problem.n, rhs_1, self.rng)
        dtype = complex if not self.pencil.is_real else float
        return SolverState(iteration=0, mode=cfg.mode, s=s, q=cfg.q, rule=self._rule(cfg.q), Y=Y,
                           locked=LockedStore.empty(self.problem.n, dtype))

    def _record(self, st: SolverState, rank: int):
        rmin, ravg, rmax = _residual_summary(st.ritz, st.locked, self.config.n_expect)
        rec = IterationRecord(st.iteration, "C" if st.mode == MODE_C else "M", st.s, st.q,
                              st.Y.shape[1], rank, rmin, ravg, rmax, len(st.locked),
                              st.counters.rhs_ovl, st.counters.bls_ovl)
        st.trace.append(rec)
        log.debug("iteration %d: %s", st.iteration, rec)
        return rec

    def step(self, st: SolverState) -> bool:
        """One iteration; returns True once the convergence check passes."""
        cfg = self.config
        st.iteration += 1
        if st.mode == MODE_C and cfg.adaptive_q and st.drop is not None:
            even = cfg.half_contour or cfg.rule_kind == GAUSS_LEGENDRE
            new_q = adapt_q(st.q, st.drop, even=even)
            if new_q != st.q:
                st.q, st.rule = new_q, self._rule(new_q)

        Y = b_orthogonalize(self.pencil, st.Y, st.locked.X)
        st.Y = Y
        block = build_subspace(self.pencil, Y, st.rule, st.s, st.counters, cfg.workers, cfg.scaled_moments)
        U0 = block.moment(0).copy() if st.mode == MODE_M_IN else None
        U = b_orthogonalize(self.pencil, block.U, st.locked.X)
        try:
            Q, rank, sigma = orthonormalize_truncate(U, cfg.delta)
        except ZeroSubspace:
            st.ritz = None
            self._record(st, 0)
            return True

        ritz = extract(self.pencil, Q, self.problem.interval, cfg.tol, cfg.relative_residual)
        ritz, st.locked = lock_converged(self.pencil, ritz, st.locked)
        st.ritz = ritz
        spurious = None
        if st.mode == MODE_C and st.iteration > 1:
            spurious = spurious_pairs(ritz, Y, U, st.rule)
        done = convergence_check(ritz, sigma, cfg.delta, len(st.locked), spurious)
        r_cur = smallest_nonconverged_residual(ritz, cfg.tol, cfg.stagnation_statistic)
        self._record(st, rank)
        if done:
            return True

        if st.mode != MODE_C:
            forced = cfg.forced_switch_at is not None and st.iteration >= cfg.forced_switch_at
            stagnant = cfg.switch_on_stagnation and detect_stagnation(st.r_snc_prev, r_cur,
                                                                      cfg.stagnation_threshold)
            if forced or stagnant:
                log.info("switching to single-moment after iteration %d", st.iteration)
                st.mode, st.s, st.switched_at = MODE_C, 1, st.iteration
        st.drop = r_cur / st.r_snc_prev if (r_cur is not None and st.r_snc_prev) else None
        st.r_snc_prev = r_cur

        rhs_1, _ = resize_subspace(cfg, len(st.locked), st.s)
        rhs_1 = self._cap_rhs(rhs_1, len(st.locked))
        if st.mode == MODE_M_IN:
            Y = next_initial_vectors(st.mode, U0, ritz, rhs_1, self.rng)
            if Y.shape[1] > rhs_1:
                Y = _compress_block(b_orthogonalize(self.pencil, Y, st.locked.X), rhs_1)
        else:
            if not ritz.active.any():
                Y = np.zeros((self.problem.n, 0))
            else:
                Y = next_initial_vectors(st.mode, None, ritz, rhs_1, self.rng, self.problem.interval)
        st.Y = _pad_block(Y, rhs_1, self.problem.n, self.rng)
        return False

    def run(self) -> SolveResult:
        st = self.initial_state()
        status = MAX_ITERATIONS
        try:
            while st.iteration < self.config.max_iter:
                if self.step(st):
                    status = CONVERGED
                    break
        except SingularShift as exc:
            # the counters already include the solves that did succeed
            exc.trace = tuple(st.trace)
            raise
        if status != CONVERGED:
            pending = st.ritz is not None and (st.ritz.in_interval & st.ritz.active & ~st.ritz.converged).any()
            status = MAX_ITERATIONS if pending else STALLED
        lam, X, res = self._found(st)
        return SolveResult(lam, X, res, tuple(st.trace), st.counters, status, st.switched_at)

    def _found(self, st: SolverState):
        locked = st.locked
        inside = self.problem.interval.contains(locked.lam)
        lam, X, res = locked.lam[inside], locked.X[:, inside], locked.residual[inside]
        order = np.argsort(lam, kind="stable")
        return lam[order], X[:, order], res[order]


def run(problem: EigenProblem, config: SolverConfig | None = None) -> SolveResult:
    """Compute the eigenpairs of ``problem`` inside its interval."""
    return BeastSolver(problem, config or SolverConfig()).run()
