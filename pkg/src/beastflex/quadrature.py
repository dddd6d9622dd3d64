"""Quadrature rules on elliptical contours and the rational filters they induce.

The contour around ``[lo, hi]`` is the ellipse

    phi(t) = c + r (cos t + i * ecc * sin t),   t in [0, 2 pi)

with ``c = (lo + hi) / 2`` and ``r = (hi - lo) / 2``.  A rule stores nodes
``z_j = phi(t_j)`` and coefficients ``w_j = W_j phi'(t_j) / (2 pi i)``, where
``W_j`` are the weights of the rule in the parameter ``t``.  With this
scaling ``sum_j w_j / (z_j - lam)`` approximates the indicator function of
the interior of the contour.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GAUSS_LEGENDRE = "gauss_legendre"
TRAPEZOIDAL = "trapezoidal"
RULE_KINDS = (GAUSS_LEGENDRE, TRAPEZOIDAL)

_RULE_ALIASES = {
    "gauss": GAUSS_LEGENDRE,
    "gl": GAUSS_LEGENDRE,
    "gauss_legendre": GAUSS_LEGENDRE,
    "gauss-legendre": GAUSS_LEGENDRE,
    "trapezoid": TRAPEZOIDAL,
    "trapezoidal": TRAPEZOIDAL,
    "trap": TRAPEZOIDAL,
}

# drop-rate thresholds for adapt_q
_MILD_DROP = 10.0 ** -1.5
_SLOW_DROP = 10.0 ** -0.75


class SingularEvaluation(ZeroDivisionError):
    """Filter evaluated exactly at a quadrature node."""


def normalize_rule_kind(kind: str) -> str:
    try:
        return _RULE_ALIASES[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown quadrature rule {kind!r}; expected one of {sorted(_RULE_ALIASES)}") from None


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval bounds must be finite, got [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise ValueError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def radius(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def contains(self, values):
        """Closed-interval membership, elementwise."""
        values = np.asarray(values, dtype=float)
        return (values >= self.lo) & (values <= self.hi)


@dataclass(frozen=True, eq=False)
class ContourRule:
    """Nodes and coefficients of a quadrature rule on an ellipse.

    When ``half_contour`` is set only the ``q // 2`` nodes in the upper half
    plane are stored; the lower half is their complex conjugate.
    """

    center: float
    radius_real: float
    ecc: float
    rule_kind: str
    q: int
    nodes: np.ndarray
    coeffs: np.ndarray
    half_contour: bool

    @property
    def stored_nodes(self) -> int:
        return len(self.nodes)

    def full_nodes(self):
        """All ``q`` nodes and coefficients, completing the conjugate half if needed."""
        if not self.half_contour:
            return self.nodes, self.coeffs
        return (np.concatenate([self.nodes, self.nodes.conj()]),
                np.concatenate([self.coeffs, self.coeffs.conj()]))

    @property
    def interval(self) -> Interval:
        return Interval(self.center - self.radius_real, self.center + self.radius_real)


def gauss_legendre_rule(q: int):
    """Gauss-Legendre nodes and weights on [-1, 1], nodes ascending."""
    if q < 1:
        raise ValueError("Gauss-Legendre rule needs q >= 1")
    x, w = np.polynomial.legendre.leggauss(q)
    return x, w


def _parameter_rule(rule_kind: str, q: int):
    """Rule in the ellipse parameter t over [0, 2 pi)."""
    if rule_kind == TRAPEZOIDAL:
        t = 2.0 * np.pi * (np.arange(q) + 0.5) / q
        return t, np.full(q, 2.0 * np.pi / q)
    # one Gauss-Legendre rule per half arc, mirrored so conjugate pairs are exact
    x, w = gauss_legendre_rule(q // 2)
    t_upper = 0.5 * np.pi * (x + 1.0)
    w_half = 0.5 * np.pi * w
    return np.concatenate([t_upper, t_upper + np.pi]), np.concatenate([w_half, w_half])


def build_contour(interval: Interval, ecc: float = 0.1, rule_kind: str = GAUSS_LEGENDRE,
                  q: int = 16, half_contour: bool = True) -> ContourRule:
    rule_kind = normalize_rule_kind(rule_kind)
    if not (0.0 < ecc <= 1.0):
        raise ValueError(f"eccentricity must lie in (0, 1], got {ecc}")
    if q < 2:
        raise ValueError(f"need at least 2 quadrature nodes, got q={q}")
    if half_contour and q % 2:
        raise ValueError(f"half-contour symmetry needs an even node count, got q={q}")
    if rule_kind == GAUSS_LEGENDRE and q % 2:
        raise ValueError(f"Gauss-Legendre contour rule is built per half arc and needs even q, got q={q}")

    c, r = interval.center, interval.radius
    t, weights = _parameter_rule(rule_kind, q)
    nodes = c + r * (np.cos(t) + 1j * ecc * np.sin(t))
    dphi = r * (-np.sin(t) + 1j * ecc * np.cos(t))
    coeffs = weights * dphi / (2j * np.pi)

    if half_contour:
        upper = np.sin(t) > 0
        nodes, coeffs = nodes[upper], coeffs[upper]
        # upper arc in order of increasing t
        order = np.argsort(t[upper])
        nodes, coeffs = nodes[order], coeffs[order]

    return ContourRule(center=c, radius_real=r, ecc=float(ecc), rule_kind=rule_kind, q=int(q),
                       nodes=nodes, coeffs=coeffs, half_contour=bool(half_contour))


def filter_value(rule: ContourRule, k: int, lam):
    """Scalar filter f_k(lam) = sum_j w_j z_j^k / (z_j - lam) over the full contour.

    ``lam`` may be a scalar or an array; the result has the same shape.
    """
    if k < 0:
        raise ValueError("moment index must be non-negative")
    lam = np.asarray(lam, dtype=complex)
    z, w = rule.full_nodes()
    diff = z[:, None] - lam.reshape(1, -1)
    if np.any(diff == 0):
        raise SingularEvaluation("filter evaluated at a quadrature node")
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.sum((w * z ** k)[:, None] / diff, axis=0)
    # lam -> infinity: every term vanishes
    vals = np.where(np.isinf(lam.reshape(-1)), 0.0, vals)
    out = vals.reshape(lam.shape)
    return out[()] if out.ndim == 0 else out


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def adapt_q(q: int, drop: float, even: bool = False) -> int:
    """Next node count given the drop rate of the smallest unconverged residual.

    A drop of at most 10^-1.5 keeps ``q``; up to 10^-0.75 grows it by sqrt(1.5);
    anything slower grows it by 1.5.  Growth is always at least one node, and
    ``even`` rounds up to the next even count.
    """
    if drop <= _MILD_DROP:
        return q
    factor = math.sqrt(1.5) if drop <= _SLOW_DROP else 1.5
    new_q = max(q + 1, _round_half_up(q * factor))
    if even and new_q % 2:
        new_q += 1
    return new_q
