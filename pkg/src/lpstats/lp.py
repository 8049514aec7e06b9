"""LP moments and comoments: rank-based moment diagnostics of one or two
variables.

The j-th LP moment of X is the projection E[Z(X) T_j(X)] of the
standardized variable on its own j-th orthonormal score; the vector of
them plays the role classical moments (or L-moments) play, but works
unchanged for discrete and tied data. The (j, k) LP comoment of a pair is
E[T_j(X) T_k(Y)], the (j, k) coefficient of the copula density expansion;
its square sum over model-selected cells is the dependence measure
LPINFOR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .empirical import Sample, make_sample, mid_ranks
from .errors import (DegenerateScale, DomainError, LengthMismatch,
                     OrderOutOfRange)
from .scores import ScoreBasis

__all__ = [
    "LPMomentVector",
    "LPComomentMatrix",
    "CorrelationReport",
    "LHermiteResult",
    "lp_moments",
    "lp_comoments",
    "correlations",
    "select_significant",
    "lpinfor",
    "lhermite_normality",
]

TAIL_THRESHOLD = 0.95


@dataclass(frozen=True)
class LPMomentVector:
    """LP moments LP(1..m; X) plus the tail index.

    The tail index is the smallest order whose cumulative squared moments
    reach the threshold (default .95); None when even the full vector
    stays below it. The squared sum obeys the Bessel bound sum <= 1.
    """

    moments: np.ndarray
    tail_index: int | None
    threshold: float = TAIL_THRESHOLD


@dataclass(frozen=True)
class LPComomentMatrix:
    """LP comoments of a pair, with the selection mask and LPINFOR.

    `entries[j-1, k-1]` is LP(j, k; X, Y). The matrix is rectangular when
    one margin supports fewer orthonormal scores than requested (r - 1
    scores exist on r atoms). `selected` marks the cells kept by the
    penalized selection rule; `lpinfor` is the squared sum over them.
    """

    entries: np.ndarray
    n: int
    selected: np.ndarray
    lpinfor: float
    rule: str


@dataclass(frozen=True)
class CorrelationReport:
    """Four dependence coefficients of one paired sample."""

    pearson: float
    spearman_mid: float
    gini_xy: float
    gini_yx: float


@dataclass(frozen=True)
class LHermiteResult:
    statistic: float
    significant: bool


def lp_moments(s: Sample, b: ScoreBasis, m: int | None = None,
               threshold: float = TAIL_THRESHOLD) -> LPMomentVector:
    """LP(j; X) = E[Z(X) T_j(X)] for j = 1..m, with the tail index."""
    if s.sd <= 0.0:
        raise DegenerateScale("sample standard deviation is zero")
    if m is None:
        m = b.max_order
    m = int(m)
    if not 1 <= m <= b.max_order:
        raise OrderOutOfRange(
            f"order {m} outside the constructed range 1..{b.max_order}"
        )
    z = (b.source.values - s.mean) / s.sd
    moments = (b.table[:m] * b.source.masses) @ z
    cumulative = np.cumsum(moments ** 2)
    reached = np.flatnonzero(cumulative >= threshold)
    tail = int(reached[0]) + 1 if reached.size else None
    return LPMomentVector(moments=moments, tail_index=tail,
                          threshold=float(threshold))


def _table_at(b: ScoreBasis, obs: np.ndarray) -> np.ndarray:
    """Rows of the score table looked up at arbitrary observations."""
    idx = np.searchsorted(b.source.values, obs, side="right") - 1
    return b.table[:, np.clip(idx, 0, None)]


def lp_comoments(x_obs, y_obs, bx: ScoreBasis, by: ScoreBasis,
                 m: int = 4, rule: str = "aic") -> LPComomentMatrix:
    """LP(j, k; X, Y) = E[T_j(X) T_k(Y)] over the paired observations.

    The requested order m is clipped per margin to what the basis
    supports, so heavily tied variables give fewer rows or columns rather
    than failing. Selection and LPINFOR are filled in immediately.
    """
    x = np.asarray(x_obs, dtype=float).ravel()
    y = np.asarray(y_obs, dtype=float).ravel()
    if x.size != y.size:
        raise LengthMismatch(x.size, y.size)
    m = int(m)
    if m < 1:
        raise OrderOutOfRange("order must be at least 1")
    tx = _table_at(bx, x)[: min(m, bx.max_order)]
    ty = _table_at(by, y)[: min(m, by.max_order)]
    entries = tx @ ty.T / x.size
    selected = select_significant(entries, x.size, rule=rule)
    info = float(np.sum(entries[selected] ** 2))
    return LPComomentMatrix(entries=entries, n=int(x.size),
                            selected=selected, lpinfor=info, rule=rule)


def select_significant(coefficients, n: int, rule: str = "aic") -> np.ndarray:
    """Penalized prefix selection on squared coefficients.

    Coefficients are ranked by descending square (ties broken by array
    position) and the prefix maximizing sum(c^2) - k * penalty is kept,
    where the per-term penalty is 2/n for "aic" and log(n)/n for "bic".
    Rule "none" keeps everything. Returns a boolean mask of the input's
    shape; the empty prefix wins when nothing clears the penalty.
    """
    c = np.asarray(coefficients, dtype=float)
    if rule == "none":
        return np.ones(c.shape, dtype=bool)
    if rule == "aic":
        penalty = 2.0 / n
    elif rule == "bic":
        penalty = math.log(n) / n
    else:
        raise DomainError(f"unknown selection rule {rule!r}")
    flat = c.ravel()
    order = np.argsort(-flat ** 2, kind="stable")
    gains = flat[order] ** 2 - penalty
    scores = np.concatenate(([0.0], np.cumsum(gains)))
    keep = int(np.argmax(scores))  # first maximum: smallest prefix on ties
    mask = np.zeros(flat.size, dtype=bool)
    mask[order[:keep]] = True
    return mask.reshape(c.shape)


def lpinfor(matrix: LPComomentMatrix) -> float:
    """Squared sum of the selected comoments."""
    return float(np.sum(matrix.entries[matrix.selected] ** 2))


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    sa = a.std()
    sb = b.std()
    if sa <= 0.0 or sb <= 0.0:
        raise DegenerateScale("zero variance in correlation input")
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


def correlations(x_obs, y_obs) -> CorrelationReport:
    """Pearson, mid-rank Spearman, and the two Gini correlations.

    spearman_mid is E[T_1(X) T_1(Y)], the Pearson correlation of the
    mid-rank transforms; unlike the classical Spearman it needs no tie
    correction terms. The Gini pair correlates each raw variable with the
    other's mid-ranks.
    """
    x = np.asarray(x_obs, dtype=float).ravel()
    y = np.asarray(y_obs, dtype=float).ravel()
    if x.size != y.size:
        raise LengthMismatch(x.size, y.size)
    if x.size < 2:
        raise DegenerateScale("need at least two paired observations")
    ux = mid_ranks(make_sample(x))
    uy = mid_ranks(make_sample(y))
    return CorrelationReport(
        pearson=_pearson(x, y),
        spearman_mid=_pearson(ux, uy),
        gini_xy=_pearson(x, uy),
        gini_yx=_pearson(ux, y),
    )


def lhermite_normality(s: Sample) -> LHermiteResult:
    """Correlation-style normality diagnostic from normal scores.

    The statistic is E[Z(X) q(X)] / sd(q(X)) with q(x) the standard
    normal quantile of Fmid(x), a scale-free ratio of a normal-scores
    estimate of sd to the empirical sd; it equals 1 for data that are an
    increasing linear image of their own normal scores and drops below 1
    as the shape departs from Gaussian. Flagged significant when
    -log(statistic) exceeds 1/n (a .05-level calibration; meaningful from
    roughly n = 8 up).
    """
    if s.sd <= 0.0:
        raise DegenerateScale("sample standard deviation is zero")
    p = s.masses
    z = (s.values - s.mean) / s.sd
    w = ndtri(s.fmid)
    w_sd = math.sqrt(float(p @ w ** 2) - float(p @ w) ** 2)
    if w_sd <= 0.0:
        raise DegenerateScale("degenerate normal scores")
    statistic = float(p @ (z * w)) / w_sd
    significant = -math.log(statistic) > 1.0 / s.n
    return LHermiteResult(statistic=statistic, significant=bool(significant))
