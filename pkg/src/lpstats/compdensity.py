"""Comparison distributions and densities against a reference model.

Given a sample F and a reference distribution G, the comparison
distribution D(u) = F(Q_G(u)) measures how the data deviate from the
model on the probability scale: data drawn from G give D close to the
diagonal, and the comparison density d(u) = D'(u) close to 1. Two
estimators are provided, the orthogonal L2 series

    d(u) = 1 + sum_j C_j Leg_j(u),   C_j = E[Leg_j(G(X))]

and the maximum-entropy exponential model log d(u) = theta_0 + sum_j
theta_j Leg_j(u), fitted by moment matching on the selected coefficients.
Reweighting g by the fitted comparison density gives the skew-G density
estimate f(x) = g(x) d(G(x)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr, ndtri

from .empirical import Sample
from .errors import (DegenerateScale, DomainError, FlavorNotFitted,
                     IllConditioned, NonConvergence, OrderTooHigh,
                     UnboundedDensity)
from .lp import select_significant
from .scores import legendre_eval

__all__ = [
    "ReferenceDistribution",
    "CompDensityModel",
    "normal_reference",
    "exponential_reference",
    "uniform_reference",
    "empirical_reference",
    "fit_reference",
    "comparison_distribution",
    "pp_grid",
    "l2_fit",
    "maxent_fit",
    "eval_density",
    "skew_g_density",
    "gof_distance",
    "simulate_skew_g",
]

L2_ORDER_CAP = 8
MAXENT_TERM_CAP = 6
QUAD_NODES = 128
CLIP_FLOOR = 1e-6


@lru_cache(maxsize=8)
def _gauss01(nodes: int = QUAD_NODES):
    """Gauss-Legendre nodes and weights mapped to [0, 1].

    Nodes come from numpy's leggauss (companion-matrix roots polished by
    one Newton step), then the affine map from [-1, 1].
    """
    x, w = leggauss(nodes)
    return (x + 1.0) / 2.0, w / 2.0


def _leg_table(orders, u):
    """Rows of Leg_j(u) for the requested orders (iterable of ints)."""
    u = np.asarray(u, dtype=float)
    return np.array([legendre_eval(j, u) for j in orders]) if len(orders) \
        else np.empty((0, u.size))


class ReferenceDistribution:
    """A reference model G with evaluable cdf, quantile, and density.

    Use the module constructors (`normal_reference`, ...). `kind` and
    `params` identify the model for serialization; `has_density` is False
    for the empirical kind, which supports comparison fitting but not the
    skew-G density.
    """

    __slots__ = ("kind", "params", "has_density", "_cdf", "_pdf", "_quantile")

    def __init__(self, kind, params, cdf, quantile, pdf=None):
        self.kind = kind
        self.params = dict(params)
        self._cdf = cdf
        self._quantile = quantile
        self._pdf = pdf
        self.has_density = pdf is not None

    def cdf(self, x):
        xa = np.asarray(x, dtype=float)
        out = self._cdf(np.atleast_1d(xa))
        return float(out[0]) if xa.ndim == 0 else out

    def quantile(self, u):
        ua = np.asarray(u, dtype=float)
        out = self._quantile(np.atleast_1d(ua))
        return float(out[0]) if ua.ndim == 0 else out

    def pdf(self, x):
        if not self.has_density:
            raise DomainError(f"reference kind {self.kind!r} has no density")
        xa = np.asarray(x, dtype=float)
        out = self._pdf(np.atleast_1d(xa))
        return float(out[0]) if xa.ndim == 0 else out

    def __repr__(self):
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"ReferenceDistribution({self.kind}({inner}))"


def normal_reference(mu: float, sigma: float) -> ReferenceDistribution:
    if sigma <= 0.0:
        raise DegenerateScale("sigma must be positive")

    def qf(u):
        if np.any((u <= 0.0) | (u >= 1.0)):
            raise DomainError("normal quantile needs u in (0, 1)")
        return mu + sigma * ndtri(u)

    return ReferenceDistribution(
        "normal", {"mu": mu, "sigma": sigma},
        cdf=lambda x: ndtr((x - mu) / sigma),
        quantile=qf,
        pdf=lambda x: np.exp(-0.5 * ((x - mu) / sigma) ** 2)
        / (sigma * math.sqrt(2.0 * math.pi)),
    )


def exponential_reference(rate: float) -> ReferenceDistribution:
    if rate <= 0.0:
        raise DegenerateScale("rate must be positive")

    def qf(u):
        if np.any((u < 0.0) | (u >= 1.0)):
            raise DomainError("exponential quantile needs u in [0, 1)")
        return -np.log1p(-u) / rate

    return ReferenceDistribution(
        "exponential", {"rate": rate},
        cdf=lambda x: np.where(x < 0.0, 0.0, -np.expm1(-rate * np.maximum(x, 0.0))),
        quantile=qf,
        pdf=lambda x: np.where(x < 0.0, 0.0, rate * np.exp(-rate * np.maximum(x, 0.0))),
    )


def uniform_reference(a: float, b: float) -> ReferenceDistribution:
    if not b > a:
        raise DegenerateScale("need a < b")

    def qf(u):
        if np.any((u < 0.0) | (u > 1.0)):
            raise DomainError("uniform quantile needs u in [0, 1]")
        return a + u * (b - a)

    return ReferenceDistribution(
        "uniform", {"a": a, "b": b},
        cdf=lambda x: np.clip((x - a) / (b - a), 0.0, 1.0),
        quantile=qf,
        pdf=lambda x: np.where((x >= a) & (x <= b), 1.0 / (b - a), 0.0),
    )


def _step_cdf(s: Sample, x):
    idx = np.searchsorted(s.values, x, side="right") - 1
    return np.where(idx >= 0, s.cdf[np.clip(idx, 0, None)], 0.0)


def empirical_reference(s: Sample) -> ReferenceDistribution:
    """The sample's own step CDF and left-continuous quantile as G."""

    def qf(u):
        if np.any((u <= 0.0) | (u > 1.0)):
            raise DomainError("empirical quantile needs u in (0, 1]")
        return s.values[np.searchsorted(s.cdf, u, side="left")]

    return ReferenceDistribution(
        "empirical", {"n": s.n},
        cdf=lambda x: _step_cdf(s, x),
        quantile=qf,
    )


def fit_reference(kind: str, s: Sample) -> ReferenceDistribution:
    """Moment-fit a named reference family to a sample.

    normal: (mean, sd); exponential: rate 1/mean (data must have positive
    mean); uniform: the observed range. Deterministic by construction, no
    likelihood optimization.
    """
    if kind == "normal":
        return normal_reference(s.mean, s.sd)
    if kind == "exponential":
        if s.mean <= 0.0:
            raise DomainError("exponential fit needs a positive mean")
        return exponential_reference(1.0 / s.mean)
    if kind == "uniform":
        return uniform_reference(float(s.values[0]), float(s.values[-1]))
    if kind == "empirical":
        return empirical_reference(s)
    raise DomainError(f"unknown reference kind {kind!r}")


@dataclass(frozen=True)
class CompDensityModel:
    """Fitted comparison density of a sample against a reference G.

    `c` holds the L2 coefficients C_1..C_m and `selected` the mask chosen
    by the penalized rule. After `maxent_fit`, `theta` (length m, zeros on
    unselected orders) and `theta0` describe the exponential model;
    `maxent_residual` and `maxent_iterations` record the solve.
    """

    g: ReferenceDistribution
    order: int
    c: np.ndarray
    selected: np.ndarray
    n: int
    rule: str
    theta: np.ndarray | None = None
    theta0: float | None = None
    maxent_residual: float | None = None
    maxent_iterations: int | None = None


def comparison_distribution(s: Sample, g: ReferenceDistribution, u):
    """D(u) = F(Q_G(u)), the sample CDF looked at through G's quantile."""
    ua = np.asarray(u, dtype=float)
    scalar = ua.ndim == 0
    uv = np.atleast_1d(ua)
    if np.any((uv <= 0.0) | (uv >= 1.0)):
        raise DomainError("comparison level must lie in (0, 1)")
    out = _step_cdf(s, g.quantile(uv))
    return float(out[0]) if scalar else out


def pp_grid(s: Sample, g: ReferenceDistribution):
    """Probability-probability pairs (G(x_j), F(x_j)) at the atoms."""
    return g.cdf(s.values), s.cdf.copy()


def l2_fit(s: Sample, g: ReferenceDistribution, m: int = 4,
           rule: str = "aic") -> CompDensityModel:
    """Project the comparison density on the Legendre basis.

    C_j is the observation mean of Leg_j(G(x)), computed over the atom
    table with masses as weights. Selection reuses the penalized rule
    shared with the comoment machinery.
    """
    m = int(m)
    if m < 1:
        raise DomainError("order must be at least 1")
    if m > L2_ORDER_CAP:
        raise OrderTooHigh(f"L2 order {m} above cap {L2_ORDER_CAP}")
    u_atoms = np.clip(np.asarray(g.cdf(s.values), dtype=float), 0.0, 1.0)
    table = _leg_table(range(1, m + 1), u_atoms)
    c = table @ s.masses
    selected = select_significant(c, s.n, rule=rule)
    return CompDensityModel(g=g, order=m, c=c, selected=selected,
                            n=s.n, rule=rule)


def maxent_fit(mod: CompDensityModel, tol: float = 1e-8,
               max_iter: int = 100) -> CompDensityModel:
    """Fit the exponential comparison-density model by moment matching.

    Solves for theta such that the fitted density exp(theta_0 + sum
    theta_j Leg_j) reproduces the selected L2 coefficients:
    integral Leg_j d(u) du = C_j. Newton iteration on the log-partition
    function with 128-node Gauss-Legendre quadrature; steps are halved
    until the dual objective decreases (at most 30 times). theta_0 is the
    normalizer, so the result integrates to 1 by construction.
    """
    ks = np.flatnonzero(mod.selected)
    if ks.size > MAXENT_TERM_CAP:
        raise OrderTooHigh(
            f"{ks.size} selected terms exceed the maxent cap {MAXENT_TERM_CAP}"
        )
    theta_full = np.zeros(mod.order)
    if ks.size == 0:
        return replace(mod, theta=theta_full, theta0=0.0,
                       maxent_residual=0.0, maxent_iterations=0)
    targets = mod.c[ks]
    nodes, wts = _gauss01(QUAD_NODES)
    leg = _leg_table((ks + 1).tolist(), nodes)

    def dual(theta):
        score = theta @ leg
        peak = score.max()
        psi = math.log(float(wts @ np.exp(score - peak))) + peak
        return psi, psi - float(theta @ targets)

    theta = np.zeros(ks.size)
    psi, objective = dual(theta)
    for iteration in range(1, max_iter + 1):
        probs = wts * np.exp(theta @ leg - psi)
        mom = leg @ probs
        grad = mom - targets
        residual = float(np.max(np.abs(grad)))
        if residual < tol:
            theta_full[ks] = theta
            return replace(mod, theta=theta_full, theta0=-psi,
                           maxent_residual=residual,
                           maxent_iterations=iteration - 1)
        hess = (leg * probs) @ leg.T - np.outer(mom, mom)
        try:
            step = np.linalg.solve(hess, grad)
            if not np.all(np.isfinite(step)):
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = grad  # damped gradient fallback
        scale = 1.0
        for _ in range(30):
            psi_new, objective_new = dual(theta - scale * step)
            if objective_new < objective:
                break
            scale *= 0.5
        else:
            raise IllConditioned(
                "maxent step found no descent after 30 halvings"
            )
        theta = theta - scale * step
        psi, objective = psi_new, objective_new
    probs = wts * np.exp(theta @ leg - psi)
    raise NonConvergence(np.max(np.abs(leg @ probs - targets)), max_iter)


def _l2_series(mod: CompDensityModel, u: np.ndarray) -> np.ndarray:
    ks = np.flatnonzero(mod.selected)
    if ks.size == 0:
        return np.ones_like(u)
    return 1.0 + mod.c[ks] @ _leg_table((ks + 1).tolist(), u)


def eval_density(mod: CompDensityModel, u, flavor: str = "maxent"):
    """Evaluate the fitted comparison density at u in [0, 1].

    Flavors: "l2" is the raw series (can go negative), "l2_clipped"
    floors it at 1e-6 and renormalizes by quadrature, "maxent" is the
    exponential model and needs `maxent_fit` to have run.
    """
    ua = np.asarray(u, dtype=float)
    scalar = ua.ndim == 0
    uv = np.atleast_1d(ua).astype(float)
    if np.any((uv < 0.0) | (uv > 1.0)):
        raise DomainError("comparison density is defined on [0, 1]")
    if flavor == "l2":
        out = _l2_series(mod, uv)
    elif flavor == "l2_clipped":
        nodes, wts = _gauss01(QUAD_NODES)
        norm = float(wts @ np.maximum(_l2_series(mod, nodes), CLIP_FLOOR))
        out = np.maximum(_l2_series(mod, uv), CLIP_FLOOR) / norm
    elif flavor == "maxent":
        if mod.theta is None:
            raise FlavorNotFitted("run maxent_fit first")
        ks = np.flatnonzero(mod.theta)
        series = mod.theta[ks] @ _leg_table((ks + 1).tolist(), uv) \
            if ks.size else np.zeros_like(uv)
        out = np.exp(mod.theta0 + series)
    else:
        raise DomainError(f"unknown flavor {flavor!r}")
    return float(out[0]) if scalar else out


def _best_flavor(mod: CompDensityModel) -> str:
    return "maxent" if mod.theta is not None else "l2_clipped"


def skew_g_density(mod: CompDensityModel, x):
    """Skew-G density estimate f(x) = g(x) d(G(x)).

    Uses the maxent flavor when fitted, the clipped series otherwise; the
    reference must have a density.
    """
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xv = np.atleast_1d(xa)
    gx = np.clip(np.asarray(mod.g.cdf(xv), dtype=float), 0.0, 1.0)
    out = mod.g.pdf(xv) * eval_density(mod, gx, flavor=_best_flavor(mod))
    return float(out[0]) if scalar else out


def gof_distance(mod: CompDensityModel) -> float:
    """Integrated squared deviation of the fitted series from uniform.

    By Parseval this is just the squared sum of the selected C_j; zero
    means the reference G fits the sample at the chosen order.
    """
    return float(np.sum(mod.c[mod.selected] ** 2))


def simulate_skew_g(mod: CompDensityModel, count: int, seed) -> np.ndarray:
    """Accept-reject draws from the skew-G model, exact count, seeded.

    Proposals come from G itself; a proposal at probability level u is
    accepted when d(u) exceeds C times an independent uniform, with the
    envelope C taken as the density maximum over a 4096-point grid times
    a 1.001 safety factor.
    """
    count = int(count)
    flavor = _best_flavor(mod)
    grid = (np.arange(4096) + 0.5) / 4096.0
    peak = float(np.max(eval_density(mod, grid, flavor=flavor)))
    if peak > 1e6:
        raise UnboundedDensity(f"envelope {peak:.3e} beyond 1e6")
    envelope = peak * 1.001
    rng = np.random.default_rng(seed)
    keep = []
    kept = 0
    while kept < count:
        u = rng.random(4096)
        v = rng.random(4096)
        ok = (u > 0.0) & (eval_density(mod, u, flavor=flavor) > envelope * v)
        draw = mod.g.quantile(u[ok])
        keep.append(draw)
        kept += draw.size
    return np.concatenate(keep)[:count]
