"""Bayes-risk lower bounds and the prior constructions they apply to.

Two routes are implemented: the Le Cam two-point bound with Pinsker's
inequality, and the small-ball bound driven by a chi-square divergence
radius.  A quadrature oracle computes the exact 1-D Bayes risk of the
posterior mean, which dominates every lower bound (used as the independent
check in the test suite).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .risk import _derive_seed
from .solver import DEFAULT_OPTIONS
from .width import NoiseBatch, find_t_theta, inner_sup_batch

__all__ = [
    "TwoPoint",
    "GridPrior",
    "Pushforward",
    "BoundReport",
    "ChiSquare",
    "lecam_two_point",
    "chi_sq_gaussian",
    "small_ball_lower_bound",
    "sample_pushforward_prior",
    "bayes_oracle_1d",
    "avg_risk_under_prior",
    "prior_from_json",
]

_CHI_SQ_SATURATION = 700.0  # exp overflow threshold for squared distances


@dataclass(frozen=True)
class TwoPoint:
    p1: tuple
    p2: tuple
    w1: float = 0.5
    w2: float = 0.5

    def __init__(self, p1, p2, w1=0.5, w2=0.5):
        if w1 < 0 or w2 < 0 or abs(w1 + w2 - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "p1", tuple(float(v) for v in np.atleast_1d(p1)))
        object.__setattr__(self, "p2", tuple(float(v) for v in np.atleast_1d(p2)))
        object.__setattr__(self, "w1", float(w1))
        object.__setattr__(self, "w2", float(w2))

    def atoms(self):
        return np.array([self.p1, self.p2]), np.array([self.w1, self.w2])

    def to_json(self):
        return {"kind": "two_point", "p1": list(self.p1), "p2": list(self.p2),
                "w1": self.w1, "w2": self.w2}


@dataclass(frozen=True)
class GridPrior:
    points: tuple
    weights: tuple

    def __init__(self, points, weights=None):
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.shape[0] == 1 and np.asarray(points).ndim == 1:
            P = np.asarray(points, dtype=float).reshape(-1, 1)
        if weights is None:
            w = np.full(P.shape[0], 1.0 / P.shape[0])
        else:
            w = np.asarray(weights, dtype=float)
        if len(w) != P.shape[0]:
            raise ValueError("one weight per point required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "points", tuple(map(tuple, P)))
        object.__setattr__(self, "weights", tuple(w))

    def atoms(self):
        return np.asarray(self.points), np.asarray(self.weights)

    def to_json(self):
        return {"kind": "grid", "points": [list(p) for p in self.points],
                "weights": list(self.weights)}


@dataclass(frozen=True)
class Pushforward:
    """Prior given by the law of the localized-supremum maximizer Psi(Z).

    Psi(z) maximizes <z, a - theta_star> - f(a) over the set intersected with
    the ball of radius rho * t_{theta_star} around theta_star.
    """

    theta_star: tuple
    rho: float
    set_: object
    penalty: object
    batch: NoiseBatch

    def __init__(self, theta_star, rho, set_, penalty, batch):
        if rho <= 0 or rho * rho + 4.0 * rho >= 1.0:
            raise ValueError("rho must satisfy rho^2 + 4*rho < 1")
        ts = np.atleast_1d(np.asarray(theta_star, dtype=float))
        if not set_.contains(ts, tol=1e-8):
            raise ValueError("theta_star must lie in the set")
        object.__setattr__(self, "theta_star", tuple(ts))
        object.__setattr__(self, "rho", float(rho))
        object.__setattr__(self, "set_", set_)
        object.__setattr__(self, "penalty", penalty)
        object.__setattr__(self, "batch", batch)


@dataclass
class BoundReport:
    method: str
    value: float
    details: dict

    def to_json(self):
        return {"method": self.method, "value": self.value, "details": self.details}


class ChiSquare(NamedTuple):
    value: float
    saturated: bool


def lecam_two_point(theta0, theta1):
    """Le Cam two-point bound with Pinsker: (1/4) d^2 max(0, 1 - d/2).

    With d = ||theta0 - theta1||, the Gaussian KL is d^2/2, the total
    variation is at most d/2, and for d <= 1 the bound is at least d^2/8.
    """
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    theta1 = np.atleast_1d(np.asarray(theta1, dtype=float))
    if theta0.shape != theta1.shape:
        raise ValueError("dimension mismatch")
    d = float(np.linalg.norm(theta0 - theta1))
    tv = min(1.0, d / 2.0)
    value = 0.25 * d * d * max(0.0, 1.0 - tv)
    return BoundReport("lecam", value, {"distance": d, "kl": d * d / 2.0, "tv_bound": tv})


def chi_sq_gaussian(theta1, theta2):
    """exp(||theta1 - theta2||^2) - 1, with a saturation flag on overflow."""
    theta1 = np.atleast_1d(np.asarray(theta1, dtype=float))
    theta2 = np.atleast_1d(np.asarray(theta2, dtype=float))
    if theta1.shape != theta2.shape:
        raise ValueError("dimension mismatch")
    d2 = float(np.sum((theta1 - theta2) ** 2))
    if d2 > _CHI_SQ_SATURATION:
        return ChiSquare(math.inf, True)
    return ChiSquare(math.expm1(d2), False)


def _atoms_of(prior):
    if isinstance(prior, Pushforward):
        samples = sample_pushforward_prior(prior)
        w = np.full(len(samples), 1.0 / len(samples))
        return np.asarray(samples), w
    return prior.atoms()


def small_ball_lower_bound(prior, I, candidates=None):
    """(1/2) * sup{ t > 0 : max_a mass of the ball of squared radius t < 1/(4(1+I)) }.

    Candidates default to the prior's atoms.  For a discrete prior the sup is
    the smallest over candidates of the squared distance at which cumulative
    mass first reaches the threshold.
    """
    if I < 0:
        raise ValueError("I must be nonnegative")
    points, weights = _atoms_of(prior)
    if candidates is None:
        candidates = points
    else:
        candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    if len(candidates) == 0:
        raise ValueError("need at least one candidate center")
    threshold = 1.0 / (4.0 * (1.0 + I))
    t_star = math.inf
    argmin = None
    for a in candidates:
        d2 = np.sum((points - a) ** 2, axis=1)
        order = np.argsort(d2)
        cmass = np.cumsum(weights[order])
        idx = int(np.searchsorted(cmass, threshold))
        if idx >= len(d2):
            continue  # total mass below threshold: ball never fills
        ta = float(d2[order][idx])
        if ta < t_star:
            t_star, argmin = ta, a
    if not math.isfinite(t_star) or t_star <= 0.0:
        return BoundReport("small_ball", 0.0,
                           {"I": I, "threshold": threshold, "t": 0.0})
    return BoundReport(
        "small_ball", 0.5 * t_star,
        {"I": I, "threshold": threshold, "t": t_star, "center": list(np.atleast_1d(argmin))},
    )


def sample_pushforward_prior(p, opts=DEFAULT_OPTIONS, t_result=None, t_batch_count=2000):
    """Maximizer samples Psi(Z) over the localized set, one per batch member."""
    theta_star = np.asarray(p.theta_star)
    if t_result is None:
        t_result = find_t_theta(
            theta_star, p.set_, p.penalty,
            NoiseBatch(_derive_seed(p.batch.seed, "pushforward-ttheta"), t_batch_count,
                       p.batch.dim),
            opts,
        )
    radius = p.rho * t_result.t_theta
    _, A = inner_sup_batch(p.batch.vectors(), theta_star, radius, p.set_, p.penalty, opts)
    return A


def bayes_oracle_1d(prior, quad_points=2000):
    """Exact Bayes risk of the posterior mean for a discrete 1-D prior.

    Squared-error Bayes risk is E[Var(theta | X)], computed by trapezoid
    quadrature of the marginal-weighted posterior variance.
    """
    if quad_points < 100:
        raise ValueError("quad_points must be >= 100")
    points, weights = prior.atoms()
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 1:
        raise ValueError("bayes_oracle_1d requires a one-dimensional prior")
    th = points[:, 0]
    lo, hi = th.min() - 8.0, th.max() + 8.0
    x = np.linspace(lo, hi, quad_points)
    # posterior over atoms given x, weighted by the marginal density
    logphi = -0.5 * (x[:, None] - th[None, :]) ** 2 - 0.5 * math.log(2.0 * math.pi)
    dens = weights[None, :] * np.exp(logphi)
    marginal = dens.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        post = dens / marginal[:, None]
    post = np.nan_to_num(post)
    mean = post @ th
    second = post @ (th * th)
    var = np.maximum(second - mean * mean, 0.0)
    return float(np.trapezoid(marginal * var, x))


def avg_risk_under_prior(est, prior, reps, seed, opts=DEFAULT_OPTIONS):
    """Monte-Carlo prior-averaged risk: theta ~ prior, X ~ N(theta, I), loss^2."""
    if reps < 2:
        raise ValueError("reps must be >= 2")
    points, weights = _atoms_of(prior)
    if est.kind == "zero":
        # analytic: average of ||theta||^2 under the prior
        return float(np.sum(weights * np.sum(points * points, axis=1))), 0.0
    rng = np.random.default_rng(_derive_seed(seed, "prior-draw"))
    idx = rng.choice(len(points), size=reps, p=weights)
    thetas = points[idx]
    Z = NoiseBatch(_derive_seed(seed, "prior-noise"), reps, points.shape[1]).vectors()
    X = thetas + Z
    points_hat = est.apply_many(X)
    losses = np.sum((points_hat - thetas) ** 2, axis=1)
    return float(losses.mean()), float(losses.std(ddof=1) / math.sqrt(reps))


def prior_from_json(d):
    kind = d.get("kind")
    if kind == "two_point":
        return TwoPoint(d["p1"], d["p2"], d.get("w1", 0.5), d.get("w2", 0.5))
    if kind == "grid":
        return GridPrior(d["points"], d.get("weights"))
    raise ValueError(f"unknown prior kind: {kind!r}")
