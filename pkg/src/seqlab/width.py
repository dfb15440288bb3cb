"""Monte-Carlo estimation of the penalized localized Gaussian width.

For a noise draw z the inner supremum

    sup { <z, a - theta> - f(a) : a in set, ||a - theta|| <= t }

is computed by Lagrangian duality: for a multiplier mu > 0 the relaxed
maximizer is the penalized least-squares solution at theta + z/mu with
penalty f/mu, and its distance to theta is nonincreasing in mu.  Bisecting
the multiplier to match the ball radius gives the exact constrained maximizer
(strong duality; Slater holds for t > 0).  Each dual evaluation is a closed
form solve for the whole set/penalty catalog, so batches vectorize.

One fixed noise batch is reused across all t values (common random numbers),
which makes the sample width curve exactly nondecreasing and concave in t, so
the sample version of the concentration point can be located by golden
section search.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .sets import Singleton
from .solver import DEFAULT_OPTIONS, solve_scaled_rows

__all__ = [
    "NoiseBatch",
    "WidthProfile",
    "TThetaResult",
    "BracketError",
    "inner_sup",
    "inner_sup_batch",
    "estimate_m",
    "width_profile",
    "find_t_theta",
]

_MU_MIN = 1e-12
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class BracketError(RuntimeError):
    """The sample objective was still increasing at the bracketing cap."""


@dataclass(frozen=True)
class NoiseBatch:
    """Reproducible batch of standard Gaussian vectors.

    Member i is generated from the seed sequence (seed, i), so the same
    (seed, count, dim) always regenerates identical vectors and any prefix of
    a larger batch matches the smaller one.
    """

    seed: int
    count: int
    dim: int

    def __post_init__(self):
        if self.count < 1 or self.dim < 1:
            raise ValueError("count and dim must be positive")

    def vectors(self):
        Z = np.empty((self.count, self.dim))
        for i in range(self.count):
            Z[i] = np.random.default_rng([self.seed, i]).standard_normal(self.dim)
        return Z


@dataclass
class WidthProfile:
    theta: np.ndarray
    tgrid: np.ndarray
    m_hat: np.ndarray
    stderr: np.ndarray
    batch: NoiseBatch

    def to_json(self):
        return {
            "theta": list(self.theta),
            "tgrid": list(self.tgrid),
            "m_hat": list(self.m_hat),
            "stderr": list(self.stderr),
            "batch": {"seed": self.batch.seed, "count": self.batch.count, "dim": self.batch.dim},
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["t", "m_hat", "stderr"])
        for t, m, s in zip(self.tgrid, self.m_hat, self.stderr):
            w.writerow([repr(float(t)), repr(float(m)), repr(float(s))])
        return buf.getvalue()


@dataclass
class TThetaResult:
    t_theta: float
    G_at_max: float
    bracket: tuple
    stderr: float

    def to_json(self):
        return {
            "t_theta": self.t_theta,
            "G_at_max": self.G_at_max,
            "bracket": list(self.bracket),
            "stderr": self.stderr,
        }


def inner_sup_batch(Z, theta, t, set_, f, opts=DEFAULT_OPTIONS):
    """Inner supremum for every row of Z; returns (values, argmaxes)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    theta = np.asarray(theta, dtype=float)
    n_rows = Z.shape[0]
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0 or isinstance(set_, Singleton):
        point = np.asarray(set_.point) if isinstance(set_, Singleton) else theta
        vals = np.full(n_rows, -f.value(point)) + (Z @ (point - theta))
        return vals, np.tile(point, (n_rows, 1))

    def radii(mu):
        A = solve_scaled_rows(set_, f, theta + Z / mu[:, None], 1.0 / mu, opts)
        return A, np.linalg.norm(A - theta, axis=1)

    # bracket the multiplier: r(mu) nonincreasing, r -> 0 as mu -> inf
    mu_hi = np.ones(n_rows)
    for _ in range(120):
        _, r = radii(mu_hi)
        mask = r > t
        if not mask.any():
            break
        mu_hi[mask] *= 2.0
    mu_lo = np.ones(n_rows)
    inactive = np.zeros(n_rows, dtype=bool)
    for _ in range(80):
        _, r = radii(mu_lo)
        mask = (r < t) & (mu_lo > _MU_MIN)
        if not mask.any():
            break
        mu_lo[mask] *= 0.5
    inactive = mu_lo <= _MU_MIN

    for _ in range(48):
        mu_mid = np.sqrt(mu_lo * mu_hi)
        _, r = radii(mu_mid)
        high = r >= t
        mu_lo = np.where(high, mu_mid, mu_lo)
        mu_hi = np.where(high, mu_hi, mu_mid)

    # mu_hi is the feasible side (r <= t); inactive rows keep their tiny mu
    mu_fin = np.where(inactive, np.minimum(mu_lo, mu_hi), mu_hi)
    A, _ = radii(mu_fin)
    values = np.einsum("ij,ij->i", Z, A - theta) - f.value_many(A)
    return values, A


def inner_sup(z, theta, t, set_, f, opts=DEFAULT_OPTIONS):
    """Maximize <z, a - theta> - f(a) over set intersected with Ball(theta, t)."""
    values, A = inner_sup_batch(np.atleast_2d(z), theta, t, set_, f, opts)
    return float(values[0]), A[0]


def estimate_m(theta, t, set_, f, batch, opts=DEFAULT_OPTIONS):
    """Sample mean and standard error of the inner supremum over the batch."""
    if t == 0.0:
        return -f.value(np.asarray(theta, dtype=float)), 0.0
    values, _ = inner_sup_batch(batch.vectors(), theta, t, set_, f, opts)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return mean, stderr


def width_profile(theta, tgrid, set_, f, batch, opts=DEFAULT_OPTIONS):
    """Width estimates on a t grid sharing one noise batch."""
    theta = np.asarray(theta, dtype=float)
    tgrid = np.asarray(tgrid, dtype=float)
    Z = batch.vectors()
    m_hat = np.empty(len(tgrid))
    stderr = np.empty(len(tgrid))
    for i, t in enumerate(tgrid):
        if t == 0.0:
            m_hat[i], stderr[i] = -f.value(theta), 0.0
        else:
            values, _ = inner_sup_batch(Z, theta, t, set_, f, opts)
            m_hat[i] = values.mean()
            stderr[i] = values.std(ddof=1) / math.sqrt(len(values))
    return WidthProfile(theta, tgrid, m_hat, stderr, batch)


def find_t_theta(theta, set_, f, batch, opts=DEFAULT_OPTIONS, cap=2.0**40):
    """Maximize the sample G(t) = m_hat(t) - t^2/2 over t >= 0.

    The fixed-batch sample objective is concave (each per-noise inner value
    is concave in t), so a doubling bracket followed by golden section search
    is valid.  The reported stderr is the half-width over which the fitted
    quadratic peak drops by one standard error of m_hat.
    """
    theta = np.asarray(theta, dtype=float)
    Z = batch.vectors()
    memo = {}

    def G(t):
        if t not in memo:
            if t == 0.0:
                memo[t] = (-f.value(theta), 0.0)
            else:
                values, _ = inner_sup_batch(Z, theta, t, set_, f, opts)
                memo[t] = (
                    float(values.mean()) - 0.5 * t * t,
                    float(values.std(ddof=1) / math.sqrt(len(values))),
                )
        return memo[t][0]

    diam = set_.diameter()
    if diam == 0.0:
        g0 = G(0.0)
        return TThetaResult(0.0, g0, (0.0, 0.0), 0.0)

    # doubling until G has decreased over two consecutive doublings
    t0 = min(1.0, diam / 4.0) if math.isfinite(diam) else 1.0
    ts = [0.0, t0]
    t_max = None
    while t_max is None:
        t_next = ts[-1] * 2.0
        if math.isfinite(diam) and t_next >= diam:
            t_max = diam  # m is constant past the diameter, so G decreases
            break
        if t_next > cap:
            raise BracketError(f"sample objective still increasing at t={ts[-1]:.3e}")
        ts.append(t_next)
        if len(ts) >= 3 and G(ts[-1]) < G(ts[-2]) < G(ts[-3]):
            t_max = ts[-1]

    a, b = 0.0, float(t_max)
    width_tol = 1e-3 * max(1.0, t_max)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    while b - a > width_tol:
        if G(c) >= G(d):
            b, d = d, c
            c = b - _INV_PHI * (b - a)
        else:
            a, c = c, d
            d = a + _INV_PHI * (b - a)

    t_best = max(memo, key=lambda t: memo[t][0])
    if not (a <= t_best <= b):
        t_best = 0.5 * (a + b)
        G(t_best)
    g_best, sem = memo[t_best]
    stderr = math.sqrt(2.0 * sem) if sem > 0 else 0.0
    return TThetaResult(float(t_best), float(g_best), (float(a), float(b)), float(stderr))
