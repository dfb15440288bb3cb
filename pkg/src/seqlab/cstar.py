"""Arithmetic certificates for the universal admissibility constant.

The lower half (>= 6.05e-6) comes from two closed-form constants evaluated
at the published parameter choices plus a strict sufficiency inequality; the
upper half (<= 1/2) is demonstrated by the clipping estimator on a shrinking
interval, whose exact risk is computed by quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.stats import norm

__all__ = [
    "HardCaseConstants",
    "OCH",
    "EasyCase",
    "SufficiencyResult",
    "hard_case_constant",
    "easy_case_constant",
    "sufficiency_check",
    "clip_risk",
    "clip_risk_lower_bound",
    "normalized_ratio_bound",
    "certificate_report",
    "CSTAR_LOWER_TARGET",
]

_SQRT84 = math.sqrt(84.0)
CSTAR_LOWER_TARGET = 6.05e-6


@dataclass(frozen=True)
class HardCaseConstants:
    rho: float
    beta: float
    eta: float
    b: float

    def __post_init__(self):
        if self.rho <= 0 or self.rho**2 + 4.0 * self.rho >= 1.0:
            raise ValueError("rho must satisfy rho^2 + 4*rho < 1")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.b <= 0:
            raise ValueError("b must be positive")


# the published parameter choices
OCH = HardCaseConstants(rho=0.0295, beta=0.42, eta=1e-20, b=51.53)


def hard_case_constant(c=OCH):
    """rho^2 (1-beta)^2 (1-sqrt(rho^2+4rho))^2 / (2(2 + 8rho^2 + 4 sqrt(84)/sqrt(b) + 168/b))."""
    shrink = 1.0 - math.sqrt(c.rho**2 + 4.0 * c.rho)
    num = c.rho**2 * (1.0 - c.beta) ** 2 * shrink**2
    den = 2.0 * (2.0 + 8.0 * c.rho**2 + 4.0 * _SQRT84 / math.sqrt(c.b) + 168.0 / c.b)
    return num / den


class EasyCase(NamedTuple):
    value: float  # 1 / (12 (b^2 + 2 sqrt(84) b^{3/2} + 84 b) + 32)
    cap: float  # the 1/32 branch
    minimum: float


def easy_case_constant(b):
    if b < 0:
        raise ValueError("b must be nonnegative")
    value = 1.0 / (12.0 * (b * b + 2.0 * _SQRT84 * b**1.5 + 84.0 * b) + 32.0)
    return EasyCase(value, 1.0 / 32.0, min(value, 1.0 / 32.0))


class SufficiencyResult(NamedTuple):
    rhs: float
    b_squared: float
    holds: bool
    inner: float


def sufficiency_check(c=OCH):
    """rhs = log(12) / (1/(18 rho^2) (rho beta (1-sqrt(rho^2+4rho))^2 - eta/b^2)^2 - rho^2).

    Holds iff the inner expression is positive and rhs < b^2 strictly.
    """
    shrink = 1.0 - math.sqrt(c.rho**2 + 4.0 * c.rho)
    core = c.rho * c.beta * shrink**2 - c.eta / c.b**2
    inner = core**2 / (18.0 * c.rho**2) - c.rho**2
    # the core margin must stay positive: eta eats into the squared term,
    # and a negative margin makes the squared inequality chain invalid
    if core <= 0.0 or inner <= 0.0:
        return SufficiencyResult(math.inf, c.b**2, False, inner)
    rhs = math.log(12.0) / inner
    return SufficiencyResult(rhs, c.b**2, rhs < c.b**2, inner)


@lru_cache(maxsize=8)
def _leggauss(quad_points):
    return np.polynomial.legendre.leggauss(quad_points)


def _clip_risk_grid(a, thetas, quad_points):
    """Clipping risk for an array of theta values (vectorized quadrature)."""
    nodes, wts = _leggauss(quad_points)
    x = 0.5 * (nodes + 1.0) * (2.0 * a) - a  # map to [-a, a]
    w = wts * a
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    D = x[None, :] - thetas[:, None]
    interior = (w[None, :] * D * D * norm.pdf(D)).sum(axis=1)
    upper = (a - thetas) ** 2 * norm.sf(a - thetas)
    lower = (a + thetas) ** 2 * norm.cdf(-a - thetas)
    return interior + upper + lower


def clip_risk(a, theta, quad_points=400):
    """Exact squared-error risk of clipping X ~ N(theta, 1) to [-a, a].

    Interior contribution by Gauss-Legendre quadrature plus the two boundary
    mass terms (a - theta)^2 P{X > a} and (a + theta)^2 P{X < -a}.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if abs(theta) > a:
        raise ValueError("theta must lie in [-a, a]")
    return float(_clip_risk_grid(a, [theta], quad_points)[0])


def clip_risk_lower_bound(a, theta):
    """2 (1 - Phi(2a)) (theta^2 + a^2), valid for every theta in [-a, a]."""
    return 2.0 * norm.sf(2.0 * a) * (theta * theta + a * a)


def normalized_ratio_bound(a, grid_points=2001, quad_points=400):
    """Max over theta in [-a, a] of theta^2 / clip_risk, and its closed-form cap.

    The cap is 1/(4(1 - Phi(2a))), which tends to 1/2 as a shrinks: the
    zero estimator beats the interval least squares estimator by nearly a
    factor of two everywhere on a small interval.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    grid = np.linspace(-a, a, grid_points)
    risks = _clip_risk_grid(a, grid, quad_points)
    ratios = grid * grid / risks
    bound = 1.0 / (4.0 * norm.sf(2.0 * a))
    return float(ratios.max()), float(bound)


def certificate_report(c=OCH):
    """JSON-ready summary of both halves of the constant certificate."""
    hard = hard_case_constant(c)
    easy = easy_case_constant(c.b)
    suff = sufficiency_check(c)
    sup_ratio, ratio_bound = normalized_ratio_bound(0.01)
    return {
        "hard_constant": hard,
        "easy_constant": easy.value,
        "easy_cap": easy.cap,
        "sufi2_rhs": suff.rhs,
        "b_squared": suff.b_squared,
        "holds": suff.holds,
        "cstar_lower": min(hard, easy.value, 1.0 / 32.0),
        "cstar_upper_demo": {
            "a": 0.01,
            "sup_ratio": sup_ratio,
            "bound": ratio_bound,
        },
    }
