"""Penalized constrained least squares: argmin over the set of
0.5*||x - a||^2 + f(a).

Dispatch order: exact closed forms (projection for zero penalty, PAVA for the
monotone cone, prox on the full space, the range penalty on the monotone cone
is linear hence a shifted PAVA), then proximal Dykstra splitting when the
penalty has a prox, and a projected subgradient method as the last resort.
Non-convergence is a soft failure: the Solution carries the best iterate and
``converged=False`` so Monte-Carlo drivers can count rather than abort.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .penalties import Penalty, RangePenalty, Zero
from .sets import ConstraintSet, FullSpace, MonotoneCone, Singleton, pava

__all__ = [
    "SolveOptions",
    "Solution",
    "solve_penalized_lse",
    "solve_many",
    "solve_scaled_rows",
    "objective_value",
    "check_lipschitz",
    "pava",
]


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-8
    max_iter: int = 100_000
    step_size: float = 1.0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_OPTIONS = SolveOptions()


@dataclass
class Solution:
    point: np.ndarray
    objective: float
    iterations: int
    residual: float
    method: str
    converged: bool = True


def objective_value(f, x, p):
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    return 0.5 * float(np.dot(x - p, x - p)) + f.value(p)


def _range_shift(lam, n):
    v = np.zeros(n)
    v[0] = -lam
    v[-1] = lam
    return v


def _closed_form(set_, f, x, opts):
    """Exact dispatch, or None when no closed form applies."""
    if isinstance(set_, Singleton):
        p = np.asarray(set_.point)
        return Solution(p.copy(), objective_value(f, x, p), 0, 0.0, "closed_form")
    if isinstance(f, Zero):
        p = set_.project(x, tol=opts.tol)
        method = "pava" if isinstance(set_, MonotoneCone) else "closed_form"
        return Solution(p, objective_value(f, x, p), 0, 0.0, method)
    if isinstance(set_, MonotoneCone) and isinstance(f, RangePenalty):
        # on the cone the range penalty is the linear form lam*(a_n - a_1)
        p = pava(x - _range_shift(f.lam, set_.n))
        return Solution(p, objective_value(f, x, p), 0, 0.0, "pava")
    if isinstance(set_, FullSpace) and f.has_prox:
        p = f.prox(x, 1.0)
        return Solution(p, objective_value(f, x, p), 0, 0.0, "closed_form")
    return None


def _prox_dykstra(set_, f, x, opts):
    """Dykstra splitting for the prox of f + indicator(set) at x."""
    y = np.asarray(x, dtype=float).copy()
    p = np.zeros_like(y)
    q = np.zeros_like(y)
    residual = np.inf
    for k in range(1, opts.max_iter + 1):
        z = f.prox(y + p, 1.0)
        p = y + p - z
        y_new = set_.project(z + q, tol=opts.tol)
        q = z + q - y_new
        residual = float(np.linalg.norm(y_new - y)) + float(np.linalg.norm(y_new - z))
        y = y_new
        if residual < opts.tol:
            return Solution(y, objective_value(f, x, y), k, residual, "prox_gradient")
    return Solution(
        y, objective_value(f, x, y), opts.max_iter, residual, "prox_gradient", converged=False
    )


def _projected_subgradient(set_, f, x, opts):
    """Diminishing-step projected subgradient on the full objective.

    The quadratic makes the objective 1-strongly convex, so steps 2/(k+1)
    give an O(1/k) gap on the running best iterate.
    """
    x = np.asarray(x, dtype=float)
    a = set_.project(x, tol=opts.tol)
    best = a
    best_obj = objective_value(f, x, a)
    stall = 0
    for k in range(1, opts.max_iter + 1):
        g = (a - x) + f.subgradient(a)
        step = opts.step_size * 2.0 / (k + 1.0)
        a = set_.project(a - step * g, tol=opts.tol)
        obj = objective_value(f, x, a)
        if obj < best_obj - 1e-14 * (1.0 + abs(best_obj)):
            best, best_obj, stall = a, obj, 0
        else:
            stall += 1
        if stall >= 500 and step * (1.0 + float(np.linalg.norm(g))) < np.sqrt(opts.tol):
            return Solution(best, best_obj, k, step, "subgradient")
    return Solution(best, best_obj, opts.max_iter, step, "subgradient", converged=False)


def solve_penalized_lse(set_, f, x, opts=DEFAULT_OPTIONS):
    """Solve argmin_{a in set} 0.5*||x - a||^2 + f(a)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != set_.dim:
        raise ValueError(f"dimension mismatch: expected {set_.dim}, got {x.shape[-1]}")
    sol = _closed_form(set_, f, x, opts)
    if sol is not None:
        return sol
    if f.has_prox:
        return _prox_dykstra(set_, f, x, opts)
    return _projected_subgradient(set_, f, x, opts)


def solve_many(set_, f, X, opts=DEFAULT_OPTIONS):
    """Row-wise penalized solves; vectorized on the closed-form dispatches."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return solve_scaled_rows(set_, f, X, np.ones(X.shape[0]), opts)


def solve_scaled_rows(set_, f, X, scales, opts=DEFAULT_OPTIONS):
    """Solve row i with penalty scales[i] * f; vectorized where closed-form.

    This is the inner loop of the Monte-Carlo width machinery, where the
    Lagrangian bisection rescales the penalty per noise draw.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    scales = np.asarray(scales, dtype=float)
    if isinstance(f, Zero) or isinstance(set_, Singleton):
        return set_.project_many(X, tol=opts.tol)
    if isinstance(set_, MonotoneCone) and isinstance(f, RangePenalty):
        shift = _range_shift(f.lam, set_.n)
        return set_.project_many(X - scales[:, None] * shift, tol=opts.tol)
    if isinstance(set_, FullSpace) and f.has_prox:
        from .penalties import L1, LinearForm, Quadratic

        if isinstance(f, L1):
            t = (scales * f.lam)[:, None]
            return np.sign(X) * np.maximum(np.abs(X) - t, 0.0)
        if isinstance(f, Quadratic):
            return X / (1.0 + (scales * f.lam)[:, None])
        if isinstance(f, LinearForm):
            return X - scales[:, None] * np.asarray(f.v)
    out = np.empty_like(X)
    for i in range(X.shape[0]):
        out[i] = solve_penalized_lse(set_, f.scaled(scales[i]), X[i], opts).point
    return out


def check_lipschitz(set_, f, pairs, opts=DEFAULT_OPTIONS):
    """Max of ||sol(x1)-sol(x2)|| / ||x1-x2|| over pairs; skips zero gaps."""
    if not pairs:
        raise ValueError("need at least one pair")
    worst = 0.0
    for x1, x2 in pairs:
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        den = float(np.linalg.norm(x1 - x2))
        if den == 0.0:
            continue
        p1 = solve_penalized_lse(set_, f, x1, opts).point
        p2 = solve_penalized_lse(set_, f, x2, opts).point
        worst = max(worst, float(np.linalg.norm(p1 - p2)) / den)
    return worst
