"""Simulated loss of estimators under X ~ N(theta, I_n) and the closed-form
concentration bounds they are checked against.

The tail bound for the penalized least-squares estimator is

    P{ ||est - theta|| >= t + delta } <= min(1, 2 exp(-delta^4 / (32 (t+delta)^2)))

and the risk bound is t^2 + 2 sqrt(84) t min(sqrt(t), 1) + 84 min(t, 1),
both evaluated at the concentration point t.  Since t is itself a Monte-Carlo
estimate, every check inflates it by three reported standard errors before
comparing (larger t only loosens both bounds).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .penalties import penalty_from_json
from .sets import set_from_json
from .solver import DEFAULT_OPTIONS, solve_many, solve_penalized_lse
from .width import NoiseBatch, find_t_theta

__all__ = [
    "EstimatorSpec",
    "RiskReport",
    "TailReport",
    "SmoothnessReport",
    "tail_bound",
    "risk_bound",
    "simulate_risk",
    "check_tail_bound",
    "check_risk_bound",
    "check_smoothness",
    "tail_moment_integral",
    "estimator_from_json",
]

MC_SIGMAS = 3.0  # slack convention for every Monte-Carlo comparison
VACUOUS_CUTOFF = 0.9  # tail bounds above this are reported but not gated
_SQRT84 = math.sqrt(84.0)


@dataclass(frozen=True)
class EstimatorSpec:
    """One of: penalized_lse(set, f), identity, zero, james_stein, clip(a)."""

    kind: str
    set_: object = None
    penalty: object = None
    a: float | None = None
    opts: object = DEFAULT_OPTIONS

    def __post_init__(self):
        if self.kind not in {"penalized_lse", "identity", "zero", "james_stein", "clip"}:
            raise ValueError(f"unknown estimator kind: {self.kind!r}")
        if self.kind == "penalized_lse" and (self.set_ is None or self.penalty is None):
            raise ValueError("penalized_lse requires a set and a penalty")
        if self.kind == "clip" and (self.a is None or self.a <= 0):
            raise ValueError("clip requires a > 0")

    def apply_many(self, X):
        """Estimate for each row of X."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = X.shape[1]
        if self.kind == "identity":
            return X.copy()
        if self.kind == "zero":
            return np.zeros_like(X)
        if self.kind == "james_stein":
            if n < 3:
                raise ValueError("james_stein requires n >= 3")
            sq = np.sum(X * X, axis=1)
            return (1.0 - (n - 2) / sq)[:, None] * X
        if self.kind == "clip":
            if n != 1:
                raise ValueError("clip requires n = 1")
            return np.clip(X, -self.a, self.a)
        return solve_many(self.set_, self.penalty, X, self.opts)


def estimator_from_json(d):
    kind = d.get("kind")
    if kind == "penalized_lse":
        return EstimatorSpec(
            "penalized_lse",
            set_=set_from_json(d["set"]),
            penalty=penalty_from_json(d["penalty"]),
        )
    if kind == "clip":
        return EstimatorSpec("clip", a=float(d["a"]))
    return EstimatorSpec(kind)


def tail_bound(t, delta):
    """min(1, 2 exp(-delta^4 / (32 (t + delta)^2))); 1 at delta = 0."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if t + delta == 0.0:
        return 1.0
    return min(1.0, 2.0 * math.exp(-(delta**4) / (32.0 * (t + delta) ** 2)))


def risk_bound(t):
    """t^2 + 2 sqrt(84) t min(sqrt(t), 1) + 84 min(t, 1)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return t * t + 2.0 * _SQRT84 * t * min(math.sqrt(t), 1.0) + 84.0 * min(t, 1.0)


@dataclass
class RiskReport:
    theta: np.ndarray
    mean_sq_loss: float
    stderr: float
    reps: int
    bound_1co: float | None
    passed: bool
    t_result: object = None
    failures: int = 0

    def to_json(self):
        out = {
            "theta": list(np.atleast_1d(self.theta)),
            "mean_sq_loss": self.mean_sq_loss,
            "stderr": self.stderr,
            "reps": self.reps,
            "bound_1co": self.bound_1co,
            "pass": self.passed,
            "failures": self.failures,
        }
        if self.t_result is not None:
            out["t_theta"] = self.t_result.to_json()
        return out


@dataclass
class TailReport:
    theta: np.ndarray
    t_theta_hat: float
    t_stderr: float
    deltas: np.ndarray
    empirical: np.ndarray
    bounds: np.ndarray
    binom_stderr: np.ndarray
    vacuous: np.ndarray
    passed: bool
    reps: int
    failures: int = 0

    def to_json(self):
        return {
            "theta": list(np.atleast_1d(self.theta)),
            "t_theta_hat": self.t_theta_hat,
            "t_stderr": self.t_stderr,
            "deltas": list(self.deltas),
            "empirical": list(self.empirical),
            "bounds": list(self.bounds),
            "binom_stderr": list(self.binom_stderr),
            "vacuous": [bool(v) for v in self.vacuous],
            "pass": self.passed,
            "reps": self.reps,
            "failures": self.failures,
        }


@dataclass
class SmoothnessReport:
    risk1: float
    risk2: float
    separation: float
    smor_slack: float
    smor_pass: bool
    t1: object
    t2: object
    moo_interval: tuple
    moo_pass: bool
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.smor_pass and self.moo_pass

    def to_json(self):
        return {
            "risk1": self.risk1,
            "risk2": self.risk2,
            "separation": self.separation,
            "smor_slack": self.smor_slack,
            "smor_pass": self.smor_pass,
            "t1": self.t1.to_json(),
            "t2": self.t2.to_json(),
            "moo_interval": list(self.moo_interval),
            "moo_pass": self.moo_pass,
            "pass": self.passed,
        }


def _losses(est, theta, reps, seed, opts):
    """Squared losses over reps noise draws; returns (losses, failures)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    Z = NoiseBatch(seed, reps, theta.size).vectors()
    failures = 0
    if est.kind == "penalized_lse":
        # closed-form dispatches never fail; count soft failures on the rest
        from .penalties import Zero as _Zero
        from .sets import FullSpace as _FS, MonotoneCone as _MC
        from .penalties import RangePenalty as _RP

        fast = (
            isinstance(est.penalty, _Zero)
            or (isinstance(est.set_, _MC) and isinstance(est.penalty, _RP))
            or (isinstance(est.set_, _FS) and est.penalty.has_prox)
        )
        if fast:
            points = est.apply_many(theta + Z)
        else:
            points = np.empty_like(Z)
            ok = np.ones(reps, dtype=bool)
            for i in range(reps):
                sol = solve_penalized_lse(est.set_, est.penalty, theta + Z[i], opts)
                points[i] = sol.point
                ok[i] = sol.converged
            failures = int((~ok).sum())
            points = points[ok]
    else:
        points = est.apply_many(theta + Z)
    losses = np.sum((points - theta) ** 2, axis=1)
    return losses, failures


def simulate_risk(est, theta, reps, seed, opts=DEFAULT_OPTIONS, t_result=None,
                  t_batch_count=2000):
    """Monte-Carlo mean squared loss; fills the risk bound for penalized LSE."""
    if reps < 2:
        raise ValueError("reps must be >= 2")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if est.kind == "zero":
        # exact: loss is deterministically ||theta||^2
        val = float(np.dot(theta, theta))
        return RiskReport(theta, val, 0.0, reps, None, True)
    losses, failures = _losses(est, theta, reps, seed, opts)
    if failures > 0.01 * reps:
        raise RuntimeError(f"solver failure fraction {failures / reps:.2%} exceeds 1%")
    mean = float(losses.mean())
    sem = float(losses.std(ddof=1) / math.sqrt(len(losses)))
    bound = None
    passed = True
    if est.kind == "penalized_lse":
        if t_result is None:
            t_result = find_t_theta(
                theta, est.set_, est.penalty,
                NoiseBatch(_derive_seed(seed, "ttheta"), t_batch_count, theta.size), opts,
            )
        t_hi = t_result.t_theta + MC_SIGMAS * t_result.stderr
        bound = risk_bound(t_hi)
        passed = mean <= bound + MC_SIGMAS * sem
    return RiskReport(theta, mean, sem, len(losses), bound, passed,
                      t_result=t_result, failures=failures)


def _derive_seed(seed, label):
    import hashlib

    h = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def check_tail_bound(set_, f, theta, deltas, reps, seed, opts=DEFAULT_OPTIONS,
                     t_result=None, t_batch_count=2000):
    """Empirical tail frequencies of the loss against the closed-form bound.

    Bounds above VACUOUS_CUTOFF auto-pass (they cannot be falsified); the
    concentration point enters inflated by its reported standard error.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    deltas = np.asarray(deltas, dtype=float)
    if np.any(deltas < 0):
        raise ValueError("deltas must be nonnegative")
    est = EstimatorSpec("penalized_lse", set_=set_, penalty=f, opts=opts)
    if t_result is None:
        t_result = find_t_theta(
            theta, set_, f, NoiseBatch(_derive_seed(seed, "ttheta"), t_batch_count, theta.size),
            opts,
        )
    t_hi = t_result.t_theta + MC_SIGMAS * t_result.stderr
    losses, failures = _losses(est, theta, reps, seed, opts)
    if failures > 0.01 * reps:
        raise RuntimeError(f"solver failure fraction {failures / reps:.2%} exceeds 1%")
    L = np.sqrt(losses)
    empirical = np.array([float(np.mean(L >= t_hi + d)) for d in deltas])
    bounds = np.array([tail_bound(t_hi, d) for d in deltas])
    binom = np.sqrt(empirical * (1.0 - empirical) / len(L)) + 1.0 / len(L)
    vacuous = bounds >= VACUOUS_CUTOFF
    checked = ~vacuous
    passed = bool(np.all(empirical[checked] <= bounds[checked] + MC_SIGMAS * binom[checked]))
    return TailReport(theta, t_result.t_theta, t_result.stderr, deltas, empirical,
                      bounds, binom, vacuous, passed, len(L), failures)


def check_risk_bound(set_, f, theta, reps, seed, opts=DEFAULT_OPTIONS,
                     t_result=None, t_batch_count=2000):
    """Monte-Carlo risk against the closed-form bound at the concentration point."""
    est = EstimatorSpec("penalized_lse", set_=set_, penalty=f, opts=opts)
    return simulate_risk(est, theta, reps, seed, opts=opts, t_result=t_result,
                         t_batch_count=t_batch_count)


def check_smoothness(set_, f, theta1, theta2, reps, seed, opts=DEFAULT_OPTIONS,
                     t1=None, t2=None, t_batch_count=2000):
    """Paired-noise check of the risk-smoothness and t-stability inequalities.

    Verifies E1 <= 2*E2 + 8*||theta1-theta2||^2 (shared noise, 3 sigma slack
    on the paired difference) and that the second concentration point lies in
    the interval implied by the first.
    """
    theta1 = np.atleast_1d(np.asarray(theta1, dtype=float))
    theta2 = np.atleast_1d(np.asarray(theta2, dtype=float))
    est = EstimatorSpec("penalized_lse", set_=set_, penalty=f, opts=opts)
    sep = float(np.linalg.norm(theta1 - theta2))
    l1, _ = _losses(est, theta1, reps, seed, opts)
    l2, _ = _losses(est, theta2, reps, seed, opts)  # same seed: shared noise
    diff = l1 - 2.0 * l2 - 8.0 * sep * sep
    sem = float(diff.std(ddof=1) / math.sqrt(len(diff)))
    smor_pass = bool(diff.mean() <= MC_SIGMAS * sem)
    if t1 is None:
        t1 = find_t_theta(theta1, set_, f,
                          NoiseBatch(_derive_seed(seed, "t1"), t_batch_count, theta1.size), opts)
    if t2 is None:
        t2 = find_t_theta(theta2, set_, f,
                          NoiseBatch(_derive_seed(seed, "t2"), t_batch_count, theta2.size), opts)
    r = math.sqrt(sep * sep + 4.0 * t1.t_theta * sep)
    slack = MC_SIGMAS * (t1.stderr + t2.stderr)
    lo = max(0.0, t1.t_theta - r) - slack
    hi = t1.t_theta + r + slack
    moo_pass = bool(lo <= t2.t_theta <= hi)
    return SmoothnessReport(float(l1.mean()), float(l2.mean()), sep,
                            MC_SIGMAS * sem, smor_pass, t1, t2, (lo, hi), moo_pass)


def tail_moment_integral():
    """Adaptive quadrature of int_0^inf x exp(-x^4 / (32 (1+x)^2)) dx."""
    val, _ = integrate.quad(
        lambda x: x * math.exp(-(x**4) / (32.0 * (1.0 + x) ** 2)), 0.0, np.inf, limit=200
    )
    return val
