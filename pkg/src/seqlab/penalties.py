"""Convex real-valued penalty functions with value, subgradient and prox.

Subgradient tie-breaking is deterministic: the zero element for the absolute
value at 0, first-index argmax/argmin for range ties.  ``prox`` returns None
where no closed form is available (the range penalty), leaving that case to
the generic solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Penalty",
    "Zero",
    "L1",
    "RangePenalty",
    "Quadratic",
    "LinearForm",
    "penalty_from_json",
]


class Penalty:
    """A convex function on R^n: value, subgradient, optional prox."""

    def value(self, x):
        raise NotImplementedError

    def subgradient(self, x):
        raise NotImplementedError

    def prox(self, x, step):
        """argmin_u 0.5||u-x||^2 + step*f(u), or None if no closed form."""
        return None

    def value_many(self, X):
        """Penalty value of each row of X."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.value(row) for row in X])

    @property
    def has_prox(self):
        return True

    def scaled(self, c):
        """The penalty c*f, for c >= 0."""
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(Penalty):
    def value(self, x):
        return 0.0

    def value_many(self, X):
        return np.zeros(np.atleast_2d(X).shape[0])

    def subgradient(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def prox(self, x, step):
        return np.asarray(x, dtype=float).copy()

    def scaled(self, c):
        return self

    def to_json(self):
        return {"kind": "zero"}


@dataclass(frozen=True)
class L1(Penalty):
    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")

    def value(self, x):
        return self.lam * float(np.sum(np.abs(x)))

    def value_many(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.lam * np.sum(np.abs(X), axis=1)

    def subgradient(self, x):
        return self.lam * np.sign(np.asarray(x, dtype=float))

    def prox(self, x, step):
        x = np.asarray(x, dtype=float)
        t = step * self.lam
        return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)

    def scaled(self, c):
        return L1(c * self.lam)

    def to_json(self):
        return {"kind": "l1", "lambda": self.lam}


@dataclass(frozen=True)
class RangePenalty(Penalty):
    """lam * (max_i x_i - min_i x_i); on the monotone cone this is lam*(x_n - x_1)."""

    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self.lam * float(x.max() - x.min())

    def value_many(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.lam * (X.max(axis=1) - X.min(axis=1))

    def subgradient(self, x):
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        if self.lam == 0.0:
            return g
        g[int(np.argmax(x))] += self.lam
        g[int(np.argmin(x))] -= self.lam
        return g

    @property
    def has_prox(self):
        return False

    def scaled(self, c):
        return RangePenalty(c * self.lam)

    def to_json(self):
        return {"kind": "range", "lambda": self.lam}


@dataclass(frozen=True)
class Quadratic(Penalty):
    """(lam/2) * ||x||^2."""

    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.lam * float(np.dot(x, x))

    def value_many(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return 0.5 * self.lam * np.sum(X * X, axis=1)

    def subgradient(self, x):
        return self.lam * np.asarray(x, dtype=float)

    def prox(self, x, step):
        return np.asarray(x, dtype=float) / (1.0 + step * self.lam)

    def scaled(self, c):
        return Quadratic(c * self.lam)

    def to_json(self):
        return {"kind": "quadratic", "lambda": self.lam}


@dataclass(frozen=True)
class LinearForm(Penalty):
    """<v, x>; convex (affine) with constant gradient v."""

    v: tuple

    def __init__(self, v):
        object.__setattr__(self, "v", tuple(float(a) for a in np.atleast_1d(v)))

    @property
    def _v(self):
        return np.asarray(self.v)

    def value(self, x):
        return float(np.dot(self._v, np.asarray(x, dtype=float)))

    def value_many(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X @ self._v

    def subgradient(self, x):
        return self._v.copy()

    def prox(self, x, step):
        return np.asarray(x, dtype=float) - step * self._v

    def scaled(self, c):
        return LinearForm(c * self._v)

    def to_json(self):
        return {"kind": "linear_form", "v": list(self.v)}


def penalty_from_json(d):
    """Build a Penalty from its JSON descriptor {"kind": ..., "lambda": ...}."""
    try:
        kind = d["kind"]
    except (KeyError, TypeError):
        raise ValueError("penalty descriptor must be an object with a 'kind' field")
    if kind == "zero":
        return Zero()
    if kind == "l1":
        return L1(float(d["lambda"]))
    if kind == "range":
        return RangePenalty(float(d["lambda"]))
    if kind == "quadratic":
        return Quadratic(float(d["lambda"]))
    if kind == "linear_form":
        return LinearForm(d["v"])
    raise ValueError(f"unknown penalty kind: {kind!r}")
