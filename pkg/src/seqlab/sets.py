"""Catalog of closed convex constraint sets with Euclidean projections.

Every set exposes ``project`` (single vector), ``project_many`` (row-wise),
``contains`` (distance-based membership) and JSON round-tripping.  All
operations are pure functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConstraintSet",
    "FullSpace",
    "Singleton",
    "Box",
    "Ball",
    "L1Ball",
    "MonotoneCone",
    "WeightedEllipsoid",
    "Intersection",
    "DykstraError",
    "dykstra_project",
    "pava",
    "set_from_json",
]


class DykstraError(RuntimeError):
    """Dykstra's algorithm failed to converge; carries the last iterate."""

    def __init__(self, message, iterate, residual):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual


def _check_dim(x, dim):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {x.shape[-1]}")
    return x


def pava(x):
    """Exact Euclidean projection onto the nondecreasing cone.

    Pool-adjacent-violators: linear time, mean preserving.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("pava requires length >= 1")
    # blocks of (mean, weight), merged while out of order
    means = np.empty(n)
    weights = np.empty(n)
    starts = np.empty(n, dtype=int)
    m = 0
    for i in range(n):
        means[m] = x[i]
        weights[m] = 1.0
        starts[m] = i
        m += 1
        while m > 1 and means[m - 2] >= means[m - 1]:
            w = weights[m - 2] + weights[m - 1]
            means[m - 2] = (weights[m - 2] * means[m - 2] + weights[m - 1] * means[m - 1]) / w
            weights[m - 2] = w
            m -= 1
    out = np.empty(n)
    for j in range(m):
        end = starts[j + 1] if j + 1 < m else n
        out[starts[j]:end] = means[j]
    return out


def _pava_rows_py(X, out):
    n = X.shape[1]
    means = np.empty(n)
    weights = np.empty(n)
    starts = np.empty(n, dtype=np.int64)
    for r in range(X.shape[0]):
        x = X[r]
        m = 0
        for i in range(n):
            means[m] = x[i]
            weights[m] = 1.0
            starts[m] = i
            m += 1
            while m > 1 and means[m - 2] >= means[m - 1]:
                w = weights[m - 2] + weights[m - 1]
                means[m - 2] = (weights[m - 2] * means[m - 2] + weights[m - 1] * means[m - 1]) / w
                weights[m - 2] = w
                m -= 1
        for j in range(m):
            end = starts[j + 1] if j + 1 < m else n
            out[r, starts[j]:end] = means[j]
    return out


try:  # hot loop of the width Monte Carlo; numba cuts it by ~100x
    from numba import njit

    _pava_rows = njit(cache=True)(_pava_rows_py)
except ImportError:  # pragma: no cover
    _pava_rows = _pava_rows_py


def _pava_many(X):
    X = np.ascontiguousarray(np.asarray(X, dtype=float))
    return _pava_rows(X, np.empty_like(X))


class ConstraintSet:
    """Base class: a nonempty closed convex subset of R^n."""

    dim: int

    def project(self, x, tol=1e-9):
        raise NotImplementedError

    def project_many(self, X, tol=1e-9):
        X = _check_dim(np.atleast_2d(X), self.dim)
        return np.stack([self.project(row, tol=tol) for row in X])

    def contains(self, x, tol=0.0):
        x = _check_dim(x, self.dim)
        p = self.project(x)
        return float(np.linalg.norm(x - p)) <= tol + 1e-12

    def diameter(self):
        """Euclidean diameter; may be infinite."""
        return np.inf

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class FullSpace(ConstraintSet):
    n: int

    @property
    def dim(self):
        return self.n

    def project(self, x, tol=1e-9):
        return _check_dim(x, self.n).copy()

    def project_many(self, X, tol=1e-9):
        return _check_dim(np.atleast_2d(X), self.n).copy()

    def contains(self, x, tol=0.0):
        _check_dim(x, self.n)
        return True

    def to_json(self):
        return {"kind": "full_space", "n": self.n}


@dataclass(frozen=True)
class Singleton(ConstraintSet):
    point: tuple

    def __init__(self, point):
        object.__setattr__(self, "point", tuple(float(v) for v in np.atleast_1d(point)))

    @property
    def dim(self):
        return len(self.point)

    @property
    def _p(self):
        return np.asarray(self.point)

    def project(self, x, tol=1e-9):
        _check_dim(x, self.dim)
        return self._p.copy()

    def project_many(self, X, tol=1e-9):
        X = _check_dim(np.atleast_2d(X), self.dim)
        return np.tile(self._p, (X.shape[0], 1))

    def diameter(self):
        return 0.0

    def to_json(self):
        return {"kind": "singleton", "point": list(self.point)}


@dataclass(frozen=True)
class Box(ConstraintSet):
    lo: tuple
    hi: tuple

    def __init__(self, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape:
            raise ValueError("box bounds must share shape")
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi coordinatewise")
        object.__setattr__(self, "lo", tuple(lo))
        object.__setattr__(self, "hi", tuple(hi))

    @property
    def dim(self):
        return len(self.lo)

    def project(self, x, tol=1e-9):
        x = _check_dim(x, self.dim)
        return np.clip(x, self.lo, self.hi)

    def project_many(self, X, tol=1e-9):
        X = _check_dim(np.atleast_2d(X), self.dim)
        return np.clip(X, self.lo, self.hi)

    def diameter(self):
        return float(np.linalg.norm(np.asarray(self.hi) - np.asarray(self.lo)))

    def to_json(self):
        return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}


def cube(half_width, n):
    """The box [-half_width, half_width]^n."""
    return Box([-half_width] * n, [half_width] * n)


@dataclass(frozen=True)
class Ball(ConstraintSet):
    center: tuple
    radius: float

    def __init__(self, center, radius):
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(center)))
        object.__setattr__(self, "radius", float(radius))

    @property
    def dim(self):
        return len(self.center)

    def project(self, x, tol=1e-9):
        x = _check_dim(x, self.dim)
        c = np.asarray(self.center)
        d = x - c
        nrm = np.linalg.norm(d)
        if nrm <= self.radius:
            return x.copy()
        return c + d * (self.radius / nrm)

    def project_many(self, X, tol=1e-9):
        X = _check_dim(np.atleast_2d(X), self.dim)
        c = np.asarray(self.center)
        D = X - c
        nrm = np.linalg.norm(D, axis=1)
        scale = np.ones_like(nrm)
        out = np.where(nrm > self.radius)
        scale[out] = self.radius / nrm[out]
        return c + D * scale[:, None]

    def diameter(self):
        return 2.0 * self.radius

    def to_json(self):
        return {"kind": "ball", "center": list(self.center), "radius": self.radius}


def _l1_project_rows(V, radius):
    """Row-wise projection onto the l1 ball of given radius (sorted threshold)."""
    V = np.atleast_2d(V)
    A = np.abs(V)
    inside = A.sum(axis=1) <= radius
    U = np.sort(A, axis=1)[:, ::-1]
    css = np.cumsum(U, axis=1) - radius
    idx = np.arange(1, V.shape[1] + 1)
    cond = U - css / idx > 0
    rho = V.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = css[np.arange(V.shape[0]), rho] / (rho + 1)
    tau = np.where(inside, 0.0, np.maximum(tau, 0.0))
    W = np.sign(V) * np.maximum(A - tau[:, None], 0.0)
    return np.where(inside[:, None], V, W)


@dataclass(frozen=True)
class L1Ball(ConstraintSet):
    center: tuple
    radius: float

    def __init__(self, center, radius):
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(center)))
        object.__setattr__(self, "radius", float(radius))

    @property
    def dim(self):
        return len(self.center)

    def project(self, x, tol=1e-9):
        x = _check_dim(x, self.dim)
        c = np.asarray(self.center)
        return c + _l1_project_rows(x - c, self.radius)[0]

    def project_many(self, X, tol=1e-9):
        X = _check_dim(np.atleast_2d(X), self.dim)
        c = np.asarray(self.center)
        return c + _l1_project_rows(X - c, self.radius)

    def diameter(self):
        return 2.0 * self.radius

    def to_json(self):
        return {"kind": "l1_ball", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class MonotoneCone(ConstraintSet):
    n: int

    @property
    def dim(self):
        return self.n

    def project(self, x, tol=1e-9):
        return pava(_check_dim(x, self.n))

    def project_many(self, X, tol=1e-9):
        return _pava_many(_check_dim(np.atleast_2d(X), self.n))

    def to_json(self):
        return {"kind": "monotone_cone", "n": self.n}


@dataclass(frozen=True)
class WeightedEllipsoid(ConstraintSet):
    """{alpha : sum_i w_i alpha_i^2 <= radius^2} with strictly positive weights."""

    weights: tuple
    radius: float

    def __init__(self, weights, radius):
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "weights", tuple(w))
        object.__setattr__(self, "radius", float(radius))

    @property
    def dim(self):
        return len(self.weights)

    def _quad(self, x):
        return float(np.dot(np.asarray(self.weights), x * x))

    def project(self, x, tol=1e-9):
        x = _check_dim(x, self.dim)
        r2 = self.radius**2
        if self._quad(x) <= r2:
            return x.copy()
        w = np.asarray(self.weights)

        # g(mu) = sum w x^2 / (1 + mu w)^2 is decreasing in mu >= 0
        def g(mu):
            return float(np.sum(w * x * x / (1.0 + mu * w) ** 2))

        lo, hi = 0.0, 1.0
        while g(hi) > r2:
            hi *= 2.0
            if hi > 1e30:
                raise RuntimeError("ellipsoid multiplier bracket failed")
        # bisection to 1e-12 relative tolerance
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(mid) > r2:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-12 * max(1.0, hi):
                break
        mu = 0.5 * (lo + hi)
        return x / (1.0 + mu * w)

    def diameter(self):
        return 2.0 * self.radius / np.sqrt(min(self.weights))

    def to_json(self):
        return {
            "kind": "weighted_ellipsoid",
            "weights": list(self.weights),
            "radius": self.radius,
        }


def dykstra_project(sets, x, tol=1e-9, max_iter=100_000):
    """Euclidean projection onto the intersection of convex sets.

    Dykstra's alternating projections with correction terms.  Converges for
    any nonempty intersection; raises :class:`DykstraError` (carrying the
    last iterate and residual) when successive cycles keep moving by more
    than ``tol`` after ``max_iter`` cycles.
    """
    if not sets:
        raise ValueError("need at least one set")
    dims = {s.dim for s in sets}
    if len(dims) != 1:
        raise ValueError("intersection members must share dimension")
    x = _check_dim(x, sets[0].dim)
    m = len(sets)
    y = x.copy()
    incr = [np.zeros_like(x) for _ in range(m)]
    residual = np.inf
    for _ in range(max_iter):
        y_prev = y.copy()
        for i, s in enumerate(sets):
            z = y + incr[i]
            y = s.project(z, tol=tol)
            incr[i] = z - y
        residual = float(np.linalg.norm(y - y_prev))
        if residual < tol:
            return y
    raise DykstraError(
        f"Dykstra failed to converge within {max_iter} cycles (residual {residual:.3e})",
        iterate=y,
        residual=residual,
    )


@dataclass(frozen=True)
class Intersection(ConstraintSet):
    sets: tuple
    witness: tuple | None = field(default=None)
    max_iter: int = 100_000

    def __init__(self, sets, witness=None, max_iter=100_000):
        sets = tuple(sets)
        if not sets:
            raise ValueError("intersection requires at least one member")
        dims = {s.dim for s in sets}
        if len(dims) != 1:
            raise ValueError("intersection members must share dimension")
        if witness is not None:
            witness = tuple(float(v) for v in np.atleast_1d(witness))
            if not all(s.contains(np.asarray(witness), tol=1e-8) for s in sets):
                raise ValueError("witness point is not in every member set")
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "witness", witness)
        object.__setattr__(self, "max_iter", max_iter)

    @property
    def dim(self):
        return self.sets[0].dim

    def project(self, x, tol=1e-9):
        return dykstra_project(self.sets, x, tol=tol, max_iter=self.max_iter)

    def diameter(self):
        return min(s.diameter() for s in self.sets)

    def to_json(self):
        out = {"kind": "intersection", "sets": [s.to_json() for s in self.sets]}
        if self.witness is not None:
            out["witness"] = list(self.witness)
        return out


_KINDS = {
    "full_space": lambda d: FullSpace(int(d["n"])),
    "singleton": lambda d: Singleton(d["point"]),
    "box": lambda d: Box(d["lo"], d["hi"]),
    "ball": lambda d: Ball(d["center"], d["radius"]),
    "l1_ball": lambda d: L1Ball(d["center"], d["radius"]),
    "monotone_cone": lambda d: MonotoneCone(int(d["n"])),
    "weighted_ellipsoid": lambda d: WeightedEllipsoid(d["weights"], d["radius"]),
    "intersection": lambda d: Intersection(
        [set_from_json(s) for s in d["sets"]], witness=d.get("witness")
    ),
}


def set_from_json(d):
    """Build a ConstraintSet from its JSON descriptor {"kind": ..., ...}."""
    try:
        kind = d["kind"]
    except (KeyError, TypeError):
        raise ValueError("set descriptor must be an object with a 'kind' field")
    if kind not in _KINDS:
        raise ValueError(f"unknown set kind: {kind!r}")
    return _KINDS[kind](d)
