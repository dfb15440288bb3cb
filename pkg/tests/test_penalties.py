"""Penalty values, subgradients, and prox operators vs direct oracles."""

import numpy as np
import pytest

from seqlab.penalties import (
    L1,
    LinearForm,
    Quadratic,
    RangePenalty,
    Zero,
    penalty_from_json,
)

rng = np.random.default_rng(4202)

PENALTIES = [
    Zero(),
    L1(0.7),
    RangePenalty(0.5),
    Quadratic(1.3),
    LinearForm(np.array([1.0, -2.0, 0.5])),
]


def test_values():
    x = np.array([1.0, -2.0, 0.5])
    assert Zero().value(x) == 0.0
    assert L1(2.0).value(x) == pytest.approx(7.0)
    assert RangePenalty(0.5).value(x) == pytest.approx(0.5 * 3.0)
    assert Quadratic(2.0).value(x) == pytest.approx(np.sum(x**2))
    assert LinearForm(np.ones(3)).value(x) == pytest.approx(-0.5)


def test_value_many_matches_loop():
    X = rng.normal(size=(30, 3))
    for f in PENALTIES:
        vals = f.value_many(X)
        np.testing.assert_allclose(vals, [f.value(x) for x in X], atol=1e-12)


@pytest.mark.parametrize("f", PENALTIES, ids=lambda f: type(f).__name__)
def test_subgradient_inequality(f):
    # f(y) >= f(x) + <g, y - x> for g in subdifferential at x
    for _ in range(40):
        x, y = rng.normal(size=3), rng.normal(size=3)
        g = f.subgradient(x)
        assert f.value(y) >= f.value(x) + np.dot(g, y - x) - 1e-10


@pytest.mark.parametrize("f", PENALTIES, ids=lambda f: type(f).__name__)
def test_convexity_chords(f):
    for _ in range(40):
        x, y = rng.normal(size=3), rng.normal(size=3)
        lam = rng.uniform()
        assert f.value(lam * x + (1 - lam) * y) <= (
            lam * f.value(x) + (1 - lam) * f.value(y) + 1e-10
        )


def test_l1_prox_soft_threshold():
    f = L1(1.0)
    np.testing.assert_allclose(
        f.prox(np.array([2.0, -0.5, 1.0]), 1.0), [1.0, 0.0, 0.0]
    )
    np.testing.assert_allclose(
        f.prox(np.array([2.0, -3.0]), 0.5), [1.5, -2.5]
    )


@pytest.mark.parametrize(
    "f", [f for f in PENALTIES if f.has_prox], ids=lambda f: type(f).__name__
)
def test_prox_optimality_vs_grid(f):
    # prox_step(x) minimizes 0.5||u - x||^2 + step f(u); compare to random probes
    for _ in range(20):
        x = rng.normal(size=3)
        step = rng.uniform(0.1, 2.0)
        p = f.prox(x, step)
        obj = 0.5 * np.sum((p - x) ** 2) + step * f.value(p)
        for u in x + rng.normal(0, 1, size=(200, 3)):
            assert obj <= 0.5 * np.sum((u - x) ** 2) + step * f.value(u) + 1e-9


def test_range_has_no_prox():
    assert not RangePenalty(0.5).has_prox
    assert RangePenalty(0.5).prox(np.zeros(3), 1.0) is None


def test_range_subgradient_ties():
    f = RangePenalty(1.0)
    g = f.subgradient(np.array([1.0, 1.0]))
    # max - min at a constant vector: a valid subgradient is e_i - e_j
    y = rng.normal(size=2)
    assert f.value(y) >= f.value(np.ones(2)) + np.dot(g, y - np.ones(2)) - 1e-12


def test_scaled():
    f = L1(1.0).scaled(3.0)
    assert f.value(np.array([1.0, -1.0])) == pytest.approx(6.0)
    z = Zero().scaled(7.0)
    assert z.value(np.ones(2)) == 0.0


def test_nonnegative_lambda_required():
    with pytest.raises(ValueError):
        L1(-1.0)
    with pytest.raises(ValueError):
        RangePenalty(-0.1)


@pytest.mark.parametrize("f", PENALTIES, ids=lambda f: type(f).__name__)
def test_json_round_trip(f):
    clone = penalty_from_json(f.to_json())
    x = rng.normal(size=3)
    assert clone.value(x) == pytest.approx(f.value(x), abs=1e-12)
