"""Localized Gaussian width and concentration point t_theta."""

import json

import numpy as np
import pytest

from seqlab.penalties import L1, RangePenalty, Zero
from seqlab.sets import Box, FullSpace, L1Ball, MonotoneCone, Singleton
from seqlab.width import (
    NoiseBatch,
    estimate_m,
    find_t_theta,
    inner_sup,
    inner_sup_batch,
    width_profile,
)

BATCH = NoiseBatch(seed=71, count=3000, dim=10)


def test_noise_batch_reproducible():
    a = NoiseBatch(seed=5, count=4, dim=3).vectors()
    b = NoiseBatch(seed=5, count=4, dim=3).vectors()
    np.testing.assert_array_equal(a, b)
    c = NoiseBatch(seed=6, count=4, dim=3).vectors()
    assert not np.array_equal(a, c)
    # member i depends only on (seed, i): prefixes agree across counts
    d = NoiseBatch(seed=5, count=2, dim=3).vectors()
    np.testing.assert_array_equal(a[:2], d)


def test_inner_sup_fullspace_closed_form():
    # sup over ||a - theta|| <= t of <z, a - theta> = t ||z||
    z = np.array([3.0, 4.0])
    val, arg = inner_sup(z, np.zeros(2), 2.0, FullSpace(2), Zero())
    assert val == pytest.approx(10.0, rel=1e-6)
    np.testing.assert_allclose(arg, [1.2, 1.6], atol=1e-6)


def test_inner_sup_singleton_and_t_zero():
    z = np.array([1.0, -1.0])
    assert inner_sup(z, np.ones(2), 5.0, Singleton(np.ones(2)), Zero())[0] == 0.0
    assert inner_sup(z, np.zeros(2), 0.0, FullSpace(2), L1(1.0))[0] == 0.0


def test_inner_sup_fullspace_l1():
    # sup <z, a> - lam||a||_1 over ||a|| <= t; check against a dense grid
    z = np.array([2.0, 0.3])
    t, lam = 1.5, 1.0
    val, _ = inner_sup(z, np.zeros(2), t, FullSpace(2), L1(lam))
    ang = np.linspace(0, 2 * np.pi, 4001)
    rad = np.linspace(0, t, 301)
    pts = np.stack([np.outer(rad, np.cos(ang)).ravel(),
                    np.outer(rad, np.sin(ang)).ravel()], axis=1)
    grid_val = np.max(pts @ z - lam * np.abs(pts).sum(axis=1))
    assert val >= grid_val - 1e-6
    assert val <= grid_val + 1e-2


def test_estimate_m_fullspace_is_t_times_mean_norm():
    batch = NoiseBatch(seed=3, count=5000, dim=5)
    Z = batch.vectors()
    for t in (0.5, 2.0):
        m, _ = estimate_m(np.zeros(5), t, FullSpace(5), Zero(), batch)
        assert m == pytest.approx(t * np.linalg.norm(Z, axis=1).mean(), rel=1e-9)


@pytest.mark.parametrize(
    "set_,f",
    [
        (Box([-1.0] * 10, [1.0] * 10), Zero()),
        (MonotoneCone(10), RangePenalty(0.5)),
        (L1Ball(np.zeros(10), 2.0), Zero()),
        (FullSpace(10), L1(1.0)),
    ],
    ids=["box", "cone_range", "l1ball", "fullspace_l1"],
)
def test_fixed_batch_m_monotone_and_concave(set_, f):
    theta = np.zeros(10)
    tgrid = np.linspace(0.2, 6.0, 12)
    prof = width_profile(theta, tgrid, set_, f, BATCH)
    slack = 1e-7
    assert np.all(np.diff(prof.m_hat) >= -slack)
    slopes = np.diff(prof.m_hat) / np.diff(tgrid)
    assert np.all(np.diff(slopes) <= slack)


def test_t_theta_fullspace_matches_mean_norm():
    # exact fixed-batch optimum: G(t) = t*c - t^2/2 peaks at t = mean ||Z||
    for n in (1, 5):
        batch = NoiseBatch(seed=11, count=4000, dim=n)
        c = np.linalg.norm(batch.vectors(), axis=1).mean()
        res = find_t_theta(np.zeros(n), FullSpace(n), Zero(), batch)
        assert res.t_theta == pytest.approx(c, abs=2e-3)
        assert res.bracket[0] <= res.t_theta <= res.bracket[1]
        assert res.G_at_max == pytest.approx(0.5 * c**2, abs=1e-3)


def test_t_theta_singleton_is_zero():
    batch = NoiseBatch(seed=2, count=500, dim=3)
    res = find_t_theta(np.ones(3), Singleton(np.ones(3)), Zero(), batch)
    assert res.t_theta == 0.0


def test_t_theta_bounded_by_diameter():
    batch = NoiseBatch(seed=9, count=2000, dim=10)
    set_ = Box([-1.0] * 10, [1.0] * 10)
    res = find_t_theta(np.zeros(10), set_, Zero(), batch)
    assert 0 < res.t_theta <= set_.diameter() + 1e-9
    assert res.stderr > 0


def test_profile_serialization():
    tgrid = np.array([0.5, 1.0, 2.0])
    prof = width_profile(np.zeros(10), tgrid, Box([-1.0] * 10, [1.0] * 10),
                         Zero(), NoiseBatch(seed=1, count=200, dim=10))
    d = prof.to_json()
    json.dumps(d)
    assert len(d["m_hat"]) == 3 and len(d["stderr"]) == 3
    lines = prof.to_csv().strip().splitlines()
    assert lines[0] == "t,m_hat,stderr"
    assert len(lines) == 4


def test_inner_sup_batch_matches_single():
    Z = NoiseBatch(seed=13, count=8, dim=10).vectors()
    set_, f = MonotoneCone(10), RangePenalty(0.5)
    vals, args = inner_sup_batch(Z, np.zeros(10), 1.5, set_, f)
    for z, v, a in zip(Z, vals, args):
        v1, a1 = inner_sup(z, np.zeros(10), 1.5, set_, f)
        assert v == pytest.approx(v1, abs=1e-6)
        np.testing.assert_allclose(a, a1, atol=1e-5)
