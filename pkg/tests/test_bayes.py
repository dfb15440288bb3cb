"""Bayes lower bounds vs a quadrature oracle for the exact Bayes risk."""

import numpy as np
import pytest

from seqlab.bayes import (
    GridPrior,
    Pushforward,
    TwoPoint,
    avg_risk_under_prior,
    bayes_oracle_1d,
    chi_sq_gaussian,
    lecam_two_point,
    prior_from_json,
    sample_pushforward_prior,
    small_ball_lower_bound,
)
from seqlab.penalties import RangePenalty, Zero
from seqlab.risk import EstimatorSpec, simulate_risk
from seqlab.sets import MonotoneCone, cube
from seqlab.width import NoiseBatch

rng = np.random.default_rng(31415)


def test_lecam_values():
    # d = 1: (1/4)(1)(1 - 1/2) = 1/8 exactly
    assert lecam_two_point([0.0], [1.0]).value == 0.125
    assert lecam_two_point([0.0], [0.0]).value == 0.0
    # d >= 2: TV bound saturates at 1, bound collapses to 0
    assert lecam_two_point([0.0], [5.0]).value == 0.0
    d = 0.5
    assert lecam_two_point([0.0], [d]).value == pytest.approx(
        0.25 * d * d * (1 - d / 2)
    )


def test_chi_sq_values():
    assert chi_sq_gaussian([0.0], [0.0]).value == 0.0
    assert chi_sq_gaussian([0.0], [1.0]).value == pytest.approx(np.e - 1.0)
    sat = chi_sq_gaussian([0.0], [100.0])
    assert sat.saturated and np.isinf(sat.value)


def test_small_ball_grid_oracle():
    # direct enumeration oracle on a small 1-D grid prior
    pts = np.linspace(-1, 1, 64)
    prior = GridPrior(pts)
    I = 1.0
    rep = small_ball_lower_bound(prior, I)
    threshold = 1.0 / (4 * (1 + I))

    def ball_mass(a, t):
        return np.mean((pts - a) ** 2 <= t)

    # oracle: for each candidate the first squared distance with mass >= thr
    t_oracle = np.inf
    for a in pts:
        d2 = np.sort((pts - a) ** 2)
        cm = np.arange(1, 65) / 64.0
        t_a = d2[np.searchsorted(cm, threshold)]
        t_oracle = min(t_oracle, t_a)
    assert rep.value == pytest.approx(0.5 * t_oracle, abs=1e-12)
    assert rep.value > 0


def test_small_ball_heavy_atom_gives_zero():
    prior = TwoPoint([0.0], [1.0])  # atom mass 1/2 >= threshold
    assert small_ball_lower_bound(prior, 0.0).value == 0.0


def test_small_ball_monotone_in_I():
    prior = GridPrior(np.linspace(-2, 2, 101))
    vals = [small_ball_lower_bound(prior, I).value for I in (0.0, 1.0, 5.0, 50.0)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_bayes_oracle_point_mass():
    assert bayes_oracle_1d(GridPrior([[0.7]])) == pytest.approx(0.0, abs=1e-12)


def test_bayes_oracle_discretized_gaussian():
    pts = np.linspace(-6, 6, 601)
    w = np.exp(-0.5 * pts**2)
    prior = GridPrior(pts, w / w.sum())
    # conjugate closed form tau^2/(1+tau^2) = 1/2 at tau = 1
    assert bayes_oracle_1d(prior) == pytest.approx(0.5, abs=5e-3)


def test_bayes_oracle_two_point():
    val = bayes_oracle_1d(TwoPoint([-0.5], [0.5]))
    assert 0 < val < 0.25
    assert val >= 0.125 - 1e-3  # lecam at d = 1 minus discretization error


def test_lecam_dominated_by_oracle_random():
    for _ in range(20):
        d = rng.uniform(0.01, 2.0)
        c = rng.normal()
        prior = TwoPoint([c - d / 2], [c + d / 2])
        lb = lecam_two_point(prior.p1, prior.p2).value
        assert lb <= bayes_oracle_1d(prior) + 1e-3


def test_small_ball_dominated_by_oracle_random():
    for _ in range(20):
        lo = rng.uniform(-2, 0)
        hi = rng.uniform(0.2, 2)
        pts = np.linspace(lo, lo + hi, 101)
        w = rng.uniform(0.5, 1.5, size=101)
        prior = GridPrior(pts, w / w.sum())
        mid = np.array([(pts[0] + pts[-1]) / 2])
        I = max(chi_sq_gaussian([p], mid).value for p in pts)
        lb = small_ball_lower_bound(prior, I).value
        assert lb <= bayes_oracle_1d(prior) + 1e-3


def test_avg_risk_zero_estimator_analytic():
    prior = GridPrior([[1.0], [-2.0]], [0.5, 0.5])
    mean, stderr = avg_risk_under_prior(EstimatorSpec(kind="zero"), prior,
                                        reps=10, seed=0)
    assert mean == pytest.approx(0.5 * 1.0 + 0.5 * 4.0)
    assert stderr == 0.0


def test_avg_risk_point_mass_matches_simulate():
    prior = GridPrior([[0.3]])
    est = EstimatorSpec(kind="identity")
    mean, stderr = avg_risk_under_prior(est, prior, reps=20000, seed=4)
    rep = simulate_risk(est, np.array([0.3]), reps=20000, seed=4)
    assert mean == pytest.approx(rep.mean_sq_loss, abs=4 * (stderr + rep.stderr))
    assert mean == pytest.approx(1.0, abs=4 * stderr)


def test_pushforward_membership_and_radius():
    theta_star = np.zeros(10)
    batch = NoiseBatch(seed=17, count=500, dim=10)
    p = Pushforward(theta_star, 0.0295, cube(1.0, 10), Zero(), batch)
    samples = sample_pushforward_prior(p)
    assert len(samples) == 500
    for s in samples:
        assert p.set_.contains(s, tol=1e-6)


def test_pushforward_rejects_bad_rho():
    with pytest.raises(ValueError):
        Pushforward(np.zeros(2), 0.5, cube(1.0, 2), Zero(),
                    NoiseBatch(seed=1, count=10, dim=2))


def test_pushforward_rejects_infeasible_center():
    with pytest.raises(ValueError):
        Pushforward(5 * np.ones(2), 0.0295, cube(1.0, 2), Zero(),
                    NoiseBatch(seed=1, count=10, dim=2))


def test_pushforward_cone_membership():
    theta_star = np.zeros(10)
    batch = NoiseBatch(seed=23, count=300, dim=10)
    p = Pushforward(theta_star, 0.0295, MonotoneCone(10), RangePenalty(0.5), batch)
    for s in sample_pushforward_prior(p):
        assert np.all(np.diff(s) >= -1e-6)


def test_prior_json_round_trip():
    for prior in (TwoPoint([0.0], [1.0]), GridPrior(np.linspace(-1, 1, 5))):
        clone = prior_from_json(prior.to_json())
        p0, w0 = prior.atoms()
        p1, w1 = clone.atoms()
        np.testing.assert_allclose(p0, p1)
        np.testing.assert_allclose(w0, w1)
