import numpy as np
import pytest
from scipy import stats

from communitydp.decoupling import (NoiseLadder, build_ladder, coupled_release,
                                    ladder_arrays)


# --- characteristic-function oracle (checked before anything samples) ---
#
# A scalar Laplace(1/eps) variable has CF eps^2 / (eps^2 + t^2). The
# keep-or-add mixture preserves the marginal iff
#   p * phi_hi(t) + (1 - p) * phi_hi(t) * phi_lo(t) == phi_lo(t)
# for every t, which forces p = (eps_lo / eps_hi)^2.

def laplace_cf(eps, t):
    return eps**2 / (eps**2 + t**2)


@pytest.mark.parametrize("eps_lo,eps_hi", [(0.5, 1.0), (0.2, 3.0), (1.0, 1.5)])
def test_mixture_cf_identity(eps_lo, eps_hi):
    t = np.linspace(-50.0, 50.0, 2001)
    p = (eps_lo / eps_hi) ** 2
    mixture = p * laplace_cf(eps_hi, t) + (1 - p) * laplace_cf(eps_hi, t) * laplace_cf(eps_lo, t)
    assert np.allclose(mixture, laplace_cf(eps_lo, t), atol=1e-12)


def test_mixture_cf_identity_fails_for_other_keep_probabilities():
    t = np.linspace(-10.0, 10.0, 101)
    for p in (0.1, 0.5, 0.9):
        mixture = p * laplace_cf(1.0, t) + (1 - p) * laplace_cf(1.0, t) * laplace_cf(0.5, t)
        assert not np.allclose(mixture, laplace_cf(0.5, t), atol=1e-6)


def test_empirical_cf_matches_analytic():
    arrays = ladder_arrays([0.5, 1.0], dimension=1, size=100_000, rng=17)
    t = np.array([0.1, 0.3, 1.0, 2.0])
    for eps in (0.5, 1.0):
        v = arrays[eps][:, 0]
        empirical = np.cos(np.outer(t, v)).mean(axis=1)
        assert np.allclose(empirical, laplace_cf(eps, t), atol=0.02)


# --- ladder construction ---

def test_degenerate_equal_levels_share_sample():
    ladder = build_ladder([0.7, 0.7], dimension=1, seed=3)
    assert np.array_equal(ladder.sample(0.7), ladder.sample(0.7))
    assert len(set(ladder.samples)) == 1


def test_level_validation():
    with pytest.raises(ValueError):
        build_ladder([1.0, 0.5])  # descending
    with pytest.raises(ValueError):
        build_ladder([-1.0, 1.0])
    with pytest.raises(ValueError):
        build_ladder([])
    with pytest.raises(ValueError):
        build_ladder([1.0], dimension=0)


def test_ladder_deterministic():
    a = build_ladder([0.5, 1.0, 2.0], dimension=1, seed=9)
    b = build_ladder([0.5, 1.0, 2.0], dimension=1, seed=9)
    for eps in a.levels:
        assert np.array_equal(a.sample(eps), b.sample(eps))


def test_keep_probability_scalar():
    arrays = ladder_arrays([0.5, 1.0], dimension=1, size=400_000, rng=21)
    frac = np.mean(arrays[0.5][:, 0] == arrays[1.0][:, 0])
    assert frac == pytest.approx(0.25, abs=0.005)


def test_marginals_ks_every_level():
    levels = [0.4, 1.0, 2.5]
    arrays = ladder_arrays(levels, dimension=1, size=100_000, rng=33)
    for eps in levels:
        res = stats.kstest(arrays[eps][:, 0], stats.laplace(scale=1.0 / eps).cdf)
        assert res.pvalue > 0.01, f"eps={eps}: p={res.pvalue}"


def test_markov_increments_uncorrelated():
    levels = [0.5, 1.0, 2.0]
    arrays = ladder_arrays(levels, dimension=1, size=200_000, rng=5)
    d12 = arrays[0.5][:, 0] - arrays[1.0][:, 0]
    d23 = arrays[1.0][:, 0] - arrays[2.0][:, 0]
    corr = np.corrcoef(d12, d23)[0, 1]
    assert abs(corr) < 3.0 / np.sqrt(len(d12))


def test_multivariate_marginals_radial_law():
    # The exp(-eps * |v|) density has radius Gamma(n, 1/eps); the
    # subdivided kernel must preserve it down the ladder.
    for dimension in (2, 3):
        arrays = ladder_arrays([1.0, 2.0], dimension=dimension, size=40_000, rng=5)
        for eps in (2.0, 1.0):
            radius = np.linalg.norm(arrays[eps], axis=1)
            res = stats.kstest(radius, stats.gamma(a=dimension, scale=1.0 / eps).cdf)
            assert res.pvalue > 0.01, f"n={dimension} eps={eps}: p={res.pvalue}"


def test_multivariate_isotropy():
    arrays = ladder_arrays([1.0, 2.0], dimension=3, size=50_000, rng=8)
    v = arrays[1.0]
    directions = v / np.linalg.norm(v, axis=1, keepdims=True)
    assert np.allclose(directions.mean(axis=0), 0.0, atol=0.02)


# --- coupled releases ---

def test_single_community_is_plain_laplace():
    releases = coupled_release([0.0], {5: 1.0}, seed=2)
    assert len(releases) == 1
    arrays = ladder_arrays([1.0], dimension=1, size=100_000, rng=2)
    res = stats.kstest(arrays[1.0][:, 0], stats.laplace(scale=1.0).cdf)
    assert res.pvalue > 0.01


def test_equal_epsilon_identical_payloads():
    releases = coupled_release([1.5], {0: 0.8, 1: 0.8}, seed=4)
    assert np.array_equal(releases[0].payload, releases[1].payload)
    assert releases[0].epsilon == releases[1].epsilon == 0.8


def test_release_difference_matches_mixture_kernel():
    # V_{0.5} - V_{1.0} vanishes with probability 0.25, otherwise it is a
    # fresh Laplace(1/0.5) increment.
    diffs = []
    arrays = ladder_arrays([0.5, 1.0], dimension=1, size=150_000, rng=10)
    diffs = arrays[0.5][:, 0] - arrays[1.0][:, 0]
    zero = diffs == 0.0
    assert np.mean(zero) == pytest.approx(0.25, abs=0.01)
    res = stats.kstest(diffs[~zero], stats.laplace(scale=2.0).cdf)
    assert res.pvalue > 0.01


def test_error_locality_across_scenarios():
    # The law of |y(eps) - d| must not depend on how many other levels
    # the ladder carries.
    small = ladder_arrays([1.0, 2.0], dimension=1, size=50_000, rng=12)
    large = ladder_arrays([0.25, 0.5, 1.0, 2.0, 4.0], dimension=1, size=50_000, rng=13)
    res = stats.ks_2samp(np.abs(small[1.0][:, 0]), np.abs(large[1.0][:, 0]))
    assert res.pvalue > 0.01


def test_coupled_release_sensitivity_scaling():
    releases = coupled_release([0.0], {0: 1.0}, seed=6, sensitivity=3.0)
    baseline = coupled_release([0.0], {0: 1.0}, seed=6, sensitivity=1.0)
    assert releases[0].payload[0] == pytest.approx(3.0 * baseline[0].payload[0])


def test_coupled_release_validation():
    with pytest.raises(ValueError):
        coupled_release([0.0], {}, seed=1)
    with pytest.raises(ValueError):
        coupled_release([0.0], {0: 1.0}, seed=1, sensitivity=0.0)
