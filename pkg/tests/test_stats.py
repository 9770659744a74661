import math
import numpy as np
import pytest
from scipy import stats as scipy_stats
from skillweaver.utils import stats
from skillweaver.utils.errors import SampleSizeError
from skillweaver.utils.stats import bootstrap_mean_ci, equal_var_t_test, two_sided_p, welch_t_test

MASCULINE_REWARDS = [1.4, 2.9, 0.5, 7.4, 1.9, 3.0, 1.3]
FEMININE_REWARDS = [-1.3, -5.9, 0.3, 3.0, -4.6]


def test_welch_hand_example():
    result = welch_t_test([1, 2, 3, 4, 5], [11, 12, 13, 14, 15])
    assert result.t == pytest.approx(-10.0)
    assert result.df == pytest.approx(8.0)
    reference = scipy_stats.ttest_ind([1, 2, 3, 4, 5], [11, 12, 13, 14, 15], equal_var=False)
    assert result.p == pytest.approx(reference.pvalue, rel=1e-9)
    assert result.p < 1e-4


def test_welch_matches_scipy_on_random_samples():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = rng.normal(0, rng.uniform(0.5, 3), int(rng.integers(2, 30)))
        b = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 3), int(rng.integers(2, 30)))
        result = welch_t_test(a, b)
        reference = scipy_stats.ttest_ind(a, b, equal_var=False)
        assert result.t == pytest.approx(reference.statistic, rel=1e-9)
        assert result.p == pytest.approx(reference.pvalue, rel=1e-6, abs=1e-12)


def test_welch_zero_variance():
    different = welch_t_test([2, 2], [3, 3])
    assert different.degenerate
    assert different.p == 0.0
    assert different.t == -math.inf
    same = welch_t_test([2, 2, 2], [2, 2])
    assert (same.t, same.p) == (0.0, 1.0)


def test_t_tests_need_two_values():
    with pytest.raises(SampleSizeError):
        welch_t_test([1], [1, 2])
    with pytest.raises(SampleSizeError):
        equal_var_t_test([1, 2], [])


def test_two_sided_p_at_zero():
    assert two_sided_p(0.0, 5) == pytest.approx(1.0)


def test_stereotype_rewards_one_tailed():
    result = equal_var_t_test(MASCULINE_REWARDS, FEMININE_REWARDS, one_tailed=True)
    assert result.df == 10
    assert result.t == pytest.approx(2.557, abs=0.01)
    assert result.p == pytest.approx(0.014, abs=0.002)
    reference = scipy_stats.ttest_ind(MASCULINE_REWARDS, FEMININE_REWARDS, alternative="greater")
    assert result.p == pytest.approx(reference.pvalue, rel=1e-9)


def test_one_tailed_direction():
    forward = equal_var_t_test(MASCULINE_REWARDS, FEMININE_REWARDS, one_tailed=True)
    backward = equal_var_t_test(FEMININE_REWARDS, MASCULINE_REWARDS, one_tailed=True)
    assert forward.p + backward.p == pytest.approx(1.0)
    assert equal_var_t_test([1, 2, 3], [1, 2, 3], one_tailed=True).p == pytest.approx(0.5)


def test_bootstrap_interval_contains_mean():
    rng = np.random.default_rng(1)
    for seed in range(20):
        values = rng.integers(0, 6, int(rng.integers(1, 40)))
        mean, low, high = bootstrap_mean_ci(values, replicates=300, seed=seed)
        assert mean == pytest.approx(values.mean())
        assert low <= mean <= high


def test_bootstrap_is_seeded():
    values = [0, 1, 1, 2, 5, 3, 0, 4]
    assert bootstrap_mean_ci(values, 500, seed=7) == bootstrap_mean_ci(values, 500, seed=7)


def test_bootstrap_in_chunks(monkeypatch):
    monkeypatch.setattr(stats, "BOOTSTRAP_CHUNK", 16)
    mean, low, high = bootstrap_mean_ci(list(range(8)), replicates=1000, seed=3)
    assert mean == 3.5
    assert 0 <= low < mean < high <= 7


def test_bootstrap_constant_and_empty():
    assert bootstrap_mean_ci([3, 3, 3], replicates=50) == (3.0, 3.0, 3.0)
    with pytest.raises(SampleSizeError):
        bootstrap_mean_ci([])
