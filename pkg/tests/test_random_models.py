import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcmpsi.errors import OutOfTableError
from lcmpsi.moments import expectation_bernoulli_direct, expectation_uniform_k
from lcmpsi.random_models import (
    BernoulliModel,
    UniformKModel,
    montecarlo_psi,
    run_trials,
    sample,
    sample_bernoulli,
    sample_uniform_k,
)
from lcmpsi.sieve import build_prime_table

T = build_prime_table(10**4)


@pytest.mark.parametrize("args", [(0, 0.5), (10, 0.0), (10, 1.0)])
def test_bernoulli_model_validation(args):
    with pytest.raises(ValueError):
        BernoulliModel(*args)


@pytest.mark.parametrize("args", [(0, 0), (10, -1), (10, 11)])
def test_uniform_model_validation(args):
    with pytest.raises(ValueError):
        UniformKModel(*args)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 2000), st.floats(0.001, 0.999), st.integers(0, 2**32), st.integers(0, 1000))
def test_bernoulli_sample_is_valid_subset(n, delta, seed, i):
    A = sample_bernoulli(BernoulliModel(n, delta), seed, i)
    arr = A.elements
    assert A.n == n
    assert np.all(np.diff(arr) > 0)
    assert arr.size == 0 or (arr[0] >= 1 and arr[-1] <= n)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 2000), st.data(), st.integers(0, 2**32))
def test_uniform_sample_has_exact_size(n, data, seed):
    k = data.draw(st.integers(0, n))
    A = sample_uniform_k(UniformKModel(n, k), seed, 3)
    assert len(A) == k
    assert k == 0 or (A.elements[0] >= 1 and A.elements[-1] <= n)


@pytest.mark.parametrize("model", [BernoulliModel(500, 0.1), UniformKModel(500, 40)])
def test_same_seed_same_sample(model):
    assert sample(model, 7, 11) == sample(model, 7, 11)
    assert sample(model, 7, 11) != sample(model, 8, 11)
    assert sample(model, 7, 11) != sample(model, 7, 12)


def test_uniform_marginals_are_uniform():
    counts = np.zeros(11)
    m = UniformKModel(10, 3)
    for i in range(3000):
        counts[sample(m, 0, i).elements] += 1
    freq = counts[1:] / 3000
    assert np.all(np.abs(freq - 0.3) < 0.04)


def test_bernoulli_mean_size():
    m = BernoulliModel(1000, 0.2)
    sizes = [len(sample(m, 1, i)) for i in range(400)]
    # sd of the mean is sqrt(160 / 400) ~ 0.63
    assert abs(np.mean(sizes) - 200) < 4


def test_results_do_not_depend_on_threads():
    m = BernoulliModel(5000, 0.05)
    a, sa = run_trials(m, 24, 5, T, threads=1)
    b, sb = run_trials(m, 24, 5, T, threads=4)
    assert np.array_equal(a, b) and np.array_equal(sa, sb)


def test_prefix_of_trials_is_stable():
    m = UniformKModel(3000, 50)
    a, _ = run_trials(m, 10, 2, T)
    b, _ = run_trials(m, 25, 2, T)
    assert np.array_equal(a, b[:10])


def test_montecarlo_mean_near_exact():
    n, delta = 2000, 0.05
    stats = montecarlo_psi(BernoulliModel(n, delta), 400, 0, T)
    exact = expectation_bernoulli_direct(n, delta, T)
    assert abs(stats.mean_psi - exact) < 4 * math.sqrt(stats.var_psi / 400)
    stats = montecarlo_psi(UniformKModel(n, 100), 400, 0, T)
    exact = expectation_uniform_k(n, 100, T)
    assert abs(stats.mean_psi - exact) < 4 * math.sqrt(stats.var_psi / 400)
    assert stats.mean_size == 100


def test_single_trial_is_degenerate():
    stats = montecarlo_psi(UniformKModel(100, 10), 1, 0, T)
    assert stats.degenerate and stats.var_psi == 0.0
    assert stats.as_row()["degenerate"] == 1


def test_quantile_columns():
    stats = montecarlo_psi(UniformKModel(100, 10), 20, 0, T, levels=(0.1, 0.9))
    row = stats.as_row()
    assert list(row) == ["trials", "mean_psi", "var_psi", "mean_size", "q0.1", "q0.9", "degenerate"]
    assert row["q0.1"] <= row["q0.9"]


@pytest.mark.parametrize("levels", [(0.5, 0.1), (0.0, 0.5), (0.5, 1.0)])
def test_bad_quantile_levels(levels):
    with pytest.raises(ValueError):
        montecarlo_psi(UniformKModel(100, 10), 5, 0, T, levels=levels)


def test_trial_count_and_table_range():
    with pytest.raises(ValueError):
        run_trials(UniformKModel(100, 10), 0, 0, T)
    with pytest.raises(OutOfTableError):
        run_trials(UniformKModel(10**5, 10), 2, 0, T)


def test_tiny_delta_gives_empty_sets():
    m = BernoulliModel(10, 1e-9)
    empty = sum(len(sample(m, 0, i)) == 0 for i in range(1000))
    assert empty >= 990


def test_uniform_extreme_sizes():
    assert sample(UniformKModel(7, 0), 0, 0).tolist() == []
    assert sample(UniformKModel(7, 7), 0, 0).tolist() == list(range(1, 8))


def test_bernoulli_size_mean_band():
    m = BernoulliModel(10**4, 0.1)
    sizes = [len(sample(m, 0, i)) for i in range(500)]
    assert abs(np.mean(sizes) - 1000) <= 4 * 30 / math.sqrt(500)


def _subset_frequencies(model, trials):
    counts = {}
    for i in range(trials):
        key = tuple(sample(model, 0, i).tolist())
        counts[key] = counts.get(key, 0) + 1
    return counts


def test_uniform_pairs_are_equally_likely():
    trials, p = 60_000, 1 / 15
    counts = _subset_frequencies(UniformKModel(6, 2), trials)
    assert len(counts) == 15
    sigma = math.sqrt(p * (1 - p) / trials)
    assert all(abs(c / trials - p) <= 5 * sigma for c in counts.values())


@pytest.mark.parametrize("n, delta", [(3, 0.3), (4, 0.5)])
def test_bernoulli_subset_frequencies(n, delta):
    trials = 100_000
    counts = _subset_frequencies(BernoulliModel(n, delta), trials)
    for mask in range(1 << n):
        subset = tuple(i + 1 for i in range(n) if mask >> i & 1)
        p = delta ** len(subset) * (1 - delta) ** (n - len(subset))
        sigma = math.sqrt(p * (1 - p) / trials)
        assert abs(counts.get(subset, 0) / trials - p) <= 5 * sigma


@pytest.mark.parametrize("model, exact", [
    (BernoulliModel(2, 0.5), math.log(2) / 2),
    (UniformKModel(4, 2), math.log(6912) / 6),
])
def test_montecarlo_tiny_models(model, exact):
    trials = 100_000
    stats = montecarlo_psi(model, trials, 0, T)
    assert abs(stats.mean_psi - exact) <= 4 * math.sqrt(stats.var_psi / trials)
