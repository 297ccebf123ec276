import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcmpsi import oracle
from lcmpsi.errors import DomainError, OutOfTableError, ResourceLimitError
from lcmpsi.moments import (
    binomial_tail_exact,
    bernoulli_report,
    chernoff_bound,
    expectation_bernoulli_direct,
    expectation_bernoulli_grouped,
    expectation_uniform_k,
    log_miss_ratio,
    make_report,
    pair_indicator_expectation,
    second_moment_uniform_k,
    transfer_gap,
    uniform_report,
    variance_bernoulli_exact,
)
from lcmpsi.sieve import build_prime_table, chebyshev_psi

T = build_prime_table(10**4)


@pytest.mark.parametrize("f", [expectation_bernoulli_direct, expectation_bernoulli_grouped])
def test_expectation_n2(f):
    assert f(2, 0.5, T) == pytest.approx(0.346574, abs=1e-6)
    assert f(1, 0.3, T) == 0.0


def test_variance_small_cases():
    assert variance_bernoulli_exact(2, 0.5, T) == pytest.approx(math.log(2) ** 2 / 4, abs=1e-15)
    assert variance_bernoulli_exact(1, 0.5, T) == 0.0


@pytest.mark.parametrize("n", range(1, 15))
@pytest.mark.parametrize("delta", [0.1, 0.25, 0.5, 0.9])
def test_bernoulli_against_enumeration(n, delta):
    e, v = oracle.enumerate_bernoulli_moments(n, delta)
    assert expectation_bernoulli_direct(n, delta, T) == pytest.approx(e, abs=1e-9)
    assert expectation_bernoulli_grouped(n, delta, T) == pytest.approx(e, abs=1e-9)
    assert variance_bernoulli_exact(n, delta, T) == pytest.approx(v, abs=1e-9)


@pytest.mark.parametrize("n", range(1, 15))
def test_uniform_against_enumeration(n):
    m1, m2 = oracle.uniform_moment_table(n)
    for k in range(n + 1):
        assert expectation_uniform_k(n, k, T) == pytest.approx(m1[k], abs=1e-9)
        assert second_moment_uniform_k(n, k, T) == pytest.approx(m2[k], abs=1e-9)


def test_uniform_hand_values():
    assert expectation_uniform_k(4, 0, T) == 0.0
    assert expectation_uniform_k(4, 4, T) == pytest.approx(math.log(12), abs=1e-12)
    assert expectation_uniform_k(4, 2, T) == pytest.approx(1.473503, abs=1e-6)
    assert second_moment_uniform_k(4, 0, T) == 0.0
    # lcms of the six pairs from {1..4}: 2, 3, 4, 4, 6, 12
    logs = [math.log(v) for v in (2, 3, 4, 4, 6, 12)]
    assert second_moment_uniform_k(4, 2, T) == pytest.approx(math.fsum(x * x for x in logs) / 6, abs=1e-12)


@pytest.mark.parametrize("n", [10**2, 10**3, 10**4])
@pytest.mark.parametrize("kind", ["half", "tenth", "root", "sparse"])
def test_direct_equals_grouped(n, kind):
    delta = {"half": 0.5, "tenth": 0.1, "root": n**-0.5, "sparse": 10 / n}[kind]
    d = expectation_bernoulli_direct(n, delta, T)
    assert expectation_bernoulli_grouped(n, delta, T) == pytest.approx(d, rel=1e-9)


def test_grouped_on_segmented_table():
    seg = build_prime_table(10**5, full_resolution_limit=10**3, segment_size=1 << 12)
    full = build_prime_table(10**5)
    for delta in (0.5, 0.01):
        assert expectation_bernoulli_grouped(10**5, delta, seg) == pytest.approx(
            expectation_bernoulli_direct(10**5, delta, full), rel=1e-9
        )


def test_pair_indicator_examples():
    assert pair_indicator_expectation(2, 3, 6, 0.5) == pytest.approx(0.6875)
    for m in (2, 3, 4):
        assert pair_indicator_expectation(m, m, 10, 0.3) == pytest.approx(1 - 0.7 ** (10 // m))
    # coprime with m*l > n: no common multiple
    assert pair_indicator_expectation(5, 7, 20, 0.4) == pytest.approx(1 - 0.6**4 - 0.6**2 + 0.6**6)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(1, 12), st.integers(1, 12), st.floats(0.05, 0.95))
def test_pair_indicator_by_enumeration(n, m, l, delta):
    m, l = min(m, n), min(l, n)
    _, size, _ = oracle.subset_psi(n)
    w = oracle.bernoulli_weights(n, delta)
    masks = np.arange(1 << n)
    mult = lambda d: sum(1 << (j - 1) for j in range(d, n + 1, d))
    hit = ((masks & mult(m)) != 0) & ((masks & mult(l)) != 0)
    assert pair_indicator_expectation(m, l, n, delta) == pytest.approx(w[hit].sum(), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 300), st.data())
def test_log_miss_ratio_matches_comb(n, data):
    k = data.draw(st.integers(0, n))
    qs = data.draw(st.lists(st.integers(0, n), min_size=1, max_size=10))
    got = log_miss_ratio(n, k, qs)
    for q, g in zip(qs, got):
        want = math.comb(n - q, k) / math.comb(n, k)
        assert math.exp(g) == pytest.approx(want, rel=1e-9, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10**4), st.data())
def test_uniform_direct_equals_breakpoint(n, data):
    k = data.draw(st.integers(0, n))
    a = expectation_uniform_k(n, k, T, method="direct")
    b = expectation_uniform_k(n, k, T, method="breakpoint")
    assert b == pytest.approx(a, rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3000), st.floats(1e-3, 0.999))
def test_variance_nonnegative_and_enveloped(n, delta):
    v = variance_bernoulli_exact(n, delta, T)
    assert v >= -1e-9
    assert v <= 4 * delta * n * math.log(n) ** 2


def test_mean_monotone_in_k():
    ks = list(range(0, 501, 50))
    means = [expectation_uniform_k(500, k, T) for k in ks]
    assert all(a <= b + 1e-12 for a, b in zip(means, means[1:]))
    assert means[-1] <= chebyshev_psi(500, T) + 1e-9


@pytest.mark.parametrize("delta", [0.0, 1.0, 1.5])
def test_delta_domain(delta):
    with pytest.raises(DomainError):
        expectation_bernoulli_direct(10, delta, T)


def test_out_of_table():
    with pytest.raises(OutOfTableError):
        expectation_bernoulli_direct(10**4 + 1, 0.5, T)


def test_caps_name_override_flag():
    with pytest.raises(ResourceLimitError, match="--cap"):
        variance_bernoulli_exact(2000, 0.5, T, cap=1000)
    with pytest.raises(ResourceLimitError):
        second_moment_uniform_k(6000, 10, build_prime_table(6000))


def test_reports():
    r = bernoulli_report(10, 0.3, T, with_variance=True)
    assert r.variance == pytest.approx(r.second_moment - r.expectation**2)
    assert list(r.as_row()) == ["n", "delta_or_k", "expectation", "second_moment", "variance", "method"]
    u = uniform_report(4, 2, T, second_moment=True)
    assert u.method == "pairwise" and u.variance > 0
    assert uniform_report(4, 2, T).second_moment is None


def test_make_report_clamps_tiny_negative_variance():
    r = make_report(5, 0.5, 2.0, 4.0 - 1e-13, "pairwise")
    assert r.variance == 0.0 and r.clamped
    with pytest.raises(ArithmeticError):
        make_report(5, 0.5, 2.0, 3.0, "pairwise")


def test_chernoff_bound_values():
    assert chernoff_bound(100, 20) == pytest.approx(2 / math.e)
    assert chernoff_bound(5, 0) == 2.0
    with pytest.raises(DomainError):
        chernoff_bound(0, 1)


def test_binomial_tail_values():
    assert binomial_tail_exact(10, 0.5, 11) == 0.0
    assert binomial_tail_exact(2, 0.5, 1) == pytest.approx(0.5)
    want = sum(math.comb(30, j) for j in range(31) if abs(j - 15) >= 3.5) / 2**30
    assert binomial_tail_exact(30, 0.5, 3.5) == pytest.approx(want, rel=1e-12)
    with pytest.raises(ResourceLimitError):
        binomial_tail_exact(10**5, 0.5, 3)


@pytest.mark.parametrize("n", range(1, 31))
def test_chernoff_dominates_tail(n):
    for delta in (0.2, 0.5, 0.8):
        k = round(n * delta)
        if k < 1 or abs(k - n * delta) > 1e-9:
            continue
        for r in range(1, k + 1):
            assert binomial_tail_exact(n, delta, r) <= chernoff_bound(k, r)


def test_transfer_gap():
    g = transfer_gap(4, 2, T)
    assert g.gap == pytest.approx(abs(expectation_bernoulli_direct(4, 0.5, T) - 1.473503), abs=1e-6)
    full = transfer_gap(50, 50, T)
    assert full.uniform == pytest.approx(chebyshev_psi(50, T))
    g2 = transfer_gap(12, 5, T, s=2)
    e2 = oracle.enumerate_uniform_k_moments(12, 5)[1]
    assert g2.uniform == pytest.approx(e2, abs=1e-9)
    assert g2.scaled == pytest.approx(g2.gap / (5**1.5 * math.log(12) ** 2.5))
    with pytest.raises(DomainError):
        transfer_gap(10, 2, T, s=3)
