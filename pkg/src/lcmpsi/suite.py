"""Acceptance grid: each check returns a CheckResult and runs under a time budget.

``quick`` trims the largest grids (n up to 10^5 in the identity grid, a
smaller variance grid, fewer Monte Carlo trials) and keeps every check
that is already cheap at full size.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .asymptotics import RegimeParams, predict_mean
from .extremal import (
    build_prime_tail_set,
    build_smooth_set,
    smooth_count,
    smooth_count_dfs,
)
from .moments import (
    binomial_tail_exact,
    chernoff_bound,
    expectation_bernoulli_direct,
    expectation_bernoulli_grouped,
    expectation_uniform_k,
    second_moment_uniform_k,
    variance_bernoulli_exact,
)
from .poly import (
    B_X2_PLUS_1,
    IntPolynomial,
    estimate_B_constant,
    poly_set,
    predict_quadratic_irreducible,
    predict_reducible_x2m1,
)
from .psi_core import psi_of_set
from .random_models import BernoulliModel, UniformKModel, run_trials
from .sieve import PrimeTable, build_prime_table, chebyshev_psi

SCALES = ("quick", "full")
ORACLE_N = 14


@dataclass
class CheckResult:
    number: int
    name: str
    status: str  # "pass", "fail" or "warn"
    detail: str
    seconds: float = 0.0
    budget: float | None = None

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def line(self) -> str:
        budget = f"/{self.budget:.0f}s" if self.budget else ""
        return (
            f"{self.status.upper():4} [{self.number:2d}] {self.name}: {self.detail} "
            f"({self.seconds:.1f}s{budget})"
        )


@dataclass
class Tables:
    """Prime tables shared across checks, built on first use."""

    _cache: dict = field(default_factory=dict)

    def get(self, limit: int) -> PrimeTable:
        if limit not in self._cache:
            self._cache[limit] = build_prime_table(limit)
        return self._cache[limit]


# -- individual checks --------------------------------------------------------
# Each returns (ok, detail); ``ok`` is True, False or None (None = soft miss).


def check_oracle_equivalence(tables: Tables, scale: str):
    t = tables.get(100)
    worst_e = worst_v = worst_m1 = worst_m2 = 0.0
    for n in range(1, ORACLE_N + 1):
        for delta in (0.1, 0.25, 0.5, 0.9):
            e_o, v_o = oracle.enumerate_bernoulli_moments(n, delta)
            worst_e = max(worst_e, abs(expectation_bernoulli_direct(n, delta, t) - e_o))
            worst_v = max(worst_v, abs(variance_bernoulli_exact(n, delta, t) - v_o))
        m1, m2 = oracle.uniform_moment_table(n)
        for k in range(n + 1):
            worst_m1 = max(worst_m1, abs(expectation_uniform_k(n, k, t) - m1[k]))
            worst_m2 = max(worst_m2, abs(second_moment_uniform_k(n, k, t) - m2[k]))
    worst = max(worst_e, worst_v, worst_m1, worst_m2)
    detail = (
        f"max abs err E={worst_e:.2e} Var={worst_v:.2e} "
        f"mean_k={worst_m1:.2e} second_k={worst_m2:.2e} (tol 1e-9)"
    )
    return worst <= 1e-9, detail


def check_grouped_identity(tables: Tables, scale: str):
    top = 6 if scale == "full" else 5
    t = tables.get(10**top)
    worst, where = 0.0, None
    for e in range(2, top + 1):
        n = 10**e
        for delta in (0.5, 0.1, n**-0.5, 10 / n):
            d = expectation_bernoulli_direct(n, delta, t)
            g = expectation_bernoulli_grouped(n, delta, t)
            rel = abs(g - d) / d
            if rel >= worst:
                worst, where = rel, (n, delta)
    return worst <= 1e-9, f"max rel diff {worst:.2e} at n={where[0]}, delta={where[1]:.3g} (tol 1e-9)"


def check_monotone_moments(tables: Tables, scale: str):
    # for j <= k: m_s(j) <= m_s(k) <= m_s(j) + (k^s - j^s) log^s n
    slack = 1e-12
    violations = 0
    worst = -math.inf
    checked = 0
    for n in range(1, ORACLE_N + 1):
        m1, m2 = oracle.uniform_moment_table(n)
        L = math.log(n)
        for s, m in ((1, m1), (2, m2)):
            for k in range(n + 1):
                for j in range(k + 1):
                    low = m[j] - m[k]
                    high = m[k] - m[j] - (k**s - j**s) * L**s
                    worst = max(worst, low, high)
                    violations += low > slack or high > slack
                    checked += 1
    return violations == 0, f"{checked} (n, j, k, s) cases, {violations} violations, worst margin {worst:.2e}"


def check_chernoff(tables: Tables, scale: str):
    checked = violations = 0
    worst_ratio = 0.0
    for n in range(1, 31):
        for delta in (0.2, 0.5, 0.8):
            k = round(n * delta)
            if abs(k - n * delta) > 1e-9 or k < 1:
                continue
            for r in np.arange(1.0, k + 0.25, 0.5):
                tail = binomial_tail_exact(n, k / n, r)
                bound = chernoff_bound(k, r)
                worst_ratio = max(worst_ratio, tail / bound)
                violations += tail > bound
                checked += 1
    return violations == 0, f"{checked} (n, k, r) cases, max tail/bound {worst_ratio:.3f}"


def check_variance_envelope(tables: Tables, scale: str):
    ns = (10**3, 10**4, 3 * 10**4) if scale == "full" else (10**3, 10**4)
    t = tables.get(max(ns))
    worst = 0.0
    for n in ns:
        for delta in (n**-0.5, n**-0.25, 0.1):
            v = variance_bernoulli_exact(n, delta, t)
            worst = max(worst, v / (4 * delta * n * math.log(n) ** 2))
    return worst <= 1.0, f"max Var / (4 delta n log^2 n) = {worst:.4f}"


def check_half_density_mean(tables: Tables, scale: str):
    n = 10**6
    e = expectation_bernoulli_grouped(n, 0.5, tables.get(n))
    ratio = e / (n * math.log(2))
    return abs(ratio - 1) <= 0.02, f"E/(n log 2) = {ratio:.6f} (band 1 +- 0.02)"


def check_uniform_mean(tables: Tables, scale: str):
    t = tables.get(10**6)
    a = expectation_uniform_k(10**6, 10**3, t)
    pa = predict_mean(RegimeParams(10**6, 0.5, 1.0))
    b = expectation_uniform_k(10**5, 5 * 10**4, t)
    pb = predict_mean(RegimeParams(10**5, 1.0, 0.5))
    ra, rb = a / pa, b / pb
    ok = abs(ra - 1) <= 0.10 and abs(rb - 1) <= 0.02
    return ok, f"theta=1/2 ratio {ra:.5f} (band 0.10); theta=1 ratio {rb:.5f} (band 0.02)"


def check_concentration(tables: Tables, scale: str, seed: int = 0, threads: int = 1):
    trials = 200 if scale == "full" else 50
    n, delta = 10**5, 1e-2
    t = tables.get(10**6)
    exact = expectation_bernoulli_direct(n, delta, t)
    psis, _ = run_trials(BernoulliModel(n, delta), trials, seed, t, threads)
    radius = 4 * math.sqrt(4 * delta * n * math.log(n) ** 2 / trials)
    dev = abs(psis.mean() - exact)
    ok_a = dev <= radius

    n2, k2 = 10**6, 10**3
    exact2 = expectation_uniform_k(n2, k2, t)
    psis2, _ = run_trials(UniformKModel(n2, k2), trials, seed, t, threads)
    frac = float(np.mean(np.abs(psis2 - exact2) <= 0.10 * exact2))
    ok_b = frac >= 0.95
    detail = (
        f"{trials} trials; bernoulli |mean - E| = {dev:.2f} (radius {radius:.2f}); "
        f"uniform-k fraction within 10% = {frac:.3f} (need 0.95)"
    )
    return ok_a and ok_b, detail


def check_extremal(tables: Tables, scale: str):
    n = 10**6
    t = tables.get(n)
    L = math.log(n)
    worst_tail = math.inf
    for delta in (1e-3, 1e-2, 0.5):
        k = round(delta * n)
        psi = psi_of_set(build_prime_tail_set(n, k, t), t)
        worst_tail = min(worst_tail, psi / (0.9 * n * min(1.0, delta * L)))
    k = math.isqrt(n)
    A, spec = build_smooth_set(n, k, t)
    smooth_ratio = psi_of_set(A, t) / L**3.5

    small = tables.get(100)
    misses = 0
    for m in range(1, ORACLE_N + 1):
        for j in range(m + 1):
            ex = oracle.extremal_psi_exhaustive(m, j)
            for B in (build_smooth_set(m, j, small)[0], build_prime_tail_set(m, j, small)):
                v = psi_of_set(B, small)
                misses += not ex.min_psi - 1e-12 <= v <= ex.max_psi + 1e-12
    ok = worst_tail >= 1 and smooth_ratio <= 1 and misses == 0
    detail = (
        f"min psi(tail)/(0.9 n min(1, delta log n)) = {worst_tail:.4f}; "
        f"psi(smooth, k={k}, y={spec.y})/(log n)^3.5 = {smooth_ratio:.5f}; "
        f"{misses} bracket misses for n <= {ORACLE_N}"
    )
    return ok, detail


def check_poly_contrast(tables: Tables, scale: str):
    n = 10**8
    t = tables.get(n)
    irr = IntPolynomial((1, 0, 1))
    red = IntPolynomial((-1, 0, 1))
    r_irr = psi_of_set(poly_set(irr, n), t) / predict_quadratic_irreducible(irr, n, B_X2_PLUS_1)
    r_red = psi_of_set(poly_set(red, n), t) / predict_reducible_x2m1(n)
    small = tables.get(10**6)
    lin = psi_of_set(poly_set(IntPolynomial((0, 1)), 10**6), small)
    lin_err = abs(lin - chebyshev_psi(10**6, small))
    ok = 0.95 <= r_irr <= 1.05 and 0.6 <= r_red <= 1.4 and lin_err <= 1e-9
    detail = (
        f"x^2+1 ratio {r_irr:.5f} [0.95, 1.05]; x^2-1 ratio {r_red:.5f} [0.6, 1.4]; "
        f"|psi_f(x) - psi(10^6)| = {lin_err:.1e}"
    )
    return ok, detail


def check_smooth_scaling(tables: Tables, scale: str):
    n = 10**7
    t = tables.get(n)
    y = math.log(n) ** 2
    count = smooth_count(n, y, t, method="gpf")
    primes = t.primes[: np.searchsorted(t.primes, y, side="right")].tolist()
    agree = smooth_count_dfs(n, primes) == count
    exponent = math.log(count) / math.log(n)
    ok = agree and 0.40 <= exponent <= 0.60
    return ok, (
        f"Psi(10^7; {y:.1f}) = {count} (two methods {'agree' if agree else 'DISAGREE'}); "
        f"exponent {exponent:.4f} (band [0.40, 0.60])"
    )


def check_B_estimate(tables: Tables, scale: str):
    P = 10**8
    est = estimate_B_constant(P, tables.get(P))
    gap = est.value - B_X2_PLUS_1
    detail = f"B({P}) = {est.value:.6f}, offset {gap:+.6f} (band 0.05), last dyadic block {est.last_block_increment:+.2e}"
    return (True if abs(gap) <= 0.05 else None), detail


@dataclass(frozen=True)
class Check:
    number: int
    name: str
    run: object
    budget: float | None = None
    soft: bool = False


CHECKS = (
    Check(1, "oracle equivalence", check_oracle_equivalence, 60),
    Check(2, "direct vs grouped expectation", check_grouped_identity, 60),
    Check(3, "moment monotonicity", check_monotone_moments),
    Check(4, "Chernoff tail", check_chernoff),
    Check(5, "variance envelope", check_variance_envelope),
    Check(6, "half-density mean", check_half_density_mean, 60),
    Check(7, "uniform-k mean", check_uniform_mean, 300),
    Check(8, "concentration", check_concentration),
    Check(9, "extremal constructions", check_extremal),
    Check(10, "polynomial contrast", check_poly_contrast, 600),
    Check(11, "smooth-count scaling", check_smooth_scaling),
    Check(12, "B constant truncation", check_B_estimate, soft=True),
)


def run_check(check: Check, tables: Tables, scale: str = "full") -> CheckResult:
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {SCALES}")
    start = time.perf_counter()
    try:
        ok, detail = check.run(tables, scale)
    except Exception as exc:  # a crash is a failure, reported rather than raised
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    seconds = time.perf_counter() - start
    if ok and check.budget is not None and seconds > check.budget:
        ok, detail = False, f"{detail}; over time budget"
    if ok is None:
        status = "warn" if check.soft else "fail"
    else:
        status = "pass" if ok else "fail"
    return CheckResult(check.number, check.name, status, detail, seconds, check.budget)


def run_suite(scale: str = "full", only=None, tables: Tables | None = None):
    tables = tables or Tables()
    picked = [c for c in CHECKS if only is None or c.number in only]
    return [run_check(c, tables, scale) for c in picked]
