"""Exact first and second moments of psi(A) for random subsets of {1..n}.

Everything rests on psi(A) = sum over prime powers m of Lambda(m) * I_A(m),
where I_A(m) says whether A contains a multiple of m.  Under independent
inclusion the miss probability of the q = n // m multiples of m is
(1 - delta)**q; for uniform size-k subsets it is C(n - q, k) / C(n, k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, OutOfTableError, ResourceLimitError
from .sieve import PrimeTable, chebyshev_psi

VARIANCE_CAP = 3 * 10**4
PAIR_CAP = 5000
BINOMIAL_TAIL_CAP = 10**4
GROUPED_TAIL = 1e-12
# exp(-800) underflows to zero, so the miss ratio is treated as 0 below it
_LOG_ZERO = -800.0
_CHUNK = 1 << 20


@dataclass(frozen=True)
class MomentReport:
    n: int
    delta_or_k: float
    expectation: float
    second_moment: Optional[float] = None
    variance: Optional[float] = None
    method: str = "direct"
    clamped: bool = False

    def as_row(self) -> dict:
        return {
            "n": self.n,
            "delta_or_k": self.delta_or_k,
            "expectation": self.expectation,
            "second_moment": self.second_moment,
            "variance": self.variance,
            "method": self.method,
        }


def _check_delta(delta):
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def _check_n(n, t):
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if n > t.limit:
        raise OutOfTableError(f"n={n} exceeds table limit {t.limit}")


def make_report(n, param, expectation, second_moment, method) -> MomentReport:
    """Assemble a report, clamping tiny negative variances to zero."""
    if second_moment is None:
        return MomentReport(n, param, expectation, None, None, method)
    var = second_moment - expectation * expectation
    clamped = False
    if var < 0:
        if var < -1e-9 * max(1.0, second_moment):
            raise ArithmeticError(f"negative variance {var}")
        var, clamped = 0.0, True
    return MomentReport(n, param, expectation, second_moment, var, method, clamped)


# -- independent inclusion ----------------------------------------------------


def _hit_prob(q, log_keep):
    """1 - (1 - delta)**q given log(1 - delta); q may be an array."""
    return -np.expm1(np.asarray(q, dtype=np.float64) * log_keep)


def _bernoulli_expectation(n: int, delta: float, t: PrimeTable) -> float:
    # accepts delta in [0, 1] for the transfer comparison at k = 0 or k = n
    if delta <= 0.0 or n < 2:
        return 0.0
    vals, logs, _ = t.prime_powers(n)
    if delta >= 1.0:
        return math.fsum(logs.tolist())
    w = _hit_prob(n // vals, math.log1p(-delta))
    return math.fsum((logs * w).tolist())


def expectation_bernoulli_direct(n: int, delta: float, t: PrimeTable) -> float:
    """sum over m <= n of Lambda(m) * (1 - (1 - delta)**(n // m))."""
    _check_delta(delta)
    _check_n(n, t)
    return _bernoulli_expectation(n, delta, t)


def expectation_bernoulli_grouped(
    n: int, delta: float, t: PrimeTable, tail: float = GROUPED_TAIL
) -> float:
    """delta * sum_{r >= 1} psi(n / r) * (1 - delta)**(r - 1).

    Stops at the first r where the bound psi(n) * (1 - delta)**r on the
    remaining terms drops below ``tail``, or where n / r < 2.
    """
    _check_delta(delta)
    _check_n(n, t)
    if n < 2:
        return 0.0
    psi_n = chebyshev_psi(n, t)
    log_keep = math.log1p(-delta)
    r_max = n // 2
    r_tail = math.ceil(math.log(tail / psi_n) / log_keep)
    r_max = max(1, min(r_max, r_tail))
    r = np.arange(1, r_max + 1, dtype=np.int64)
    weights = np.exp((r - 1) * log_keep)
    return delta * math.fsum((t.psi_many(n // r) * weights).tolist())


def pair_indicator_expectation(m: int, l: int, n: int, delta: float) -> float:
    """P(A has a multiple of m and a multiple of l) under S(n; delta)."""
    keep = 1.0 - delta
    qm, ql = n // m, n // l
    qg = n * math.gcd(m, l) // (m * l)
    return 1.0 - keep**qm - keep**ql + keep ** (qm + ql - qg)


def variance_bernoulli_exact(
    n: int, delta: float, t: PrimeTable, cap: int = VARIANCE_CAP
) -> float:
    """Exact Var psi(A) as a double sum over prime powers.

    Each pair contributes Lambda(m) Lambda(l) (1-delta)**(q_m + q_l - q_g)
    * (1 - (1-delta)**q_g) with q_g = n // lcm(m, l); pairs with lcm > n
    contribute nothing, so only those with lcm <= n are visited.
    """
    _check_delta(delta)
    _check_n(n, t)
    if n > cap:
        raise ResourceLimitError(
            f"exact variance at n={n} exceeds pairwise cap {cap}; use Monte Carlo (sample)",
            cap="variance cap",
            flag="--cap",
        )
    return _bernoulli_variance(n, delta, t)


def _bernoulli_variance(n, delta, t):
    if delta <= 0.0 or delta >= 1.0 or n < 2:
        return 0.0
    vals, logs, bases = t.prime_powers(n)
    log_keep = math.log1p(-delta)
    q = n // vals
    partial = []
    for i in range(vals.size):
        m, p = int(vals[i]), int(bases[i])
        end = np.searchsorted(vals, n // m, side="right")
        other = bases[:end] != p
        js = np.flatnonzero(other)
        # same-prime partners: lcm is the larger power
        same = np.flatnonzero(bases == p)
        lcm = np.concatenate((vals[js] * m, np.maximum(vals[same], m)))
        idx = np.concatenate((js, same))
        qg = n // lcm
        expo = q[i] + q[idx] - qg
        cov = np.exp(expo * log_keep) * _hit_prob(qg, log_keep)
        partial.append(logs[i] * math.fsum((logs[idx] * cov).tolist()))
    return math.fsum(partial)


def bernoulli_report(n, delta, t, method="direct", with_variance=False, cap=VARIANCE_CAP):
    if method == "direct":
        e = expectation_bernoulli_direct(n, delta, t)
    elif method == "grouped":
        e = expectation_bernoulli_grouped(n, delta, t)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not with_variance:
        return make_report(n, delta, e, None, method)
    v = variance_bernoulli_exact(n, delta, t, cap)
    return MomentReport(n, delta, e, v + e * e, v, "pairwise")


# -- uniform size-k subsets ---------------------------------------------------


def log_miss_ratio(n: int, k: int, qs) -> np.ndarray:
    """log(C(n - q, k) / C(n, k)) for each q in ``qs``; -inf once n - q < k.

    Built as running sums of log(1 - k / (n - i)) for i < q, chunked so
    memory stays bounded, and abandoned once the ratio underflows.
    """
    qs = np.asarray(qs, dtype=np.int64)
    out = np.full(qs.shape, -np.inf)
    out[qs == 0] = 0.0
    if k == 0:
        out[:] = 0.0
        return out
    top = min(int(qs.max(initial=0)), n - k)
    running = 0.0
    for lo in range(0, top, _CHUNK):
        hi = min(lo + _CHUNK, top)
        i = np.arange(lo, hi, dtype=np.float64)
        c = running + np.cumsum(np.log1p(-k / (n - i)))
        sel = (qs > lo) & (qs <= hi)
        out[sel] = c[qs[sel] - lo - 1]
        running = float(c[-1])
        if running < _LOG_ZERO:
            break
    return out


def _check_k(n, k):
    if not 0 <= k <= n:
        raise DomainError(f"k must lie in [0, n], got k={k}, n={n}")


def expectation_uniform_k(n: int, k: int, t: PrimeTable, method: str = "auto") -> float:
    """Mean of psi over all size-k subsets of {1..n}.

    ``direct`` sums over every prime power m <= n; ``breakpoint`` groups the
    m > sqrt(n) by q = n // m and reads psi at the O(sqrt n) breakpoints,
    which is what makes segmented tables usable.  ``auto`` picks direct on
    full-resolution tables.
    """
    _check_n(n, t)
    _check_k(n, k)
    if k == 0 or n < 2:
        return 0.0
    if k == n:
        return chebyshev_psi(n, t)
    if method == "auto":
        method = "direct" if t.is_full_resolution else "breakpoint"
    if method == "direct":
        vals, logs, _ = t.prime_powers(n)
        hit = -np.expm1(log_miss_ratio(n, k, n // vals))
        return math.fsum((logs * hit).tolist())
    if method != "breakpoint":
        raise ValueError(f"unknown method {method!r}")
    s = math.isqrt(n)
    vals, logs, _ = t.prime_powers(s) if s >= 2 else (np.zeros(0, np.int64), np.zeros(0), None)
    head = logs * -np.expm1(log_miss_ratio(n, k, n // vals))
    qtop = n // (s + 1)
    q = np.arange(1, qtop + 1, dtype=np.int64)
    upper = n // q
    lower = np.maximum(n // (q + 1), s)
    psi = t.psi_many(np.concatenate((upper, lower)))
    mass = psi[: q.size] - psi[q.size :]
    tail = mass * -np.expm1(log_miss_ratio(n, k, q))
    return math.fsum(head.tolist()) + math.fsum(tail.tolist())


def second_moment_uniform_k(n: int, k: int, t: PrimeTable, cap: int = PAIR_CAP) -> float:
    """Mean of psi**2 over all size-k subsets of {1..n}.

    Written as (mean psi)**2 + sum Lambda(m) Lambda(l) [R(q_m + q_l - q_g)
    - R(q_m) R(q_l)] with R the hypergeometric miss ratio, which avoids
    cancelling two large near-equal sums.
    """
    _check_n(n, t)
    _check_k(n, k)
    if n > cap:
        raise ResourceLimitError(
            f"uniform second moment at n={n} exceeds pairwise cap {cap}",
            cap="pair cap",
            flag="--cap",
        )
    if k == 0 or n < 2:
        return 0.0
    vals, logs, bases = t.prime_powers(n)
    log_r = log_miss_ratio(n, k, np.arange(n + 1))
    q = n // vals
    lq = log_r[q]
    first = math.fsum((logs * -np.expm1(lq)).tolist())
    partial = []
    for i in range(vals.size):
        same = bases == bases[i]
        lcm = np.where(same, np.maximum(vals, vals[i]), vals * vals[i])
        qg = n // lcm
        union = q[i] + q - qg
        d = np.exp(log_r[union]) - np.exp(lq[i] + lq)
        partial.append(logs[i] * math.fsum((logs * d).tolist()))
    return first * first + math.fsum(partial)


def uniform_report(n, k, t, second_moment=False, cap=PAIR_CAP, method="auto"):
    e = expectation_uniform_k(n, k, t, method)
    if not second_moment:
        used = method if method != "auto" else ("direct" if t.is_full_resolution else "breakpoint")
        return make_report(n, k, e, None, used)
    return make_report(n, k, e, second_moment_uniform_k(n, k, t, cap), "pairwise")


# -- inequalities ---------------------------------------------------------------


def chernoff_bound(k: float, r: float) -> float:
    """2 exp(-r**2 / (4k))."""
    if k <= 0:
        raise DomainError("k must be positive")
    if r < 0:
        raise DomainError("r must be non-negative")
    return 2.0 * math.exp(-r * r / (4.0 * k))


def binomial_tail_exact(n: int, delta: float, r: float, cap: int = BINOMIAL_TAIL_CAP) -> float:
    """P(| |A| - n delta | >= r) with |A| ~ Binomial(n, delta).

    Boundary terms with |j - n delta| within 1e-9 of r are included, so
    the value never undershoots the true tail because of rounding in n*delta.
    """
    if n > cap:
        raise ResourceLimitError(
            f"exact binomial tail at n={n} exceeds cap {cap}", cap="binomial tail cap", flag="--cap"
        )
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta}")
    j = np.arange(n + 1, dtype=np.float64)
    center = n * delta
    sel = np.abs(j - center) >= r - 1e-9
    if not sel.any():
        return 0.0
    js = j[sel]
    log_c = gammaln(n + 1) - gammaln(js + 1) - gammaln(n - js + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_p = log_c + js * np.log(delta) + (n - js) * np.log1p(-delta)
    log_p = np.where((js == 0) & (delta == 0.0), 0.0, log_p)
    log_p = np.where((js == n) & (delta == 1.0), 0.0, log_p)
    return min(1.0, math.fsum(np.exp(log_p).tolist()))


@dataclass(frozen=True)
class TransferGap:
    n: int
    k: int
    s: int
    bernoulli: float
    uniform: float
    gap: float
    normalizer: float

    @property
    def scaled(self) -> float:
        return self.gap / self.normalizer if self.normalizer > 0 else math.nan


def transfer_gap(n: int, k: int, t: PrimeTable, s: int = 1) -> TransferGap:
    """|E psi**s in S(n; k/n) - mean of psi**s over size-k subsets|.

    Reported next to the scale k**(s - 1/2) * log(n)**(s + 1/2).
    """
    if s not in (1, 2):
        raise DomainError("s must be 1 or 2")
    _check_n(n, t)
    _check_k(n, k)
    delta = k / n
    e1 = _bernoulli_expectation(n, delta, t)
    if s == 1:
        bern = e1
        unif = expectation_uniform_k(n, k, t)
    else:
        if n > VARIANCE_CAP:
            raise ResourceLimitError(
                f"second-moment transfer at n={n} exceeds variance cap {VARIANCE_CAP}",
                cap="variance cap",
                flag="--cap",
            )
        bern = _bernoulli_variance(n, delta, t) + e1 * e1
        unif = second_moment_uniform_k(n, k, t)
    norm = k ** (s - 0.5) * math.log(n) ** (s + 0.5) if n > 1 else 0.0
    return TransferGap(n, k, s, bern, unif, abs(bern - unif), norm)
