"""Sets of prescribed size with small or large psi, and smooth-number counts.

Small psi: the k smallest y-smooth integers, y the least prime with at
least k y-smooth integers up to n.  Large psi: the k largest primes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, OutOfTableError
from .psi_core import IntegerSet
from .sieve import PrimeTable, largest_prime_factors


@dataclass(frozen=True)
class SmoothSetSpec:
    n: int
    k: int
    y: int
    t_effective: float


def _primes_upto(y, t: PrimeTable) -> list[int]:
    if y > t.limit:
        raise OutOfTableError(f"smoothness bound {y} exceeds table limit {t.limit}")
    return t.primes[: np.searchsorted(t.primes, y, side="right")].tolist()


def smooth_count_dfs(x: int, primes: list[int]) -> int:
    """Count integers <= x whose prime factors all lie in ``primes``.

    ``primes`` must be every prime up to some bound, ascending.

    Splits by the largest prime factor p_j: 1 + sum over j and e >= 1 of
    Psi(x // p_j**e; primes below p_j).  Recursion depth is bounded by the
    number of distinct prime factors, not by the number of primes.
    """
    primes = tuple(primes)
    arr = np.asarray(primes, dtype=np.int64)

    @lru_cache(maxsize=None)
    def count(x, i):
        # integers <= x built from primes[:i]
        if x < 2 or i == 0:
            return 1 if x >= 1 else 0
        if primes[i - 1] >= x:
            return x
        total = 1
        for j in range(i):
            p = primes[j]
            if p > x:
                break
            pe = p
            while pe <= x:
                total += count(x // pe, min(j, int(np.searchsorted(arr, x // pe, side="right"))))
                pe *= p
        return total

    return count(int(x), len(primes))


def smooth_count(x: int, y: float, t: PrimeTable, method: str = "auto") -> int:
    """Psi(x; y): integers m <= x with every prime factor <= y (1 counts)."""
    if x < 1:
        return 0
    if y >= x:
        return int(x)
    if y < 2:
        return 1
    if method == "auto":
        method = "gpf" if t.is_full_resolution and x <= t.limit else "dfs"
    if method == "gpf":
        if x > t.spf_limit:
            raise OutOfTableError(f"x={x} exceeds spf range {t.spf_limit}")
        gpf = largest_prime_factors(t)
        return int(np.count_nonzero(gpf[1 : x + 1] <= y))
    return smooth_count_dfs(int(x), _primes_upto(int(y), t))


def smooth_numbers(x: int, primes: list[int]) -> list[int]:
    """All integers <= x built from ``primes``, ascending."""
    out = [1]
    for p in primes:
        grown = []
        for m in out:
            m *= p
            while m <= x:
                grown.append(m)
                m *= p
        out += grown
    out.sort()
    return out


def build_smooth_set(n: int, k: int, t: PrimeTable) -> tuple[IntegerSet, SmoothSetSpec]:
    """The k smallest y-smooth integers in [1, n], y the least adequate prime."""
    if not 0 <= k <= n:
        raise DomainError(f"k must lie in [0, n], got k={k}, n={n}")
    if n > t.limit:
        raise OutOfTableError(f"n={n} exceeds table limit {t.limit}")
    if k <= 1:
        y = 2
        elems = [1][:k]
    elif t.is_full_resolution:
        gpf = largest_prime_factors(t)[1 : n + 1]
        y = max(2, int(np.partition(gpf, k - 1)[k - 1]))
        elems = (np.flatnonzero(gpf <= y)[:k] + 1).tolist()
    else:
        primes = _primes_upto(n, t)
        lo, hi = 0, len(primes) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if smooth_count_dfs(n, primes[: mid + 1]) >= k:
                hi = mid
            else:
                lo = mid + 1
        y = primes[lo]
        elems = smooth_numbers(n, primes[: lo + 1])[:k]
    loglog = math.log(math.log(n)) if n >= 3 else math.nan
    t_eff = math.log(y) / loglog if loglog > 0 else math.nan
    return IntegerSet.from_iterable(elems, n), SmoothSetSpec(n, k, y, t_eff)


def psi_smooth_closed_form(n: int, y: float, t: PrimeTable) -> float:
    """psi of all y-smooth integers <= n: sum over p <= y of e_p log p,
    e_p the largest exponent with p**e_p <= n."""
    if y < 2 or n < 2:
        return 0.0
    terms = []
    for p in _primes_upto(int(min(y, n)), t):
        e, pe = 0, p
        while pe <= n:
            e += 1
            pe *= p
        terms.append(e * math.log(p))
    return math.fsum(terms)


def build_prime_tail_set(n: int, k: int, t: PrimeTable) -> IntegerSet:
    """The k largest primes <= n; past pi(n), all primes plus the largest
    non-primes."""
    if not 0 <= k <= n:
        raise DomainError(f"k must lie in [0, n], got k={k}, n={n}")
    if n > t.limit:
        raise OutOfTableError(f"n={n} exceeds table limit {t.limit}")
    primes = t.primes[: np.searchsorted(t.primes, n, side="right")]
    if k <= primes.size:
        return IntegerSet(n, primes[primes.size - k :].copy())
    is_prime = np.zeros(n + 1, dtype=bool)
    is_prime[primes] = True
    others = np.flatnonzero(~is_prime[1:]) + 1
    pad = others[others.size - (k - primes.size) :]
    return IntegerSet.from_array(np.concatenate((primes, pad)), n)


def extremal_bounds(n: int, theta: float, c: float) -> tuple[float, float]:
    """Reference curves (c n**theta log n, (log n)**(2 + theta / (1 - theta)))
    with the o(1) terms dropped."""
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    if c <= 0:
        raise DomainError("c must be positive")
    L = math.log(n)
    return c * n**theta * L, L ** (2 + theta / (1 - theta))


def cep_prediction(x: float, y: float) -> float:
    """x * u**(-u) with u = log x / log y."""
    if y < 2 or x < y:
        raise DomainError(f"need y >= 2 and x >= y, got x={x}, y={y}")
    u = math.log(x) / math.log(y)
    return x * u ** (-u)


def smooth_exponent(n: int, t_exp: float, t: PrimeTable) -> float:
    """log Psi(n; (log n)**t_exp) / log n."""
    y = math.log(n) ** t_exp
    return math.log(smooth_count(n, y, t)) / math.log(n)
