"""Brute-force ground truth over every subset of {1..n}, for small n.

Subsets are bitmasks (bit i <-> element i + 1).  The lcm of every subset is
built with integer arithmetic by doubling (lcm[mask | bit] = lcm(lcm[mask],
element)), and psi is its logarithm, so nothing here goes through the
von Mangoldt machinery the exact formulas use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ResourceLimitError

MAX_BERNOULLI_N = 20
MAX_UNIFORM_N = 18
MAX_SUBSETS = 10**6


@lru_cache(maxsize=8)
def _subset_tables(n: int):
    lcm = np.ones(1, dtype=np.int64)
    size = np.zeros(1, dtype=np.int64)
    for i in range(n):
        lcm = np.concatenate((lcm, np.lcm(lcm, i + 1)))
        size = np.concatenate((size, size + 1))
    lcm.flags.writeable = False
    size.flags.writeable = False
    return lcm, size


def subset_psi(n: int):
    """(psi, |A|, lcm) arrays indexed by bitmask over all 2**n subsets."""
    lcm, size = _subset_tables(n)
    return np.log(lcm.astype(np.float64)), size, lcm


def _guard_n(n, cap):
    if not 0 <= n <= cap:
        raise ResourceLimitError(f"exhaustive enumeration needs n <= {cap}, got {n}", cap="oracle n")


def _guard_k(n, k):
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, n], got k={k}, n={n}")
    if math.comb(n, k) > MAX_SUBSETS:
        raise ResourceLimitError(
            f"C({n},{k}) exceeds {MAX_SUBSETS} subsets", cap="oracle subsets"
        )


def bernoulli_weights(n: int, delta: float) -> np.ndarray:
    _, size = _subset_tables(n)
    return np.exp(size * math.log(delta) + (n - size) * math.log1p(-delta))


def enumerate_bernoulli_moments(n: int, delta: float) -> tuple[float, float]:
    """(E psi, Var psi) under S(n; delta) by summing over all 2**n subsets."""
    _guard_n(n, MAX_BERNOULLI_N)
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    psi, _, _ = subset_psi(n)
    w = bernoulli_weights(n, delta)
    mean = math.fsum((w * psi).tolist())
    var = math.fsum((w * (psi - mean) ** 2).tolist())
    return mean, var


def enumerate_uniform_k_moments(n: int, k: int) -> tuple[float, float]:
    """(mean psi, mean psi**2) over all size-k subsets."""
    _guard_n(n, MAX_UNIFORM_N)
    _guard_k(n, k)
    psi, size, _ = subset_psi(n)
    sel = psi[size == k]
    return math.fsum(sel.tolist()) / sel.size, math.fsum((sel * sel).tolist()) / sel.size


def uniform_moment_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean psi and mean psi**2 for every k in 0..n at once."""
    _guard_n(n, MAX_UNIFORM_N)
    psi, size, _ = subset_psi(n)
    m1 = np.zeros(n + 1)
    m2 = np.zeros(n + 1)
    for k in range(n + 1):
        sel = psi[size == k]
        m1[k] = math.fsum(sel.tolist()) / sel.size
        m2[k] = math.fsum((sel * sel).tolist()) / sel.size
    return m1, m2


def _mask_to_set(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


@dataclass(frozen=True)
class ExtremalResult:
    min_psi: float
    argmin: tuple
    max_psi: float
    argmax: tuple


def extremal_psi_exhaustive(n: int, k: int) -> ExtremalResult:
    """Exact min and max of psi over size-k subsets.

    Ties are compared on the integer lcm and broken by the lexicographically
    smallest sorted witness.
    """
    _guard_n(n, MAX_UNIFORM_N)
    _guard_k(n, k)
    _, size, lcm = subset_psi(n)
    masks = np.flatnonzero(size == k)
    vals = lcm[masks]

    def pick(target):
        return min(_mask_to_set(int(m)) for m in masks[vals == target])

    lo, hi = vals.min(), vals.max()
    return ExtremalResult(math.log(int(lo)), pick(lo), math.log(int(hi)), pick(hi))
