"""Random subsets of {1..n}: independent inclusion with probability delta
(S(n; delta)) and uniformly random subsets of fixed size k.

Every trial draws from its own counter-based stream keyed by
(seed, trial_index), so results do not depend on scheduling or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import OutOfTableError
from .psi_core import IntegerSet, psi_of_set
from .sieve import PrimeTable

DEFAULT_QUANTILES = (0.05, 0.5, 0.95)


@dataclass(frozen=True)
class BernoulliModel:
    n: int
    delta: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class UniformKModel:
    n: int
    k: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"k must lie in [0, n], got k={self.k}, n={self.n}")


Model = Union[BernoulliModel, UniformKModel]


@dataclass(frozen=True)
class SampleStats:
    trials: int
    mean_psi: float
    var_psi: float
    mean_size: float
    quantiles: tuple
    degenerate: bool = False

    def as_row(self) -> dict:
        row = {
            "trials": self.trials,
            "mean_psi": self.mean_psi,
            "var_psi": self.var_psi,
            "mean_size": self.mean_size,
        }
        for level, value in self.quantiles:
            row[f"q{level:g}"] = value
        row["degenerate"] = int(self.degenerate)
        return row


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(trial_index),)))
    )


def sample_bernoulli(m: BernoulliModel, seed: int, trial_index: int) -> IntegerSet:
    """Include each of 1..n independently with probability delta.

    Walks geometric gaps between successive members, so the expected work is
    O(n * delta) rather than n coin flips.
    """
    rng = trial_rng(seed, trial_index)
    n, delta = m.n, m.delta
    mean = n * delta
    batch = int(mean + 5.0 * math.sqrt(mean) + 16)
    chunks = []
    pos = 0
    while pos <= n:
        pts = pos + np.cumsum(rng.geometric(delta, size=batch))
        chunks.append(pts[pts <= n])
        pos = int(pts[-1])
    arr = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    return IntegerSet(n, arr.astype(np.int64))


def sample_uniform_k(m: UniformKModel, seed: int, trial_index: int) -> IntegerSet:
    """Uniform size-k subset by a partial Fisher-Yates shuffle on a sparse swap map."""
    rng = trial_rng(seed, trial_index)
    n, k = m.n, m.k
    if k == 0:
        return IntegerSet(n, np.zeros(0, dtype=np.int64))
    picks = rng.integers(np.arange(k), n)
    swapped: dict[int, int] = {}
    out = np.empty(k, dtype=np.int64)
    for i, j in enumerate(picks.tolist()):
        vi = swapped.get(i, i)
        out[i] = swapped.get(j, j)
        swapped[j] = vi
    out += 1
    out.sort()
    return IntegerSet(n, out)


def sample(m: Model, seed: int, trial_index: int) -> IntegerSet:
    if isinstance(m, BernoulliModel):
        return sample_bernoulli(m, seed, trial_index)
    return sample_uniform_k(m, seed, trial_index)


def run_trials(m: Model, trials: int, seed: int, t: PrimeTable, threads: int = 1):
    """psi and |A| for trials 0..trials-1, in trial order."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if m.n > t.limit:
        raise OutOfTableError(f"n={m.n} exceeds table limit {t.limit}")

    def one(i):
        A = sample(m, seed, i)
        return psi_of_set(A, t), len(A)

    if threads == 1:
        results = [one(i) for i in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            results = list(pool.map(one, range(trials)))
    psis = np.array([r[0] for r in results], dtype=np.float64)
    sizes = np.array([r[1] for r in results], dtype=np.int64)
    return psis, sizes


def summarize(psis: np.ndarray, sizes: np.ndarray, levels=DEFAULT_QUANTILES) -> SampleStats:
    trials = len(psis)
    mean = math.fsum(psis.tolist()) / trials
    if trials > 1:
        var = math.fsum(((psis - mean) ** 2).tolist()) / (trials - 1)
    else:
        var = 0.0
    qs = tuple((float(lv), float(np.quantile(psis, lv))) for lv in levels)
    return SampleStats(
        trials=trials,
        mean_psi=mean,
        var_psi=var,
        mean_size=float(sizes.mean()),
        quantiles=qs,
        degenerate=trials == 1,
    )


def montecarlo_psi(
    m: Model,
    trials: int,
    seed: int,
    t: PrimeTable,
    threads: int = 1,
    levels=DEFAULT_QUANTILES,
) -> SampleStats:
    levels = tuple(levels)
    if any(not 0 < lv < 1 for lv in levels) or any(a >= b for a, b in zip(levels, levels[1:])):
        raise ValueError("quantile levels must be strictly increasing in (0, 1)")
    psis, sizes = run_trials(m, trials, seed, t, threads)
    return summarize(psis, sizes, levels)
