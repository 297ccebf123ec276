"""Finite integer sets and psi(A) = log lcm(A), computed two ways."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import OutOfTableError, ResourceLimitError
from .sieve import PrimeTable

DEFAULT_DIGIT_CAP = 10**4


@dataclass(frozen=True, eq=False)
class IntegerSet:
    """Distinct integers in [1, n], stored ascending as a read-only array."""

    n: int
    elements: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"ambient bound n must be positive, got {self.n}")
        self.elements.flags.writeable = False

    @classmethod
    def from_iterable(cls, values: Iterable[int], n: int) -> "IntegerSet":
        """Deduplicate and sort; anything outside [1, n] is an error."""
        arr = np.unique(np.fromiter((int(v) for v in values), dtype=np.int64))
        if arr.size and (arr[0] < 1 or arr[-1] > n):
            bad = arr[0] if arr[0] < 1 else arr[-1]
            raise ValueError(f"element {bad} outside [1, {n}]")
        return cls(n, arr)

    @classmethod
    def from_array(cls, arr: np.ndarray, n: int) -> "IntegerSet":
        arr = np.unique(np.asarray(arr, dtype=np.int64))
        if arr.size and (arr[0] < 1 or arr[-1] > n):
            raise ValueError(f"elements outside [1, {n}]")
        return cls(n, arr)

    @classmethod
    def full(cls, n: int) -> "IntegerSet":
        return cls(n, np.arange(1, n + 1, dtype=np.int64))

    def __len__(self):
        return int(self.elements.size)

    def __iter__(self):
        return iter(self.elements.tolist())

    def __contains__(self, a):
        i = np.searchsorted(self.elements, a)
        return bool(i < self.elements.size and self.elements[i] == a)

    def __eq__(self, other):
        if not isinstance(other, IntegerSet):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.elements, other.elements)

    def __hash__(self):
        return hash((self.n, self.elements.tobytes()))

    def tolist(self) -> list[int]:
        return self.elements.tolist()

    def union(self, other: "IntegerSet") -> "IntegerSet":
        return IntegerSet.from_array(
            np.concatenate((self.elements, other.elements)), max(self.n, other.n)
        )


@dataclass(frozen=True)
class FactoredLcm:
    """lcm of a set as {prime: max exponent}."""

    exponents: dict

    def psi(self) -> float:
        return math.fsum(e * math.log(p) for p, e in sorted(self.exponents.items()))

    def value(self) -> int:
        out = 1
        for p, e in self.exponents.items():
            out *= p**e
        return out


def _spf_exponents(vals: np.ndarray, spf: np.ndarray):
    primes, exps = [], []
    rem = vals
    while rem.size:
        p = spf[rem].astype(np.int64)
        e = np.zeros(rem.size, dtype=np.int64)
        dividing = np.ones(rem.size, dtype=bool)
        while dividing.any():
            rem = np.where(dividing, rem // p, rem)
            e += dividing
            dividing = rem % p == 0
        primes.append(p)
        exps.append(e)
        rem = rem[rem > 1]
    return primes, exps


def _trial_exponents(vals: np.ndarray, t: PrimeTable):
    primes, exps = [], []
    rem = vals.copy()
    bound = math.isqrt(int(vals.max()))
    for p in t.primes[: np.searchsorted(t.primes, bound, side="right")].tolist():
        hit = np.flatnonzero(rem % p == 0)
        if hit.size == 0:
            continue
        sub = rem[hit]
        e = np.zeros(hit.size, dtype=np.int64)
        dividing = np.ones(hit.size, dtype=bool)
        while dividing.any():
            sub = np.where(dividing, sub // p, sub)
            e += dividing
            dividing = sub % p == 0
        rem[hit] = sub
        primes.append(np.full(hit.size, p, dtype=np.int64))
        exps.append(e)
    # cofactor left after removing all primes <= sqrt(v) is a prime to the first power
    rest = rem[rem > 1]
    primes.append(rest)
    exps.append(np.ones(rest.size, dtype=np.int64))
    return primes, exps


def factored_lcm(A: IntegerSet, t: PrimeTable) -> FactoredLcm:
    vals = A.elements[A.elements > 1]
    if vals.size == 0:
        return FactoredLcm({})
    top = int(vals[-1])
    if top > t.limit * t.limit:
        raise OutOfTableError(f"element {top} exceeds factorization range {t.limit}**2")
    small = vals[vals <= t.spf_limit]
    large = vals[vals > t.spf_limit]
    primes, exps = [], []
    if small.size:
        pr, ex = _spf_exponents(small, t.spf)
        primes += pr
        exps += ex
    if large.size:
        pr, ex = _trial_exponents(large, t)
        primes += pr
        exps += ex
    p = np.concatenate(primes)
    e = np.concatenate(exps)
    order = np.argsort(p, kind="stable")
    p, e = p[order], e[order]
    starts = np.flatnonzero(np.r_[True, p[1:] != p[:-1]])
    emax = np.maximum.reduceat(e, starts)
    return FactoredLcm(dict(zip(p[starts].tolist(), emax.tolist())))


def psi_of_set(A: IntegerSet, t: PrimeTable) -> float:
    """Sum over primes of (max exponent in A) * log p; 0 for the empty set."""
    return factored_lcm(A, t).psi()


def psi_indicator(A: IntegerSet, t: PrimeTable) -> float:
    """Sum of Lambda(m) over prime powers m <= n having a multiple in A."""
    if A.n > t.limit:
        raise OutOfTableError(f"set bound n={A.n} exceeds table limit {t.limit}")
    if len(A) == 0:
        return 0.0
    occupied = np.zeros(A.n + 1, dtype=bool)
    occupied[A.elements] = True
    top = int(A.elements[-1])
    vals, logs, _ = t.prime_powers(top)
    hits = [lg for m, lg in zip(vals.tolist(), logs.tolist()) if occupied[m::m].any()]
    return math.fsum(hits)


def lcm_exact(A: IntegerSet, digit_cap: int = DEFAULT_DIGIT_CAP) -> int:
    """Big-integer lcm of A (1 for the empty set)."""
    bit_cap = math.ceil(digit_cap / math.log10(2))
    out = 1
    for a in A:
        out = math.lcm(out, a)
        if out.bit_length() > bit_cap and len(str(out)) > digit_cap:
            raise ResourceLimitError(
                f"lcm exceeds {digit_cap} decimal digits", cap="lcm digit cap", flag="digit_cap"
            )
    return out


def parse_set_text(text: str, n: int) -> IntegerSet:
    """Whitespace-separated positive integers; lines starting with '#' are comments."""
    values = []
    for line in text.splitlines():
        if line.lstrip().startswith("#"):
            continue
        for tok in line.split():
            try:
                values.append(int(tok))
            except ValueError:
                raise ValueError(f"not an integer: {tok!r}") from None
    return IntegerSet.from_iterable(values, n)


def read_set_file(path, n: int) -> IntegerSet:
    return parse_set_text(Path(path).read_text(encoding="utf-8"), n)
