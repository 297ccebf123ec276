"""Prime tables: primes, smallest prime factors, von Mangoldt weights and
Chebyshev psi prefix sums.

Up to ``full_resolution_limit`` (default 10**7) the table keeps one smallest
prime factor and one psi value per integer.  Above that it keeps only the
primes plus psi at segment boundaries, and re-sieves a single segment to
answer a psi query.
"""

from __future__ import annotations

import math
from itertools import chain

import numpy as np

from .errors import OutOfTableError, ResourceLimitError

DEFAULT_LIMIT_CAP = 10**8
FULL_RESOLUTION_LIMIT = 10**7
DEFAULT_SEGMENT_SIZE = 1 << 20
_BLOCK = 1 << 16


def _prime_flags(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return flags


def _prefix_sums(values: np.ndarray, start: float = 0.0) -> np.ndarray:
    """Running sums with one rounding per output on top of an exact carry.

    np.cumsum alone drifts by ~sqrt(N) ulps; here each block of 2**16 is
    summed locally and the carry between blocks is kept with math.fsum.
    """
    out = np.empty(len(values), dtype=np.float64)
    carry = start
    for lo in range(0, len(values), _BLOCK):
        blk = values[lo : lo + _BLOCK]
        np.cumsum(blk, out=out[lo : lo + len(blk)])
        out[lo : lo + len(blk)] += carry
        carry = math.fsum(chain((carry,), blk[blk != 0].tolist()))
    return out


def _higher_prime_powers(base_primes: np.ndarray, limit: int):
    """(p**k, p) for all k >= 2 with p**k <= limit, ascending by value."""
    vals, bases = [], []
    for p in base_primes.tolist():
        pk = p * p
        if pk > limit:
            break
        while pk <= limit:
            vals.append(pk)
            bases.append(p)
            pk *= p
    vals = np.array(vals, dtype=np.int64)
    bases = np.array(bases, dtype=np.int64)
    order = np.argsort(vals, kind="stable")
    return vals[order], bases[order]


class PrimeTable:
    """Immutable prime infrastructure up to ``limit``.

    Attributes
    ----------
    limit : int
        Largest supported argument.
    primes : ndarray[int64]
        All primes <= limit, ascending.
    spf : ndarray[int32] or None
        Smallest prime factor of each integer (spf[1] == 1); None in
        segmented mode.
    psi_prefix : ndarray[float64] or None
        psi_prefix[x] = sum of Lambda(m) for m <= x; None in segmented mode.
    """

    def __init__(self, limit, primes, spf, psi_prefix, segment_size, checkpoints):
        self.limit = limit
        self.primes = primes
        self.spf = spf
        self.psi_prefix = psi_prefix
        self.segment_size = segment_size
        self._checkpoints = checkpoints
        for arr in (primes, spf, psi_prefix, checkpoints):
            if arr is not None:
                arr.flags.writeable = False
        root = math.isqrt(limit)
        self._base_primes = primes[: np.searchsorted(primes, root, side="right")]
        self._pp_vals, self._pp_bases = _higher_prime_powers(self._base_primes, limit)

    def __repr__(self):
        mode = "full" if self.is_full_resolution else "segmented"
        return f"PrimeTable(limit={self.limit}, pi={len(self.primes)}, mode={mode})"

    @property
    def is_full_resolution(self) -> bool:
        return self.spf is not None

    @property
    def spf_limit(self) -> int:
        """Largest integer factorizable by an spf walk (0 in segmented mode)."""
        return self.limit if self.spf is not None else 0

    def _check(self, x, name="argument"):
        if x < 1 or x > self.limit:
            raise OutOfTableError(f"{name}={x} outside table range [1, {self.limit}]")

    def prime_count(self, x: int) -> int:
        self._check(x)
        return int(np.searchsorted(self.primes, x, side="right"))

    def prime_powers(self, n: int):
        """All prime powers m <= n as (values, log p, p), sorted by value."""
        if n < 2:
            empty = np.zeros(0, dtype=np.int64)
            return empty, np.zeros(0), empty
        self._check(n, "n")
        ps = self.primes[: np.searchsorted(self.primes, n, side="right")]
        cut = np.searchsorted(self._pp_vals, n, side="right")
        vals = np.concatenate((ps, self._pp_vals[:cut]))
        bases = np.concatenate((ps, self._pp_bases[:cut]))
        order = np.argsort(vals, kind="stable")
        vals, bases = vals[order], bases[order]
        return vals, np.log(bases.astype(np.float64)), bases

    # -- segmented machinery -------------------------------------------------

    def _segment_lambda(self, seg: int) -> np.ndarray:
        S = self.segment_size
        lo = seg * S
        hi = min(lo + S, self.limit + 1)
        return _lambda_range(lo, hi, self._base_primes, self._pp_vals, self._pp_bases)

    def psi_many(self, xs) -> np.ndarray:
        """Chebyshev psi at every entry of ``xs`` (vectorized)."""
        xs = np.asarray(xs, dtype=np.int64)
        if xs.size == 0:
            return np.zeros(0)
        if xs.min() < 0 or xs.max() > self.limit:
            raise OutOfTableError(f"psi argument outside [0, {self.limit}]")
        if self.psi_prefix is not None:
            return self.psi_prefix[xs]
        S = self.segment_size
        out = np.empty(xs.shape, dtype=np.float64)
        segs = xs // S
        for seg in np.unique(segs).tolist():
            sel = segs == seg
            local = _prefix_sums(self._segment_lambda(seg), self._checkpoints[seg])
            out[sel] = local[xs[sel] - seg * S]
        return out


def _lambda_range(lo, hi, base_primes, pp_vals, pp_bases) -> np.ndarray:
    """Lambda(m) for lo <= m < hi by sieving the window with base primes."""
    flags = np.ones(hi - lo, dtype=bool)
    for p in base_primes.tolist():
        if p * p >= hi:
            break
        start = max(p * p, -(-lo // p) * p)
        flags[start - lo :: p] = False
    if lo <= 1:
        flags[: 2 - lo] = False
    lam = np.zeros(hi - lo, dtype=np.float64)
    idx = np.flatnonzero(flags)
    lam[idx] = np.log((idx + lo).astype(np.float64))
    a, b = np.searchsorted(pp_vals, [lo, hi])
    lam[pp_vals[a:b] - lo] = np.log(pp_bases[a:b].astype(np.float64))
    return lam


def build_prime_table(
    limit: int,
    *,
    cap: int = DEFAULT_LIMIT_CAP,
    full_resolution_limit: int = FULL_RESOLUTION_LIMIT,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
) -> PrimeTable:
    """Sieve primes, smallest prime factors and psi prefix sums up to ``limit``."""
    limit = int(limit)
    if limit < 2 or limit > cap:
        raise ResourceLimitError(
            f"prime table limit {limit} outside [2, {cap}]", cap="table limit", flag="--max-limit"
        )
    if limit <= full_resolution_limit:
        flags = _prime_flags(limit)
        primes = np.flatnonzero(flags).astype(np.int64)
        spf = np.zeros(limit + 1, dtype=np.int32)
        for p in primes[: np.searchsorted(primes, math.isqrt(limit), side="right")].tolist():
            s = spf[p * p :: p]
            s[s == 0] = p
        spf[primes] = primes
        spf[1] = 1
        base = primes[: np.searchsorted(primes, math.isqrt(limit), side="right")]
        pp_vals, pp_bases = _higher_prime_powers(base, limit)
        lam = np.zeros(limit + 1, dtype=np.float64)
        lam[primes] = np.log(primes.astype(np.float64))
        lam[pp_vals] = np.log(pp_bases.astype(np.float64))
        psi = _prefix_sums(lam)
        return PrimeTable(limit, primes, spf, psi, segment_size, None)

    root = math.isqrt(limit)
    base = np.flatnonzero(_prime_flags(root)).astype(np.int64)
    pp_vals, pp_bases = _higher_prime_powers(base, limit)
    nseg = limit // segment_size + 1
    checkpoints = np.zeros(nseg, dtype=np.float64)
    chunks = []
    carry = [0.0]
    for seg in range(nseg):
        lo = seg * segment_size
        hi = min(lo + segment_size, limit + 1)
        checkpoints[seg] = math.fsum(carry)
        lam = _lambda_range(lo, hi, base, pp_vals, pp_bases)
        # primes are exactly the positions whose value m carries log m
        idx = np.flatnonzero(lam)
        m = idx + lo
        is_prime = lam[idx] == np.log(m.astype(np.float64))
        chunks.append(m[is_prime])
        carry = [checkpoints[seg], math.fsum(lam[idx].tolist())]
    primes = np.concatenate(chunks).astype(np.int64)
    return PrimeTable(limit, primes, None, None, segment_size, checkpoints)


def von_mangoldt(m: int, t: PrimeTable) -> float:
    """log p if m is a power of the prime p, else 0."""
    t._check(m, "m")
    if m == 1:
        return 0.0
    fac = factorize(m, t)
    return math.log(fac[0][0]) if len(fac) == 1 else 0.0


def chebyshev_psi(x: int, t: PrimeTable) -> float:
    """Sum of Lambda(m) over m <= x."""
    t._check(x, "x")
    if t.psi_prefix is not None:
        return float(t.psi_prefix[x])
    return float(t.psi_many([x])[0])


def factorize(a: int, t: PrimeTable) -> list[tuple[int, int]]:
    """Prime factorization of ``a`` as ascending (prime, exponent) pairs.

    Uses the spf table when a <= t.limit, otherwise trial division by table
    primes up to sqrt(a), which is exhaustive for a <= t.limit**2.
    """
    a = int(a)
    if a < 1:
        raise ValueError(f"factorize needs a positive integer, got {a}")
    if a > t.limit * t.limit:
        raise OutOfTableError(f"{a} exceeds factorization range limit**2 = {t.limit**2}")
    out = []
    if a <= t.spf_limit:
        spf = t.spf
        while a > 1:
            p = int(spf[a])
            e = 0
            while a % p == 0:
                a //= p
                e += 1
            out.append((p, e))
        return out
    for p in t.primes.tolist():
        if p * p > a:
            break
        if a % p == 0:
            e = 0
            while a % p == 0:
                a //= p
                e += 1
            out.append((p, e))
    if a > 1:
        out.append((a, 1))
    return out


def euler_phi(q: int, t: PrimeTable) -> int:
    result = q
    for p, _ in factorize(q, t):
        result = result // p * (p - 1)
    return result


def largest_prime_factors(t: PrimeTable) -> np.ndarray:
    """gpf[m] for 0 <= m <= limit (gpf[1] = 1); full-resolution tables only."""
    return _gpf_cache(t)


def _gpf_cache(t: PrimeTable) -> np.ndarray:
    cached = t.__dict__.get("_gpf")
    if cached is not None:
        return cached
    if t.spf is None:
        raise OutOfTableError("largest-prime-factor array needs a full-resolution table")
    spf = t.spf
    gpf = np.zeros(t.limit + 1, dtype=np.int32)
    gpf[1] = 1
    lo = 2
    # m // spf[m] <= m / 2, so each dyadic block only reads earlier blocks
    while lo <= t.limit:
        hi = min(2 * lo, t.limit + 1)
        m = np.arange(lo, hi, dtype=np.int64)
        p = spf[lo:hi]
        gpf[lo:hi] = np.maximum(p, gpf[m // p])
        lo = hi
    gpf.flags.writeable = False
    t.__dict__["_gpf"] = gpf
    return gpf
