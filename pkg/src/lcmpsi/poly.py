"""Value sets of integer polynomials and predictors for psi_f(n) = psi(A_f(n)).

A_f(n) is the set of values f(k), k ranging over all integers, that land
in [1, n].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .psi_core import IntegerSet, psi_of_set
from .sieve import PrimeTable, euler_phi

B_X2_PLUS_1 = -0.06627563


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial a_0 + a_1 x + ... + a_d x**d with a_d > 0.

    Coefficients are kept as given; no content is divided out.
    """

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if len(coeffs) < 2:
            raise DomainError("polynomial must have degree >= 1")
        if coeffs[-1] <= 0:
            raise DomainError("leading coefficient must be positive")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def parse(cls, text: str) -> "IntPolynomial":
        """From "a0,a1,...,ad"."""
        return cls(tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    def __call__(self, x: int) -> int:
        out = 0
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if i == 0 else f"{c}*x^{i}" if i > 1 else f"{c}*x")
        return " + ".join(reversed(terms))


def _monotone_radius(f: IntPolynomial) -> int:
    # every real root of f' has |x| < 1 + max |i a_i| / (d a_d) (Cauchy bound)
    d, lead = f.degree, f.leading
    if d == 1:
        return 0
    top = max(abs(i * c) for i, c in enumerate(f.coeffs[1:-1], start=1))
    return 1 + -(-top // (d * lead))


def _first_true(pred, j0: int) -> int:
    """Smallest j >= j0 with pred(j), for pred monotone False -> True."""
    if pred(j0):
        return j0
    lo, step = j0, 1
    while not pred(j0 + step):
        lo, step = j0 + step, step * 2
    hi = j0 + step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _monotone_run(h, increasing: bool, j0: int, n: int):
    """Range [lo, hi] of j >= j0 with 1 <= h(j) <= n, h monotone on j >= j0."""
    if increasing:
        lo = _first_true(lambda j: h(j) >= 1, j0)
        hi = _first_true(lambda j: h(j) > n, lo) - 1
    else:
        lo = _first_true(lambda j: h(j) <= n, j0)
        hi = _first_true(lambda j: h(j) < 1, lo) - 1
    return lo, hi


def _evaluate(f: IntPolynomial, ks: np.ndarray) -> np.ndarray:
    bound = int(np.abs(ks).max(initial=0))
    if sum(abs(c) * bound**i for i, c in enumerate(f.coeffs)) < 2**62:
        out = np.zeros(ks.size, dtype=np.int64)
        for c in reversed(f.coeffs):
            out = out * ks + c
        return out
    return np.array([f(int(k)) for k in ks], dtype=object)


def poly_set(f: IntPolynomial, n: int) -> IntegerSet:
    """All distinct values f(k) in [1, n], k over the integers."""
    R = _monotone_radius(f)
    ks = [np.arange(-R, R + 1, dtype=np.int64)]
    # past +-R f is monotone, so the admissible k form one run on each side
    lo, hi = _monotone_run(f, True, R + 1, n)
    ks.append(np.arange(lo, hi + 1, dtype=np.int64))
    lo, hi = _monotone_run(lambda j: f(-j), f.degree % 2 == 0, R + 1, n)
    ks.append(-np.arange(lo, hi + 1, dtype=np.int64))
    vals = _evaluate(f, np.concatenate(ks))
    if vals.dtype == object:
        vals = np.array([v for v in vals.tolist() if 1 <= v <= n], dtype=np.int64)
    else:
        vals = vals[(vals >= 1) & (vals <= n)]
    return IntegerSet.from_array(vals, n)


def psi_poly(f: IntPolynomial, n: int, t: PrimeTable) -> float:
    """psi of A_f(n); values above t.limit are factored by trial division."""
    return psi_of_set(poly_set(f, n), t)


def _mismatch(msg):
    warnings.warn(msg, stacklevel=3)


def is_irreducible_quadratic(f: IntPolynomial) -> bool:
    if f.degree != 2:
        return False
    c, b, a = f.coeffs
    disc = b * b - 4 * a * c
    return disc < 0 or math.isqrt(disc) ** 2 != disc


def predict_linear(f: IntPolynomial, n: float, t: PrimeTable) -> float:
    """(n / a1) * (q / phi(q)) * sum of 1/l over l <= q coprime to q, q = a1/(a1, a0)."""
    if f.degree != 1:
        raise DomainError("linear predictor needs a degree-1 polynomial")
    a0, a1 = f.coeffs
    q = a1 // math.gcd(a1, a0)
    harmonic = math.fsum(1.0 / l for l in range(1, q + 1) if math.gcd(l, q) == 1)
    return n / a1 * q / euler_phi(q, t) * harmonic


def predict_quadratic_irreducible(f: IntPolynomial, n: float, B: float) -> float:
    """(1/2) sqrt(n/a2) log(n/a2) + B sqrt(n/a2)."""
    if f.degree != 2:
        raise DomainError("quadratic predictor needs a degree-2 polynomial")
    if not is_irreducible_quadratic(f):
        _mismatch(f"{f} is reducible; the irreducible-quadratic predictor does not apply")
    x = n / f.leading
    return 0.5 * math.sqrt(x) * math.log(x) + B * math.sqrt(x)


def predict_reducible_x2m1(n: float) -> float:
    """sqrt(n), the asymptotic for f = x**2 - 1."""
    return math.sqrt(n)


def predict_conjecture(f: IntPolynomial, n: float) -> float:
    """(1 - 1/d) (n/a_d)**(1/d) log(n/a_d)."""
    d = f.degree
    if d < 2:
        raise DomainError("conjectured main term needs degree >= 2")
    x = n / f.leading
    return (1.0 - 1.0 / d) * x ** (1.0 / d) * math.log(x)


def legendre_minus_one(p: int) -> int:
    """(-1 | p) for an odd prime p."""
    if p < 3 or p % 2 == 0 or any(p % q == 0 for q in range(3, math.isqrt(p) + 1, 2)):
        raise DomainError(f"{p} is not an odd prime")
    return 1 if p % 4 == 1 else -1


@dataclass(frozen=True)
class BEstimate:
    prime_cap: int
    value: float
    last_block_increment: float


def estimate_B_constant(P: int, t: PrimeTable) -> BEstimate:
    """Truncation at P of gamma - 1 - log(2)/2 - sum over odd p of (-1|p) log p / (p - 1).

    The series converges only conditionally; ``last_block_increment`` is the
    change contributed by primes in (P/2, P] and serves as an oscillation
    indicator, not an error bound.
    """
    if P > t.limit:
        raise DomainError(f"prime cap {P} exceeds table limit {t.limit}")
    ps = t.primes[1 : np.searchsorted(t.primes, P, side="right")].astype(np.float64)
    chi = np.where(ps % 4 == 1, 1.0, -1.0)
    terms = chi * np.log(ps) / (ps - 1.0)
    head = np.euler_gamma - 1.0 - math.log(2.0) / 2.0
    value = head - math.fsum(terms.tolist())
    block = terms[ps > P / 2]
    return BEstimate(P, value, -math.fsum(block.tolist()))
