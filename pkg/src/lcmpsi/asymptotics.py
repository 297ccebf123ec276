"""Main-term predictors with the o-terms dropped, plus the relative PNT error.

Comparisons against exact values should report a signed residual
(``relative_residual``) so drift stays visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .sieve import PrimeTable, chebyshev_psi


@dataclass(frozen=True)
class RegimeParams:
    """k = c n**theta elements out of n, coupled to delta = c n**(theta - 1)."""

    n: int
    theta: float
    c: float

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"n must be >= 2, got {self.n}")
        if not 0 < self.theta <= 1:
            raise DomainError(f"theta must lie in (0, 1], got {self.theta}")
        if self.c <= 0:
            raise DomainError(f"c must be positive, got {self.c}")
        if not 0 < self.delta < 1:
            raise DomainError(f"delta = c n^(theta-1) = {self.delta} is not in (0, 1)")

    @property
    def delta(self) -> float:
        return self.c * self.n ** (self.theta - 1)

    @property
    def k(self) -> int:
        return round(self.c * self.n**self.theta)


def predict_mean(r: RegimeParams) -> float:
    """Predicted mean psi of a k-subset.

    The two branches are chosen by theta == 1 exactly; letting theta tend to 1
    in the first does not give the second, so there is no interpolation.
    """
    n, theta, c = r.n, r.theta, r.c
    if theta == 1:
        return n * _x_log_inv_x_over_1mx(c)
    return c * (1 - theta) * n**theta * math.log(n) - c * math.log(c) * n**theta


def _x_log_inv_x_over_1mx(x: float) -> float:
    # x log(1/x) / (1 - x), continuous at x = 1 with value 1
    if x == 1:
        return 1.0
    return -x * math.log(x) / (1 - x)


def bernoulli_main_term(n: float, delta: float) -> float:
    """n delta log(1/delta) / (1 - delta)."""
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    return n * _x_log_inv_x_over_1mx(delta)


def epsilon_error(x: int, t: PrimeTable) -> float:
    """psi(x)/x - 1."""
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    return chebyshev_psi(x, t) / x - 1.0


def error_envelope(n: float, delta: float, C: float) -> float:
    """exp(-C sqrt(log(n delta))), C left to the caller."""
    if C <= 0:
        raise DomainError("C must be positive")
    nd = n * delta
    if nd <= 1:
        raise DomainError(f"n*delta must exceed 1, got {nd}")
    return math.exp(-C * math.sqrt(math.log(nd)))


def relative_residual(exact: float, predicted: float) -> float:
    """Signed (exact - predicted) / predicted."""
    return (exact - predicted) / predicted
