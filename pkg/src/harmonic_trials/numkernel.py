"""Special-function kernel used by every other module.

Rising/falling factorials (plain and log-space), digamma, exact unsigned
Stirling numbers of the first kind, the generalized-Stirling recursion,
the Dobinski-type alternating sum, and the Gauss series F(1,b;c;z).

All operations are pure functions of their inputs; tables are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

from .errors import (
    DivergenceError,
    DomainError,
    LimitExceededError,
    NonconvergenceError,
)

#: Default cap on exact Stirling-table sizes.
STIRLING_LIMIT = 500

#: Hard cap on the number of Gauss-series terms.
GAUSS_MAX_TERMS = 10**6

_GAUSS_TAIL_TOL = 1e-14

__all__ = [
    "STIRLING_LIMIT",
    "GAUSS_MAX_TERMS",
    "rising_factorial",
    "falling_factorial",
    "log_rising_factorial",
    "digamma",
    "StirlingTable",
    "stirling_first_unsigned",
    "GeneralizedStirlingTable",
    "generalized_stirling",
    "dobinski_generalized",
    "dobinski_generalized_exact",
    "gauss_f1",
    "stirling_ratio_table",
]


def rising_factorial(z, n: int):
    """[z]_n = z (z+1) ... (z+n-1), with [z]_0 = 1.

    Type-preserving: Fraction/int inputs give exact results.
    """
    if n < 0:
        raise DomainError("rising factorial needs n >= 0")
    out = z**0
    for i in range(n):
        out = out * (z + i)
    return out


def falling_factorial(x, l: int):
    """(x)_l = x (x-1) ... (x-l+1), with (x)_0 = 1."""
    if l < 0:
        raise DomainError("falling factorial needs l >= 0")
    out = x**0
    for i in range(l):
        out = out * (x - i)
    return out


def log_rising_factorial(z: float, n: int) -> float:
    """log([z]_n) for z > 0; exact 0.0 for n = 0."""
    if n < 0:
        raise DomainError("log_rising_factorial needs n >= 0")
    if z <= 0:
        raise DomainError(f"log_rising_factorial needs z > 0, got z={z}")
    if n == 0:
        return 0.0
    return math.lgamma(z + n) - math.lgamma(z)


# Coefficients c_k such that psi(x) = log x - 1/(2x) - sum_k c_k x^(-2k),
# i.e. B_{2k}/(2k) for k = 1..7.  With the recurrence shift to x >= 8 the
# truncation error is below 2e-15, comfortably inside the 1e-12 target.
_DIGAMMA_TAIL = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x: float) -> float:
    """Digamma function for x > 0: recurrence shift to x >= 8, then the
    Bernoulli-number asymptotic expansion."""
    if x <= 0:
        raise DomainError(f"digamma needs x > 0, got {x}")
    acc = 0.0
    while x < 8.0:
        acc -= 1.0 / x
        x += 1.0
    u = 1.0 / (x * x)
    tail = 0.0
    for c in reversed(_DIGAMMA_TAIL):
        tail = (tail + c) * u
    return acc + math.log(x) - 0.5 / x - tail


@dataclass(frozen=True)
class StirlingTable:
    """Triangular table of unsigned Stirling numbers of the first kind.

    entries[n][k] = |s(n,k)|, exact arbitrary-precision integers.
    """

    n_max: int
    entries: tuple[tuple[int, ...], ...]

    def unsigned(self, n: int, k: int) -> int:
        if not 0 <= n <= self.n_max:
            raise DomainError(f"n={n} outside table range 0..{self.n_max}")
        if not 0 <= k <= n:
            return 0
        return self.entries[n][k]

    def row(self, n: int) -> tuple[int, ...]:
        if not 0 <= n <= self.n_max:
            raise DomainError(f"n={n} outside table range 0..{self.n_max}")
        return self.entries[n]


@lru_cache(maxsize=16)
def _stirling_rows(n_max: int) -> tuple[tuple[int, ...], ...]:
    rows = [(1,)]
    for n in range(n_max):
        prev = rows[n]
        nxt = [0] * (n + 2)
        for k in range(n + 1):
            nxt[k] += n * prev[k]
            nxt[k + 1] += prev[k]
        rows.append(tuple(nxt))
    return tuple(rows)


def stirling_first_unsigned(n_max: int, limit: int = STIRLING_LIMIT) -> StirlingTable:
    """Exact |s(n,k)| for 0 <= k <= n <= n_max via the three-term recursion."""
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    if n_max > limit:
        raise LimitExceededError(f"n_max={n_max} exceeds the table limit {limit}")
    return StirlingTable(n_max, _stirling_rows(n_max))


@dataclass(frozen=True)
class GeneralizedStirlingTable:
    """Triangular table of s_r(n,k), the (-1, 0, r) generalized Stirling family."""

    n_max: int
    r: float
    entries: tuple[tuple[float, ...], ...]

    def value(self, n: int, k: int) -> float:
        if not 0 <= n <= self.n_max:
            raise DomainError(f"n={n} outside table range 0..{self.n_max}")
        if not 0 <= k <= n:
            return 0.0
        return self.entries[n][k]

    def row(self, n: int) -> tuple[float, ...]:
        return self.entries[n]


def generalized_stirling(n_max: int, r: float, limit: int = STIRLING_LIMIT) -> GeneralizedStirlingTable:
    """Table of s_r(n,k) from s_r(n+1,k) = s_r(n,k-1) + (n+r) s_r(n,k).

    Float entries; they grow like gamma(n+r), so sizes much beyond 150 will
    overflow for r > 0 (the exact integer table covers the r = 0 case).
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    if n_max > limit:
        raise LimitExceededError(f"n_max={n_max} exceeds the table limit {limit}")
    rows = [(1.0,)]
    for n in range(n_max):
        prev = rows[n]
        nxt = [0.0] * (n + 2)
        for k in range(n + 1):
            nxt[k] += (n + r) * prev[k]
            nxt[k + 1] += prev[k]
        rows.append(tuple(nxt))
    return GeneralizedStirlingTable(n_max, r, tuple(rows))


def _as_fraction(x) -> Fraction:
    if isinstance(x, Rational):
        return Fraction(x)
    return Fraction(float(x))  # exact binary value of the float


def dobinski_generalized_exact(n: int, k: int, alpha, w2) -> Fraction:
    """S(n,k;-1,-alpha,w2) as an exact rational.

    Evaluates (alpha^-k / k!) * sum_l (-1)^l C(k,l) [w2 - l alpha]_n in
    Fraction arithmetic: the alternating sum cancels catastrophically in
    floating point for k beyond ~20, so exactness is the point here.
    """
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    a = _as_fraction(alpha)
    if a == 0:
        raise DomainError("alpha must be nonzero (use the r-recursion for alpha = 0)")
    b = _as_fraction(w2)
    total = Fraction(0)
    for l in range(k + 1):
        term = math.comb(k, l) * rising_factorial(b - l * a, n)
        total = total + term if l % 2 == 0 else total - term
    return total / (a**k * math.factorial(k))


def dobinski_generalized(n: int, k: int, alpha: float, w2: float) -> float:
    """Float value of the Dobinski-type sum S(n,k;-1,-alpha,w2)."""
    return float(dobinski_generalized_exact(n, k, alpha, w2))


def gauss_f1(b: float, c: float, z: float) -> float:
    """Gauss series F(1,b;c;z) = sum_n ([b]_n/[c]_n) z^n for z in [0,1].

    At z = 1 the series converges iff c - 1 - b > 0 and then equals
    (c-1)/(c-1-b); for z < 1 the series is summed until the geometric tail
    bound drops below 1e-14.
    """
    if c <= 0:
        raise DomainError(f"gauss_f1 needs c > 0, got {c}")
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"gauss_f1 is restricted to z in [0,1], got {z}")
    if z == 0.0:
        return 1.0
    terminating = b <= 0 and b == int(b)
    if z == 1.0 and not terminating:
        if c - 1.0 - b <= 0:
            raise DivergenceError(f"F(1,{b};{c};1) diverges: c-1-b = {c - 1.0 - b} <= 0")
        return (c - 1.0) / (c - 1.0 - b)
    total = 1.0
    term = 1.0
    n = 0
    while n < GAUSS_MAX_TERMS:
        term *= (b + n) / (c + n) * z
        total += term
        n += 1
        if term == 0.0:
            return total
        if b + n > 0:
            # ratio of consecutive terms is z(b+m)/(c+m), monotone in m
            rho = z * (b + n) / (c + n) if b > c else z
            if rho < 1.0 and abs(term) * rho / (1.0 - rho) < _GAUSS_TAIL_TOL:
                return total
    raise NonconvergenceError(f"gauss_f1 did not converge within {GAUSS_MAX_TERMS} terms")


def stirling_ratio_table(w1: float, l_max: int, n_max: int) -> np.ndarray:
    """t[n,k] = |s(n,k)| / [w1+1]_n via a scaled column recursion.

    The ratio stays in float range far beyond the exact-table limit
    (the raw numbers overflow around n = 170), which is what tail studies
    of the Ewens passage law need.
    """
    if w1 <= 0:
        raise DomainError("w1 must be positive")
    if l_max < 0 or n_max < 0:
        raise DomainError("l_max and n_max must be >= 0")
    t = np.zeros((n_max + 1, l_max + 1))
    t[0, 0] = 1.0
    for n in range(n_max):
        div = w1 + 1.0 + n
        t[n + 1, 0] = n * t[n, 0] / div
        if l_max:
            t[n + 1, 1:] = (n * t[n, 1:] + t[n, :-1]) / div
    return t
