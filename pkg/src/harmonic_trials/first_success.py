"""The two-parameter (w1,w2) first-success family.

K_1+ is the trial index of the first success and K_1 = K_1+ - 1 the number
of failures before it (a generalized Sibuya law, heavy-tailed with index
w1; Yule-Simon at w2 = 1, "bare" Sibuya at w1 + w2 = 1).  The w2 = 0 case
is degenerate: the first trial always succeeds, so every operation here
short-circuits to the point mass rather than evaluating 0/0 forms.

Note on identifiability: within this family only the Yule-Simon member is
identifiable from the law of K_1 alone; estimation routines accept the
general family regardless (see `estimation`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InfiniteMomentError
from .numkernel import gauss_f1, log_rising_factorial, rising_factorial
from .success_counts import FinitePmf, Weights, make_pmf

__all__ = [
    "FirstSuccessLaw",
    "survival",
    "pmf",
    "pgf",
    "factorial_moment",
    "mean",
    "variance",
    "atom_at_infinity",
    "first_success_law",
]


@dataclass(frozen=True, eq=False)
class FirstSuccessLaw:
    """Truncated law of K_1 on {0,...,k_max} with the exact tail deficit."""

    weights: Weights
    k_max: int
    probs: FinitePmf

    @property
    def deficit(self) -> float:
        return self.probs.deficit


def survival(weights: Weights, n: int) -> float:
    """P(K_1+ > n) = [w2]_n / [w]_n; exactly 0 for w2 = 0, n >= 1.

    Up to n = 10^4 the log product is accumulated with exact rounding
    (fsum), which keeps consecutive values consistent to ~1 ulp — the
    survival-difference identity needs that; beyond, the lgamma form
    (relative error ~1e-12) takes over.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return 1.0
    if weights.w2 == 0:
        return 0.0
    w1, w = weights.w1, weights.w
    if n <= 10**4:
        return math.exp(math.fsum(math.log1p(-w1 / (w + m)) for m in range(n)))
    return math.exp(
        log_rising_factorial(weights.w2, n) - log_rising_factorial(weights.w, n)
    )


def pmf(weights: Weights, k: int) -> float:
    """P(K_1 = k) = (w1/w) [w2]_k / [w+1]_k."""
    if k < 0:
        raise DomainError("k must be >= 0")
    if k == 0:
        return weights.w1 / weights.w
    if weights.w2 == 0:
        return 0.0
    return (
        weights.w1
        / weights.w
        * math.exp(
            log_rising_factorial(weights.w2, k)
            - log_rising_factorial(weights.w + 1.0, k)
        )
    )


def pgf(weights: Weights, z: float) -> float:
    """E(z^{K_1}) = (w1/w) F(1, w2; w+1; z) for z in [0,1].

    Always converges at z = 1 since c-1-b = w1 > 0.
    """
    if not 0.0 <= z <= 1.0:
        raise DomainError("pgf is restricted to z in [0,1]")
    return weights.w1 / weights.w * gauss_f1(weights.w2, weights.w + 1.0, z)


def factorial_moment(weights: Weights, i: int) -> float:
    """E[(K_1)_i] = i! [w2]_i / [w1-i]_i, finite iff i < w1."""
    if i < 0:
        raise DomainError("i must be >= 0")
    if i == 0:
        return 1.0
    if i >= weights.w1:
        raise InfiniteMomentError(
            f"E[(K_1)_{i}] is infinite for w1 = {weights.w1} <= {i}"
        )
    return (
        math.factorial(i)
        * rising_factorial(weights.w2, i)
        / rising_factorial(weights.w1 - i, i)
    )


def mean(weights: Weights) -> float:
    """E(K_1) = w2/(w1-1), requiring w1 > 1."""
    return factorial_moment(weights, 1)


def variance(weights: Weights) -> float:
    """Var(K_1) = w1 (w-1) E(K_1) / ((w1-1)(w1-2)), requiring w1 > 2."""
    m1 = factorial_moment(weights, 1)
    m2 = factorial_moment(weights, 2)
    return m2 + m1 - m1 * m1


def atom_at_infinity(weights: Weights, p: float) -> float:
    """Mass P(no success within a Geometric(p) window) = (q/p)[F(1,w2;w;p)-1]."""
    if weights.w2 <= 0:
        raise DomainError("the atom at infinity requires w2 > 0")
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0,1)")
    q = 1.0 - p
    return q / p * (gauss_f1(weights.w2, weights.w, p) - 1.0)


def first_success_law(weights: Weights, k_max: int) -> FirstSuccessLaw:
    """Law of K_1 on {0,...,k_max}; deficit = [w2]_{k_max+1}/[w]_{k_max+1}."""
    if k_max < 0:
        raise DomainError("k_max must be >= 0")
    w1, w2, w = weights.w1, weights.w2, weights.w
    probs = np.zeros(k_max + 1)
    probs[0] = w1 / w
    if w2 > 0 and k_max >= 1:
        ks = np.arange(1, k_max + 1, dtype=float)
        log_ratio = gammaln(w2 + ks) - gammaln(w2) - gammaln(w + 1.0 + ks) + gammaln(w + 1.0)
        probs[1:] = w1 / w * np.exp(log_ratio)
    deficit = survival(weights, k_max + 1)
    return FirstSuccessLaw(weights, k_max, make_pmf(0, probs, deficit=deficit, complete=False))
