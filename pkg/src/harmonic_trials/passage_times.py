"""Laws of the l-th success time K_l+, the excess time K_l = K_l+ - l,
the gaps L_l+ = K_l+ - K_{l-1}+, and the conditional (Markov) structure.

All for state-independent increments (alpha = 0).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from . import numkernel
from .errors import DomainError
from .numkernel import log_rising_factorial
from .success_counts import FinitePmf, Weights, make_pmf

__all__ = [
    "TriangularTable",
    "GapLaw",
    "passage_table",
    "passage_pmf_ewens",
    "excess_pmf",
    "gap_pmf",
    "gap_tail_neuts",
    "conditional_gap_tail",
    "tail_asymptote",
]


@dataclass(frozen=True, eq=False)
class TriangularTable:
    """P[n, l] = P(K_l+ = n) for 1 <= l <= l_max, l <= n <= n_max.

    Column sums fall short of 1 by the mass beyond n_max, recorded per
    column via `column_deficit`.
    """

    weights: Weights
    l_max: int
    n_max: int
    entries: np.ndarray  # shape (n_max+1, l_max+1); column 0 unused

    def prob(self, n: int, l: int) -> float:
        if not 1 <= l <= self.l_max:
            raise DomainError(f"l={l} outside 1..{self.l_max}")
        if not 0 <= n <= self.n_max:
            raise DomainError(f"n={n} outside 0..{self.n_max}")
        return float(self.entries[n, l])

    def column(self, l: int) -> FinitePmf:
        if not 1 <= l <= self.l_max:
            raise DomainError(f"l={l} outside 1..{self.l_max}")
        probs = self.entries[l:, l]
        return make_pmf(l, probs, deficit=self.column_deficit(l), complete=False)

    def column_deficit(self, l: int) -> float:
        return max(0.0, 1.0 - float(self.entries[:, l].sum()))


@dataclass(frozen=True, eq=False)
class GapLaw:
    """Law of the gap L_l+ between the (l-1)-th and l-th success.

    `n_truncation_bound` certifies how much each entry may undershoot due to
    cutting the sum over the (l-1)-th success position at the horizon.
    """

    l: int
    probs: FinitePmf
    n_truncation_bound: float

    @property
    def deficit(self) -> float:
        return self.probs.deficit


def _first_success_column(weights: Weights, n_max: int) -> np.ndarray:
    """P(K_1+ = n) for n = 0..n_max (index 0 unused)."""
    w1, w2, w = weights.w1, weights.w2, weights.w
    col = np.zeros(n_max + 1)
    if w2 == 0:
        if n_max >= 1:
            col[1] = 1.0
        return col
    ns = np.arange(1, n_max + 1, dtype=float)
    log_surv = gammaln(w2 + ns - 1) - gammaln(w2) - gammaln(w + ns - 1) + gammaln(w)
    col[1:] = w1 / (w + ns - 1) * np.exp(log_surv)
    return col


def passage_table(weights: Weights, l_max: int, n_max: int) -> TriangularTable:
    """Fill P(K_l+ = n) by the three-term recursion

    P(K_{l+1}+ = n+1) = w1/(w+n) P(K_l+ = n) + (w2+n-1)/(w+n) P(K_{l+1}+ = n),

    launched from the first column (the first-success law; a point mass at 1
    when w2 = 0) — the diagonal P(K_l+ = l) = prod_{m<l} w1/(w+m) emerges
    from the n = l step.
    """
    if l_max < 1 or n_max < l_max:
        raise DomainError("need 1 <= l_max <= n_max")
    w1, w2, w = weights.w1, weights.w2, weights.w
    entries = np.zeros((n_max + 1, l_max + 1))
    entries[:, 1] = _first_success_column(weights, n_max)
    for l in range(1, l_max):
        for n in range(l, n_max):
            entries[n + 1, l + 1] = (
                w1 / (w + n) * entries[n, l]
                + (w2 + n - 1) / (w + n) * entries[n, l + 1]
            )
    return TriangularTable(weights, l_max, n_max, entries)


def passage_pmf_ewens(w1: float, l: int, n: int) -> float:
    """Closed form for the w2 = 0 passage law:

    P(K_l+ = n) = w1^(l-1) |s(n-1,l-1)| / [w1+1]_{n-1},   n >= l,

    with the singular first column P(K_1+ = n) = delta_{n,1}.
    """
    if w1 <= 0:
        raise DomainError("w1 must be positive")
    if l < 1 or n < 1:
        raise DomainError("need l >= 1 and n >= 1")
    if n < l:
        return 0.0
    if l == 1:
        return 1.0 if n == 1 else 0.0
    table = numkernel.stirling_first_unsigned(n - 1)
    s = table.unsigned(n - 1, l - 1)
    if s == 0:
        return 0.0
    return math.exp(
        (l - 1) * math.log(w1) + math.log(s) - log_rising_factorial(w1 + 1.0, n - 1)
    )


def excess_pmf(weights: Weights, l: int, n_max: int) -> FinitePmf:
    """Law of the excess time K_l = K_l+ - l on {0,...,n_max}."""
    if l < 1 or n_max < 0:
        raise DomainError("need l >= 1 and n_max >= 0")
    table = passage_table(weights, l, n_max + l)
    col = table.column(l)
    return make_pmf(0, col.probs, deficit=col.deficit, complete=False)


def gap_pmf(
    weights: Weights,
    l: int,
    i_max: int,
    horizon: int,
    tol: float = 1e-9,
) -> GapLaw:
    """Law of the gap L_l+ for l >= 2 (for l = 1 the gap is K_1+ itself).

    Conditioning on the (l-1)-th success position n and multiplying the
    inter-success failure probabilities gives

      P(L_l+ = i) = sum_n P(K_{l-1}+ = n) [w2+n]_{i-1}/[w+n]_{i-1} w1/(w+n+i-1).

    The sum over n is cut at `horizon`; the neglected mass per entry is at
    most P(K_{l-1}+ > horizon), reported as `n_truncation_bound` (a warning
    is emitted when it exceeds `tol` — heavy tails can make certification at
    a given horizon impossible, which is reported, not fatal).
    """
    if l < 2:
        raise DomainError("gap_pmf needs l >= 2")
    if i_max < 1 or horizon < l - 1:
        raise DomainError("need i_max >= 1 and horizon >= l-1")
    w1, w2, w = weights.w1, weights.w2, weights.w
    table = passage_table(weights, l - 1, horizon)
    mass_n = table.entries[:, l - 1]  # P(K_{l-1}+ = n); zero for n < l-1
    ns = np.arange(horizon + 1, dtype=float)
    probs = np.zeros(i_max)
    # log([w2+n]_{i-1}/[w+n]_{i-1}) per n, extended one factor per i step;
    # rows with zero mass may hit log(0) and are clipped harmlessly.
    log_ratio = np.zeros(horizon + 1)
    for i in range(1, i_max + 1):
        term = np.exp(log_ratio) * (w1 / (w + ns + i - 1))
        probs[i - 1] = float(np.dot(mass_n, term))
        log_ratio += np.log(np.maximum(w2 + ns + i - 1, 1e-300))
        log_ratio -= np.log(w + ns + i - 1)
    bound = table.column_deficit(l - 1)
    if bound > tol:
        warnings.warn(
            f"gap_pmf: horizon {horizon} leaves P(K_{l-1}+ > horizon) = {bound:.3g} "
            f"> tol = {tol:.3g}; entries undershoot by up to that much",
            stacklevel=2,
        )
    deficit = max(0.0, 1.0 - float(probs.sum()))
    pmf = make_pmf(1, probs, deficit=deficit, complete=False)
    return GapLaw(l, pmf, bound)


def gap_tail_neuts(l: int, i: int) -> float:
    """Alternating-sum tail for (w1,w2) = (1,0):

    sum_{k=0}^{i} (-1)^k C(i,k) (1+k)^{-l},

    evaluated in exact rationals (the alternating sum cancels badly in
    floating point for i beyond ~30).  In this module's indexing it is the
    tail P(L_{l+1}+ > i) of the gap following the l-th success.
    """
    if l < 1 or i < 0:
        raise DomainError("need l >= 1 and i >= 0")
    total = Fraction(0)
    for k in range(i + 1):
        term = Fraction(math.comb(i, k), (1 + k) ** l)
        total = total + term if k % 2 == 0 else total - term
    return float(total)


def conditional_gap_tail(weights: Weights, m: int, n: int) -> float:
    """P(K_{l+1}+ - m > n | K_l+ = m) = [w2+m]_n / [w+m]_n."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return 1.0
    w2m = weights.w2 + m
    if w2m <= 0:
        if w2m == 0:
            return 0.0
        raise DomainError("need w2 + m > 0 (m >= 1 when w2 = 0)")
    return math.exp(
        log_rising_factorial(w2m, n) - log_rising_factorial(weights.w + m, n)
    )


def tail_asymptote(weights: Weights, m: int) -> tuple[float, float]:
    """(index, prefactor) of the conditional gap tail:

    [w2+m]_n/[w+m]_n = Gamma(w+m)/Gamma(w2+m) (n^-w1 + O(n^-(w1+1))).
    """
    if weights.w2 + m <= 0:
        raise DomainError("need w2 + m > 0 (m >= 1 when w2 = 0)")
    prefactor = math.exp(math.lgamma(weights.w + m) - math.lgamma(weights.w2 + m))
    return weights.w1, prefactor
