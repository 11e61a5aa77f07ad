"""Joint laws of the generalized species-sampling model.

A sample of size n splits into n0 hits of a beta-distributed reservoir
(failed draws) and k species with counts n_1,...,n_k recorded in order of
appearance.  Counts are size-biased, NOT exchangeable: permuting parts
changes the probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import numkernel
from .errors import DomainError
from .numkernel import log_rising_factorial, rising_factorial
from .success_counts import AlphaModel, Weights, _as_model

__all__ = [
    "SampleConfiguration",
    "dtg_joint",
    "dtg_two_param",
    "reservoir_success_joint",
    "reservoir_marginal",
    "alpha_first_success_pmf",
    "enumerate_configurations",
]


@dataclass(frozen=True)
class SampleConfiguration:
    """n0 reservoir hits plus species counts in order of appearance."""

    n0: int
    parts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(int(p) for p in self.parts))
        if self.n0 < 0:
            raise DomainError("n0 must be >= 0")
        if any(p < 1 for p in self.parts):
            raise DomainError("species counts must be >= 1")

    @property
    def n(self) -> int:
        return self.n0 + sum(self.parts)

    @property
    def k(self) -> int:
        return len(self.parts)


def _log_w1_alpha_riser(w1: float, alpha: float, k: int) -> float:
    """log [w1|alpha]_k = log prod_{i<k} (w1 + i alpha)."""
    return sum(math.log(w1 + i * alpha) for i in range(k))


def dtg_joint(model, cfg: SampleConfiguration) -> float:
    """Probability of observing exactly `cfg` in a sample of size cfg.n:

    n! ([w1|a]_k/[w]_n) ([w2]_{n0}/n0!) prod_l [1-a]_{n_l-1}/((n_l-1)! T_l),

    where T_l is the combined size of species l,...,k.  Structural zeros
    (w2 = 0 with reservoir hits; alpha = 1 with a repeated species) return
    0 rather than raising.
    """
    m = _as_model(model)
    w1, w2, w = m.weights.w1, m.weights.w2, m.weights.w
    a = m.alpha
    n, k, n0 = cfg.n, cfg.k, cfg.n0
    if n == 0:
        return 1.0
    if w2 == 0 and n0 > 0:
        return 0.0
    if a == 1.0 and any(p > 1 for p in cfg.parts):
        return 0.0
    lg = math.lgamma(n + 1) + _log_w1_alpha_riser(w1, a, k) - log_rising_factorial(w, n)
    if n0 > 0:
        lg += log_rising_factorial(w2, n0) - math.lgamma(n0 + 1)
    remaining = sum(cfg.parts)
    for p in cfg.parts:
        if p > 1:
            lg += log_rising_factorial(1.0 - a, p - 1)
        lg -= math.lgamma(p) + math.log(remaining)
        remaining -= p
    return math.exp(lg)


def dtg_two_param(alpha: float, w1: float, parts) -> float:
    """Two-parameter reduction: w2 = 0, no reservoir (the classical ordered
    species-count law; for alpha = 0 it is the Ewens ordered form)."""
    cfg = SampleConfiguration(0, tuple(parts))
    return dtg_joint(AlphaModel(Weights(w1, 0.0), alpha), cfg)


def reservoir_success_joint(model, n: int, n0: int, k: int) -> float:
    """P(N_n(0) = n0, S_n = k) = C(n,n0) [w2]_{n0} [w1|a]_k / [w]_n
    * S(n-n0, k; -1, -alpha, 0)."""
    m = _as_model(model)
    if not (0 <= n0 <= n and 0 <= k <= n - n0):
        raise DomainError("need n0 + k <= n with nonnegative parts")
    w1, w2 = m.weights.w1, m.weights.w2
    a = m.alpha
    if w2 == 0 and n0 > 0:
        return 0.0
    if a == 0:
        table = numkernel.stirling_first_unsigned(n - n0)
        s = table.unsigned(n - n0, k)
        if s == 0:
            return 0.0
        return _reservoir_prefactor(m, n, n0) * math.exp(
            k * math.log(w1) + math.log(s)
        )
    s = numkernel.dobinski_generalized_exact(n - n0, k, Fraction(a), Fraction(0))
    if s == 0:
        return 0.0
    riser = 1.0
    for i in range(k):
        riser *= w1 + i * a
    return _reservoir_prefactor(m, n, n0) * riser * float(s)


def _reservoir_prefactor(m: AlphaModel, n: int, n0: int) -> float:
    """C(n,n0) [w2]_{n0} / [w]_n (the k-independent factor)."""
    w2, w = m.weights.w2, m.weights.w
    lg = (
        math.lgamma(n + 1)
        - math.lgamma(n0 + 1)
        - math.lgamma(n - n0 + 1)
        - log_rising_factorial(w, n)
    )
    if n0 > 0:
        lg += log_rising_factorial(w2, n0)
    return math.exp(lg)


def reservoir_marginal(weights: Weights, n: int, n0: int) -> float:
    """Beta-binomial law of the reservoir hits:
    P(N_n(0) = n0) = C(n,n0) [w2]_{n0} [w1]_{n-n0} / [w]_n (alpha-free)."""
    if not 0 <= n0 <= n:
        raise DomainError("need 0 <= n0 <= n")
    w1, w2, w = weights.w1, weights.w2, weights.w
    if w2 == 0 and n0 > 0:
        return 0.0
    lg = (
        math.lgamma(n + 1)
        - math.lgamma(n0 + 1)
        - math.lgamma(n - n0 + 1)
        - log_rising_factorial(w, n)
    )
    if n0 > 0:
        lg += log_rising_factorial(w2, n0)
    if n - n0 > 0:
        lg += log_rising_factorial(w1, n - n0)
    return math.exp(lg)


def alpha_first_success_pmf(weights: Weights, n: int) -> float:
    """P(K_1+ = n) in the alpha-extended chain: w1 [w2]_{n-1} / [w]_n.

    The value does not depend on alpha (the chain cannot leave state 0
    except by the first success, whose rate is alpha-free).
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    w1, w2, w = weights.w1, weights.w2, weights.w
    if w2 == 0:
        return 1.0 if n == 1 else 0.0
    return w1 * math.exp(
        log_rising_factorial(w2, n - 1) - log_rising_factorial(w, n)
    )


def _compositions(total: int):
    """All ordered compositions of `total` into positive parts."""
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in _compositions(total - first):
            yield (first, *rest)


def enumerate_configurations(n: int):
    """Every SampleConfiguration of total size n (reservoir hits included)."""
    if n < 0:
        raise DomainError("n must be >= 0")
    for n0 in range(n + 1):
        for parts in _compositions(n - n0):
            yield SampleConfiguration(n0, parts)
