"""Law of the success count S_n, its pgf and moments, and the Poisson bounds.

Covers the harmonic model (state-independent increments, alpha = 0) and the
state-dependent extension where the success probability at time n from k
accumulated successes is (w1 + k*alpha)/(w + n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from . import numkernel
from .errors import DomainError, InternalConsistencyError, LimitExceededError
from .numkernel import log_rising_factorial, rising_factorial

__all__ = [
    "Weights",
    "AlphaModel",
    "FinitePmf",
    "PoissonBoundReport",
    "make_pmf",
    "pmf_successes",
    "pmf_successes_exact",
    "pmf_successes_closed_form",
    "pmf_successes_gstirling",
    "pmf_successes_dobinski",
    "pgf_eval",
    "factorial_moments",
    "mean_variance",
    "poisson_bounds",
    "pmf_successes_geometric_n",
]


@dataclass(frozen=True)
class Weights:
    """The parameter pair (w1, w2) with w = w1 + w2; success probability at
    trial m is w1/(w+m-1)."""

    w1: float
    w2: float

    def __post_init__(self):
        if not self.w1 > 0:
            raise DomainError(f"w1 must be positive, got {self.w1}")
        if self.w2 < 0:
            raise DomainError(f"w2 must be nonnegative, got {self.w2}")

    @property
    def w(self) -> float:
        return self.w1 + self.w2


@dataclass(frozen=True)
class AlphaModel:
    """Weights plus the state-dependence exponent alpha in [0,1]."""

    weights: Weights
    alpha: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0,1], got {self.alpha}")


def _as_model(model) -> AlphaModel:
    if isinstance(model, AlphaModel):
        return model
    if isinstance(model, Weights):
        return AlphaModel(model, 0.0)
    raise DomainError(f"expected Weights or AlphaModel, got {type(model).__name__}")


@dataclass(frozen=True, eq=False)
class FinitePmf:
    """A finite-support probability sequence: probs[j] = P(X = offset + j).

    `deficit` records truncated mass when the law is not complete on the
    stored window.
    """

    offset: int
    probs: np.ndarray
    deficit: float = 0.0

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.probs))

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def p(self, k: int) -> float:
        j = k - self.offset
        if 0 <= j < len(self.probs):
            return float(self.probs[j])
        return 0.0

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))


_NEG_DUST = -1e-12
_COMPLETE_DRIFT = 1e-10


def make_pmf(offset: int, values, deficit: float = 0.0, complete: bool = True) -> FinitePmf:
    """Validated FinitePmf constructor.

    Negative floating dust is clamped to zero; when `complete` the total may
    drift from 1 by at most 1e-10 (renormalized), larger drift raises.
    """
    arr = np.asarray(values, dtype=float).copy()
    if arr.ndim != 1:
        raise DomainError("pmf values must be one-dimensional")
    low = arr.min() if len(arr) else 0.0
    if low < _NEG_DUST:
        raise InternalConsistencyError(f"pmf entry {low} below the dust tolerance")
    np.clip(arr, 0.0, None, out=arr)
    if complete:
        total = arr.sum()
        if abs(total - 1.0) > _COMPLETE_DRIFT:
            raise InternalConsistencyError(f"complete pmf sums to {total!r}")
        arr /= total
        deficit = 0.0
    arr.setflags(write=False)
    return FinitePmf(int(offset), arr, float(deficit))


@dataclass(frozen=True)
class PoissonBoundReport:
    """Total-variation distance between S_n and Poisson(mu_n), with the
    LeCam-type sandwich bounds."""

    mu_n: float
    sigma2_n: float
    tv_exact: float
    tv_lower: float
    tv_upper: float


def pmf_successes(model, n: int) -> FinitePmf:
    """Law of S_n on {0,...,n} by the forward recursion

    pi_{n+1}(k) = pi_n(k-1) (w1+(k-1)a)/(w+n) + pi_n(k) (1 - (w1+ka)/(w+n)).

    This is the canonical path: O(n^2) and numerically benign since every
    coefficient is a probability.
    """
    m = _as_model(model)
    if n < 0:
        raise DomainError("n must be >= 0")
    w1, w = m.weights.w1, m.weights.w
    a = m.alpha
    pi = np.zeros(n + 1)
    pi[0] = 1.0
    ks = np.arange(n + 1, dtype=float)
    for step in range(n):
        up = (w1 + a * ks[: step + 1]) / (w + step)
        if up[-1] > 1.0 + 1e-12 or up[0] < 0.0:
            raise InternalConsistencyError("transition probability outside [0,1]")
        moved = pi[: step + 1] * up
        pi[: step + 1] -= moved
        pi[1 : step + 2] += moved
    return make_pmf(0, pi)


def pmf_successes_exact(w1, w2, n: int, alpha=0) -> list[Fraction]:
    """Same forward recursion in exact rational arithmetic.

    Returns [P(S_n = 0), ..., P(S_n = n)] as Fractions; intended for
    small-n exactness checks.
    """
    w1, w2, a = Fraction(w1), Fraction(w2), Fraction(alpha)
    if w1 <= 0 or w2 < 0:
        raise DomainError("need w1 > 0 and w2 >= 0")
    w = w1 + w2
    pi = [Fraction(1)]
    for step in range(n):
        nxt = [Fraction(0)] * (len(pi) + 1)
        for k, pr in enumerate(pi):
            up = (w1 + a * k) / (w + step)
            nxt[k] += pr * (1 - up)
            nxt[k + 1] += pr * up
        pi = nxt
    return pi


def _logsumexp(terms) -> float:
    terms = [t for t in terms if t != -math.inf]
    if not terms:
        return -math.inf
    m = max(terms)
    return m + math.log(sum(math.exp(t - m) for t in terms))


def pmf_successes_closed_form(weights: Weights, n: int, table=None) -> FinitePmf:
    """Law of S_n through the exact Stirling representation

    pi_n(k) = (w1^k/[w]_n) sum_{l>=k} C(l,k) |s(n,l)| w2^(l-k),

    evaluated in log space against exact integer Stirling values.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if table is None:
        table = numkernel.stirling_first_unsigned(n)
    elif table.n_max < n:
        raise LimitExceededError(f"table covers n <= {table.n_max} < {n}")
    w1, w2, w = weights.w1, weights.w2, weights.w
    srow = table.row(n)
    log_s = [math.log(v) if v else -math.inf for v in srow]
    log_w2 = math.log(w2) if w2 > 0 else -math.inf
    log_norm = log_rising_factorial(w, n)
    out = np.empty(n + 1)
    for k in range(n + 1):
        if w2 == 0:
            lse = log_s[k]
        else:
            terms = [
                math.lgamma(l + 1) - math.lgamma(k + 1) - math.lgamma(l - k + 1)
                + log_s[l] + (l - k) * log_w2
                for l in range(k, n + 1)
            ]
            lse = _logsumexp(terms)
        out[k] = math.exp(k * math.log(w1) + lse - log_norm) if lse != -math.inf else 0.0
    return make_pmf(0, out)


def pmf_successes_gstirling(weights: Weights, n: int, limit: int = 150) -> FinitePmf:
    """Law of S_n through pi_n(k) = w1^k s_{w2}(n,k) / [w]_n with the
    generalized-Stirling table; cross-validation path."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if n > limit:
        raise LimitExceededError(f"float generalized-Stirling path limited to n <= {limit}")
    gt = numkernel.generalized_stirling(n, weights.w2)
    log_norm = log_rising_factorial(weights.w, n)
    lw1 = math.log(weights.w1)
    out = np.empty(n + 1)
    for k in range(n + 1):
        s = gt.value(n, k)
        out[k] = math.exp(k * lw1 + math.log(s) - log_norm) if s > 0 else 0.0
    return make_pmf(0, out)


def pmf_successes_dobinski(model, n: int, limit: int = 60) -> FinitePmf:
    """Law of S_n for alpha > 0 via P(S_n=k) = ([w1|a]_k/[w]_n) S(n,k;-1,-a,w2),
    with the Dobinski sum taken in exact rational arithmetic."""
    m = _as_model(model)
    if m.alpha == 0:
        raise DomainError("dobinski path needs alpha > 0; use the Stirling paths for alpha = 0")
    if n < 0:
        raise DomainError("n must be >= 0")
    if n > limit:
        raise LimitExceededError(f"exact-arithmetic path limited to n <= {limit}")
    a = Fraction(m.alpha)
    w1 = Fraction(m.weights.w1)
    w2 = Fraction(m.weights.w2)
    norm = rising_factorial(w1 + w2, n)
    out = np.empty(n + 1)
    riser = Fraction(1)  # [w1|alpha]_k
    for k in range(n + 1):
        s = numkernel.dobinski_generalized_exact(n, k, a, w2)
        out[k] = float(riser * s / norm)
        riser *= w1 + k * a
    return make_pmf(0, out)


def pgf_eval(weights: Weights, n: int, z: float) -> float:
    """E(z^{S_n}) = prod_{m<n} (w1 z + w2 + m)/(w + m)."""
    if n < 0:
        raise DomainError("n must be >= 0")
    w1, w2, w = weights.w1, weights.w2, weights.w
    out = 1.0
    for m in range(n):
        out *= (w1 * z + w2 + m) / (w + m)
    return out


def factorial_moments(weights: Weights, n: int, l: int) -> float:
    """Descending factorial moment E((S_n)_l) via the Stirling representation."""
    if n < 0 or l < 0:
        raise DomainError("n and l must be >= 0")
    if l == 0:
        return 1.0
    if l > n:
        return 0.0
    table = numkernel.stirling_first_unsigned(n)
    srow = table.row(n)
    w1, w = weights.w1, weights.w
    log_w = math.log(w)
    terms = []
    for k in range(l, n + 1):
        if srow[k] == 0:
            continue
        log_fall = math.lgamma(k + 1) - math.lgamma(k - l + 1)
        terms.append(log_fall + math.log(srow[k]) + (k - l) * log_w)
    lse = _logsumexp(terms)
    if lse == -math.inf:
        return 0.0
    return math.exp(l * math.log(w1) + lse - log_rising_factorial(w, n))


def mean_variance(model, n: int) -> tuple[float, float]:
    """(E(S_n), Var(S_n)) for state-independent increments (alpha = 0 only)."""
    m = _as_model(model)
    if m.alpha != 0:
        raise DomainError("closed-form mean/variance requires alpha = 0; use pmf moments instead")
    if n < 0:
        raise DomainError("n must be >= 0")
    w1, w2, w = m.weights.w1, m.weights.w2, m.weights.w
    ms = np.arange(n, dtype=float)
    mu = w1 * float(np.sum(1.0 / (w + ms)))
    sigma2 = w1 * float(np.sum((w2 + ms) / (w + ms) ** 2))
    return mu, sigma2


def _poisson_tail_cutoff(mu: float, tol: float) -> int:
    # Smallest K > mu with the Chernoff bound e^{-mu}(e mu / K)^K < tol,
    # certifying P(Poi(mu) >= K) < tol.
    k = max(int(math.ceil(mu)) + 1, 2)
    log_tol = math.log(tol)
    while -mu + k * (1.0 + math.log(mu) - math.log(k)) >= log_tol:
        k += 1
    return k


def poisson_bounds(weights: Weights, n: int) -> PoissonBoundReport:
    """Exact d_TV(S_n, Poi(mu_n)) plus the sandwich bounds

    (1/32) min(1, 1/mu) (mu - sigma^2) <= d_TV <= (1 - e^-mu)(mu - sigma^2)/mu.

    The Poisson tail is truncated at the smallest K whose Chernoff bound is
    below 1e-13, so tv_exact is reproducible bit-for-bit.
    """
    if n < 1:
        raise DomainError("poisson_bounds needs n >= 1")
    mu, sigma2 = mean_variance(weights, n)
    pmf = pmf_successes(weights, n)
    kmax = max(n, _poisson_tail_cutoff(mu, 1e-13))
    ks = np.arange(kmax + 1, dtype=float)
    pois = np.exp(ks * math.log(mu) - mu - gammaln(ks + 1.0))
    diff = pois.copy()
    diff[: n + 1] -= pmf.probs
    tv = 0.5 * float(np.abs(diff).sum())
    delta = mu - sigma2
    lower = (1.0 / 32.0) * min(1.0, 1.0 / mu) * delta
    upper = (1.0 - math.exp(-mu)) * delta / mu
    return PoissonBoundReport(mu, sigma2, tv, lower, upper)


def pmf_successes_geometric_n(model, p: float, tol: float = 1e-12) -> FinitePmf:
    """Law of S_N for a geometric observation window P(N=n) = p(1-p)^(n-1).

    The window is truncated once the remaining geometric mass q^M drops
    below `tol`; that mass is recorded as the deficit.
    """
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0,1)")
    m = _as_model(model)
    q = 1.0 - p
    horizon = max(1, int(math.ceil(math.log(tol) / math.log(q))))
    w1, w = m.weights.w1, m.weights.w
    a = m.alpha
    pi = np.zeros(horizon + 1)
    pi[0] = 1.0
    acc = np.zeros(horizon + 1)
    ks = np.arange(horizon + 1, dtype=float)
    weight = p
    for step in range(horizon):
        up = (w1 + a * ks[: step + 1]) / (w + step)
        moved = pi[: step + 1] * up
        pi[: step + 1] -= moved
        pi[1 : step + 2] += moved
        acc += weight * pi  # after step+1 trials, i.e. N = step+1
        weight *= q
    deficit = q**horizon
    return make_pmf(0, acc, deficit=deficit, complete=False)
