"""The growth-collapse (disaster) chain: from state n the walk moves to
n+1 with probability p_n = 1 - q_n or collapses to 0 with probability
q_n = w1/(w + n^alpha).

Classification, invariant measures, the w2 = 0 extinction pgf, and
truncated-matrix overcrossing times T_1(n) (equivalently the marginal law
of the running maximum).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    NotPositiveRecurrentError,
    SingularSystemError,
)
from .numkernel import log_rising_factorial
from .success_counts import FinitePmf, Weights, make_pmf

__all__ = [
    "ChainSpec",
    "ChainClassification",
    "TruncatedMatrix",
    "classify",
    "invariant_measure",
    "truncated_matrix",
    "overcrossing_tail",
    "expected_overcrossing",
    "extinction_pgf",
]


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of the disaster chain; q(n) is the collapse probability."""

    weights: Weights
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")

    def q(self, n: int) -> float:
        return self.weights.w1 / (self.weights.w + float(n) ** self.alpha)

    def p(self, n: int) -> float:
        return 1.0 - self.q(n)

    def q_array(self, n_max: int) -> np.ndarray:
        ns = np.arange(n_max + 1, dtype=float)
        return self.weights.w1 / (self.weights.w + ns**self.alpha)


class ChainClassification(enum.Enum):
    ABSORBING_CERTAIN_EXTINCTION = "absorbing_certain_extinction"
    ABSORBING_POSSIBLE_ESCAPE = "absorbing_possible_escape"
    TRANSIENT = "transient"
    NULL_RECURRENT = "null_recurrent"
    POSITIVE_RECURRENT = "positive_recurrent"


@dataclass(frozen=True, eq=False)
class TruncatedMatrix:
    """Upper-left (n+1)x(n+1) corner of the transition matrix.

    Row i holds q_i in column 0 and p_i in column i+1 when i < n; the last
    row keeps only q_n, so the matrix is substochastic and its powers give
    tails of the overcrossing time.
    """

    n: int
    entries: np.ndarray


def classify(spec: ChainSpec) -> ChainClassification:
    """Recurrence class as a function of (w2, alpha, w1)."""
    if spec.weights.w2 == 0:
        if spec.alpha <= 1:
            return ChainClassification.ABSORBING_CERTAIN_EXTINCTION
        return ChainClassification.ABSORBING_POSSIBLE_ESCAPE
    if spec.alpha > 1:
        return ChainClassification.TRANSIENT
    if spec.alpha < 1:
        return ChainClassification.POSITIVE_RECURRENT
    if spec.weights.w1 <= 1:
        return ChainClassification.NULL_RECURRENT
    return ChainClassification.POSITIVE_RECURRENT


def _product_tail_bound(spec: ChainSpec, start: int, t_start: float) -> tuple[int, float]:
    """Upper bound on sum_{m > M} prod_{k<m} p_k for an adaptively grown M.

    On each dyadic block (m, 2m] the one-step ratios are at most
    exp(-q(2m)), giving a geometric block bound; blocks shrink like
    exp(-m q(2m)) -> 0 since alpha < 1.  Returns (M, bound).
    """
    m = max(start, 2)
    t = t_start  # running bound on prod_{k<m} p_k
    total = 0.0
    for _ in range(200):
        q_block = spec.q(2 * m)
        block = t * math.exp(-q_block) / (1.0 - math.exp(-q_block))
        decay = math.exp(-m * q_block)
        if block < 1e-300 or (block < 1e-15 and decay < 0.5):
            return m, total + block / max(1.0 - decay, 0.5)
        total += block
        t *= decay
        m *= 2
    return m, total + block  # pragma: no cover - defensive


def invariant_measure(spec: ChainSpec, n_max: int) -> FinitePmf:
    """Invariant probability measure on {0,...,n_max} with recorded deficit.

    Critical case alpha = 1, w1 > 1: closed form pi_n = pi_0 [w2]_n/[w]_n
    with pi_0 = (w1-1)/(w-1), no truncation in the normalization.
    Case alpha < 1: pi_n proportional to prod_{k<n} p_k, normalized over a
    horizon grown until the certified product-tail bound is below 1e-12.
    """
    if classify(spec) is not ChainClassification.POSITIVE_RECURRENT:
        raise NotPositiveRecurrentError("invariant measure exists only in the positive-recurrent case")
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    w1, w2, w = spec.weights.w1, spec.weights.w2, spec.weights.w
    if spec.alpha == 1.0:
        pi0 = (w1 - 1.0) / (w - 1.0)
        probs = np.empty(n_max + 1)
        probs[0] = pi0
        for n in range(1, n_max + 1):
            probs[n] = pi0 * math.exp(
                log_rising_factorial(w2, n) - log_rising_factorial(w, n)
            )
        deficit = max(0.0, 1.0 - float(probs.sum()))
        return make_pmf(0, probs, deficit=deficit, complete=False)
    # alpha < 1: unnormalized weights t_n = prod_{k<n} p_k
    t = [1.0]
    while True:
        m = len(t)
        nxt = t[-1] * spec.p(m - 1)
        if m > n_max and nxt < 1e-17:
            break
        t.append(nxt)
        if m > 10**7:
            raise DomainError("invariant-measure horizon exploded; alpha too close to 1?")
    horizon, tail = _product_tail_bound(spec, len(t), t[-1])
    norm = float(np.sum(t)) + tail
    probs = np.asarray(t[: n_max + 1]) / norm
    deficit = max(0.0, 1.0 - float(probs.sum()))
    return make_pmf(0, probs, deficit=deficit, complete=False)


def truncated_matrix(spec: ChainSpec, n: int) -> TruncatedMatrix:
    if n < 1:
        raise DomainError("n must be >= 1")
    q = spec.q_array(n)
    mat = np.zeros((n + 1, n + 1))
    mat[:, 0] = q
    idx = np.arange(n)
    mat[idx, idx + 1] = 1.0 - q[:-1]
    return TruncatedMatrix(n, mat)


def overcrossing_tail(spec: ChainSpec, n0: int, n: int, l: int) -> float:
    """P(T_1(n) > l | N_0 = n0) = e_{n0}' P_(n)^l 1, the probability the
    chain has not yet exceeded level n after l steps.

    Also the marginal law P(max_{m<=l} N_m <= n | N_0 = n0); equals 1 for
    l <= n - n0 since the overshoot is one unit per step.
    """
    if not 0 <= n0 <= n:
        raise DomainError("need 0 <= n0 <= n")
    if l < 0:
        raise DomainError("l must be >= 0")
    q = spec.q_array(n)
    p = 1.0 - q
    v = np.zeros(n + 1)
    v[n0] = 1.0
    for _ in range(l):
        new = np.zeros(n + 1)
        new[0] = float(np.dot(v, q))
        new[1:] = v[:-1] * p[:-1]
        v = new
    return float(v.sum())


def expected_overcrossing(spec: ChainSpec, n0: int, n: int) -> float:
    """E(T_1(n) | N_0 = n0) = e_{n0}' (I - P_(n))^{-1} 1 by direct solve."""
    if not 0 <= n0 <= n:
        raise DomainError("need 0 <= n0 <= n")
    mat = truncated_matrix(spec, n).entries
    a = np.eye(n + 1) - mat
    try:
        x = np.linalg.solve(a, np.ones(n + 1))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - construction bug guard
        raise SingularSystemError("I - P_(n) is singular; truncation is broken") from exc
    return float(x[n0])


def extinction_pgf(w1: float, alpha: float, n: int, z: float) -> tuple[float, float]:
    """w2 = 0 case: (E(z^tau_{n,0}), escape mass).

    E(z^tau) = sum_{m>=n} q_m z^m prod_{k=n}^{m-1} p_k for z in [0,1); the
    series is cut once the geometric bound z^{m+1}/(1-z) certifies the tail.
    The escape mass prod_{m>=n} p_m is exactly 0 for alpha <= 1; for
    alpha > 1 it is evaluated in log space with an integral tail bound.
    """
    if w1 <= 0:
        raise DomainError("w1 must be positive")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if n < 0:
        raise DomainError("n must be >= 0")
    if not 0.0 <= z < 1.0:
        raise DomainError("pgf series needs z in [0,1)")
    spec = ChainSpec(Weights(w1, 0.0), alpha)
    value = 0.0
    prod = 1.0
    m = n
    if z > 0.0:
        while z ** (m + 1) / (1.0 - z) > 1e-15 and prod > 0.0:
            value += spec.q(m) * z**m * prod
            prod *= spec.p(m)
            m += 1
    elif n == 0:
        value = 1.0  # tau = 0 from the absorbing state, z^0 = 1
    if alpha <= 1:
        return value, 0.0
    return value, math.exp(_log_escape_mass(spec, n))


def _log_escape_mass(spec: ChainSpec, n: int) -> float:
    """log prod_{m>=n} p_m for alpha > 1: direct log1p summation to a horizon
    M, then sum_{m>M} log(1-q_m) = -sum_j S_j/j with the power sums
    S_j = sum_{m>M} q_m^j expanded in Hurwitz zetas of m^(-alpha).

    Truncating both expansions at order 4 leaves an error below
    ~zeta(5 alpha, M) which is negligible for the horizons used here.
    """
    from scipy.special import zeta as hurwitz_zeta

    w1, w = spec.weights.w1, spec.weights.w
    alpha = spec.alpha
    horizon = max(n, 10**4, int(math.ceil((10.0 * w) ** (1.0 / alpha))))
    ms = np.arange(max(n, 1), horizon + 1, dtype=float)
    q = w1 / (w + ms**alpha)
    log_escape = float(np.log1p(-q).sum())
    if n == 0:
        return -math.inf  # q_0 = 1: immediate collapse is certain
    tail = 0.0
    for j in range(1, 5):
        s_j = sum(
            (-1.0) ** i * math.comb(j + i - 1, i) * w**i
            * float(hurwitz_zeta((j + i) * alpha, horizon + 1))
            for i in range(4)
        )
        tail -= w1**j * s_j / j
    return log_escape + tail
