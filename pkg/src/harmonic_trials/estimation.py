"""Maximum-likelihood and moment estimation of (w1, w2).

Estimators from (a) an observed 0/1 trial sequence and (b) a sample of
first-success times.  The two-parameter fits use the substitution strategy:
the w1-score gives w1 as a function of w = w1 + w2, which turns the second
score equation into a one-variable root problem solved by bracket scan plus
Brent iteration.  Covariances come from the negated inverse of the numeric
observed-information matrix; singular or boundary cases report covariance
as unavailable rather than pseudo-inverting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DomainError,
    InfeasibleMomentsError,
    InsufficientDataError,
    NonconvergenceError,
)
from .numkernel import digamma
from .success_counts import Weights

__all__ = [
    "TrialSequence",
    "EstimateReport",
    "log_likelihood_sequence",
    "mle_sequence",
    "mle_ewens",
    "mle_first_success",
    "log_likelihood_first_success",
    "method_of_moments_first_success",
]

_SCORE_TOL = 1e-9
_MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class TrialSequence:
    """An observed 0/1 sequence; k is the number of successes."""

    bits: np.ndarray

    @classmethod
    def from_iterable(cls, values) -> "TrialSequence":
        arr = np.asarray(list(values) if not hasattr(values, "__len__") else values)
        arr = arr.astype(np.int8)
        if arr.ndim != 1 or not np.all((arr == 0) | (arr == 1)):
            raise DomainError("bits must be a flat 0/1 sequence")
        arr.setflags(write=False)
        return cls(arr)

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def k(self) -> int:
        return int(self.bits.sum())

    def failure_positions(self) -> np.ndarray:
        """0-based indices m with bit m+1 = 0 (so the factor is w2 + m)."""
        return np.nonzero(self.bits == 0)[0]


@dataclass(frozen=True, eq=False)
class EstimateReport:
    """Parameter estimates with convergence diagnostics.

    `boundary` is set (and `converged` is False) when the likelihood has no
    interior stationary point; the estimates then record the boundary limit.
    """

    w1_hat: float
    w2_hat: float
    constraint: str
    loglik: float
    iterations: int
    converged: bool
    boundary: str | None = None
    covariance: np.ndarray | None = None

    @property
    def w_hat(self) -> float:
        return self.w1_hat + self.w2_hat

    def stderr(self) -> np.ndarray | None:
        if self.covariance is None:
            return None
        return np.sqrt(np.diag(self.covariance))


def _loglik_seq_raw(w1: float, w2: float, seq: TrialSequence) -> float:
    if w1 <= 0 or w2 < 0:
        return -math.inf
    factors = w2 + seq.failure_positions()
    if np.any(factors <= 0):
        return -math.inf
    w = w1 + w2
    return (
        seq.k * math.log(w1)
        + float(np.log(factors).sum())
        - (math.lgamma(w + seq.n) - math.lgamma(w))
    )


def log_likelihood_sequence(weights: Weights, seq: TrialSequence) -> float:
    """log P(I = i) under (w1, w2); -inf for impossible sequences."""
    return _loglik_seq_raw(weights.w1, weights.w2, seq)


def _digamma_diff(x: float, n: int) -> float:
    """psi(x+n) - psi(x) = sum_{m<n} 1/(x+m)."""
    return digamma(x + n) - digamma(x)


def _hessian(f, x: np.ndarray) -> np.ndarray:
    """Central-difference Hessian with steps h_j = max(1e-5, 1e-5 |x_j|)."""
    x = np.asarray(x, dtype=float)
    d = len(x)
    h = np.maximum(1e-5, 1e-5 * np.abs(x))
    hess = np.empty((d, d))
    f0 = f(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h[i]
        hess[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(d)
            ej[j] = h[j]
            hess[i, j] = hess[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return hess


def _covariance(f, params) -> np.ndarray | None:
    hess = _hessian(f, np.asarray(params, dtype=float))
    if not np.all(np.isfinite(hess)):
        return None
    info = -hess
    eig = np.linalg.eigvalsh(info)
    if eig.min() <= 0:
        return None
    return np.linalg.inv(info)


def _scan_sign_change(g, grid):
    """First adjacent sign change of g along grid; None if there is none."""
    prev_x = prev_v = None
    for x in grid:
        v = g(x)
        if not math.isfinite(v):
            prev_x = prev_v = None
            continue
        if prev_v is not None and (v == 0.0 or (prev_v > 0) != (v > 0)):
            return prev_x, x
        prev_x, prev_v = x, v
    return None


def _brent(g, lo: float, hi: float) -> tuple[float, int]:
    root, res = brentq(
        g, lo, hi, xtol=1e-13, rtol=1e-13, maxiter=_MAX_ITER, full_output=True
    )
    if not res.converged:
        raise NonconvergenceError("root iteration hit the cap without converging")
    return float(root), int(res.iterations)


def _boundary_report(constraint, w1_hat, w2_hat, flag, loglik=math.nan) -> EstimateReport:
    return EstimateReport(
        w1_hat=w1_hat,
        w2_hat=w2_hat,
        constraint=constraint,
        loglik=loglik,
        iterations=0,
        converged=False,
        boundary=flag,
        covariance=None,
    )


def _parse_constraint(constraint):
    if constraint == "free":
        return "free", None
    if constraint == "w=1":
        return "w=1", None
    if isinstance(constraint, str) and constraint.startswith("w2="):
        return "w2", float(constraint[3:])
    raise DomainError(f"unknown constraint {constraint!r}; use 'free', 'w=1' or 'w2=<value>'")


def mle_sequence(seq: TrialSequence, constraint: str = "free") -> EstimateReport:
    """MLE of (w1, w2) from a trial sequence.

    constraint: 'free' (both parameters), 'w=1' (one parameter, w1 in (0,1))
    or 'w2=<value>' (w2 held fixed; 'w2=0' is the Ewens case, which depends
    on the data only through (n, k)).
    """
    if seq.n < 2:
        raise InsufficientDataError("need a sequence of length >= 2")
    kind, value = _parse_constraint(constraint)
    if kind == "free":
        return _mle_seq_free(seq)
    if kind == "w=1":
        return _mle_seq_w_eq_one(seq)
    report = _mle_counts_w2_fixed(seq.n, seq.k, value, constraint)
    loglik = _loglik_seq_raw(report.w1_hat, value, seq) if report.converged else report.loglik
    return EstimateReport(
        report.w1_hat,
        report.w2_hat,
        constraint,
        loglik,
        report.iterations,
        report.converged,
        report.boundary,
        report.covariance,
    )


def mle_ewens(n: int, k: int) -> EstimateReport:
    """Ewens-case (w2 = 0) MLE; needs only the sufficient statistic (n, k).

    The reported loglik is the profile term k log w1 - log([w1]_n / what the
    failure factors contribute is data-dependent and unknown here), so it is
    NaN; use mle_sequence(seq, 'w2=0') when the full sequence is available.
    """
    if n < 2:
        raise InsufficientDataError("need n >= 2")
    return _mle_counts_w2_fixed(n, k, 0.0, "w2=0")


def _mle_counts_w2_fixed(n: int, k: int, v: float, constraint: str) -> EstimateReport:
    if v < 0:
        raise DomainError("fixed w2 must be >= 0")
    if not 0 <= k <= n:
        raise DomainError("need 0 <= k <= n")
    if k == 0 or (v == 0.0 and k == 1):
        # sum_m x/(x+v+m) stays above k for every x > 0: maximum at w1 -> 0
        return _boundary_report(constraint, 0.0, v, "w1->0")
    if k == n:
        return _boundary_report(constraint, math.inf, v, "w1->inf")

    def scaled(x):
        # k - x * (psi(x+v+n) - psi(x+v)): strictly decreasing, same sign
        # as the score, safe for bracketing
        return k - x * _digamma_diff(x + v, n)

    def score(x):
        return k / x - _digamma_diff(x + v, n)

    lo = hi = 1.0
    for _ in range(_MAX_ITER):
        if scaled(lo) > 0:
            break
        lo /= 4.0
    for _ in range(_MAX_ITER):
        if scaled(hi) < 0:
            break
        hi *= 4.0
    root, iters = _brent(score, lo, hi)
    converged = abs(score(root)) <= _SCORE_TOL

    def profile(params):
        x = params[0]
        if x <= 0:
            return -math.inf
        return k * math.log(x) - (math.lgamma(x + v + n) - math.lgamma(x + v))

    cov = _covariance(profile, [root])
    return EstimateReport(
        w1_hat=root,
        w2_hat=v,
        constraint=constraint,
        loglik=math.nan,
        iterations=iters,
        converged=converged,
        covariance=cov,
    )


def _mle_seq_w_eq_one(seq: TrialSequence) -> EstimateReport:
    n, k = seq.n, seq.k
    fail1 = seq.failure_positions() + 1  # trial numbers m with i_m = 0
    if k == 0:
        return _boundary_report("w=1", 0.0, 1.0, "w1->0")
    if k == n:
        return _boundary_report("w=1", 1.0, 0.0, "w2->0")

    def scaled(x):
        return k - float(np.sum(x / (fail1 - x)))

    def score(x):
        return k / x - float(np.sum(1.0 / (fail1 - x)))

    eps = 1e-12
    if 1 not in fail1 and scaled(1.0 - eps) >= 0:
        report = _boundary_report("w=1", 1.0, 0.0, "w2->0")
        return report
    lo = 0.5
    for _ in range(_MAX_ITER):
        if scaled(lo) > 0:
            break
        lo /= 4.0
    hi = 1.0 - eps
    bracket = _scan_sign_change(scaled, np.linspace(lo, hi, 64))
    if bracket is None:
        return _boundary_report("w=1", 1.0, 0.0, "w2->0")
    root, iters = _brent(score, *bracket)
    converged = abs(score(root)) <= _SCORE_TOL

    def loglik_vec(params):
        return _loglik_seq_raw(params[0], 1.0 - params[0], seq)

    cov = _covariance(loglik_vec, [root])
    return EstimateReport(
        w1_hat=root,
        w2_hat=1.0 - root,
        constraint="w=1",
        loglik=_loglik_seq_raw(root, 1.0 - root, seq),
        iterations=iters,
        converged=converged,
        covariance=cov,
    )


def _mle_seq_free(seq: TrialSequence) -> EstimateReport:
    n, k = seq.n, seq.k
    if k == 0:
        return _boundary_report("free", 0.0, math.nan, "w1->0")
    if k == n:
        return _boundary_report("free", math.inf, 0.0, "w1->inf")
    fail0 = seq.failure_positions().astype(float)

    def w1_of(wv):
        return k / _digamma_diff(wv, n)

    def g(wv):
        w2v = wv - w1_of(wv)
        if w2v <= 0 or w2v + fail0[0] <= 0:
            return math.nan
        return float(np.sum(1.0 / (w2v + fail0))) - _digamma_diff(wv, n)

    # left end of the domain: w2(w) = 0, i.e. w * (psi(w+n) - psi(w)) = k
    if k >= 2:
        h = lambda wv: wv * _digamma_diff(wv, n) - k
        hi = 1.0
        for _ in range(_MAX_ITER):
            if h(hi) > 0:
                break
            hi *= 4.0
        w_min, _ = _brent(h, 1e-12, hi)
    else:
        w_min = 0.0
    lo = max(w_min * (1.0 + 1e-8), 1e-9)
    grid = np.geomspace(lo, 1e8, 400)
    bracket = _scan_sign_change(g, grid)
    if bracket is None:
        finite = [g(x) for x in grid if math.isfinite(g(x))]
        if finite and max(finite) < 0:
            # likelihood increases toward w2 = 0: report the Ewens boundary fit
            ewens = _mle_counts_w2_fixed(n, k, 0.0, "free")
            return EstimateReport(
                w1_hat=ewens.w1_hat,
                w2_hat=0.0,
                constraint="free",
                loglik=_loglik_seq_raw(ewens.w1_hat, 0.0, seq),
                iterations=ewens.iterations,
                converged=False,
                boundary="w2->0",
                covariance=None,
            )
        return _boundary_report("free", math.nan, math.inf, "w2->inf")
    w_root, iters = _brent(g, *bracket)
    w1_hat = w1_of(w_root)
    w2_hat = w_root - w1_hat
    r1 = k / w1_hat - _digamma_diff(w_root, n)
    r2 = g(w_root)
    converged = max(abs(r1), abs(r2)) <= _SCORE_TOL

    def loglik_vec(params):
        return _loglik_seq_raw(params[0], params[1], seq)

    cov = _covariance(loglik_vec, [w1_hat, w2_hat])
    return EstimateReport(
        w1_hat=w1_hat,
        w2_hat=w2_hat,
        constraint="free",
        loglik=_loglik_seq_raw(w1_hat, w2_hat, seq),
        iterations=iters,
        converged=converged,
        covariance=cov,
    )


def _loglik_first_raw(w1: float, w2: float, vals: np.ndarray, counts: np.ndarray) -> float:
    if w1 <= 0 or w2 < 0:
        return -math.inf
    if w2 == 0 and np.any(vals > 1):
        return -math.inf
    w = w1 + w2
    total = float(np.sum(counts)) * math.log(w1)
    nl1 = vals - 1.0
    total -= float(np.sum(counts * np.log(w + nl1)))
    if w2 > 0:
        for u, c in zip(nl1, counts):
            if u > 0:
                total += c * (math.lgamma(w2 + u) - math.lgamma(w2))
    for u, c in zip(nl1, counts):
        if u > 0:
            total -= c * (math.lgamma(w + u) - math.lgamma(w))
    return total


def log_likelihood_first_success(weights: Weights, samples) -> float:
    """log-likelihood of an i.i.d. sample of first-success times (values >= 1)."""
    vals, counts = _compress_sample(samples)
    return _loglik_first_raw(weights.w1, weights.w2, vals, counts)


def _compress_sample(samples) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(samples, dtype=np.int64)
    if arr.ndim != 1 or len(arr) == 0:
        raise DomainError("samples must be a flat nonempty sequence")
    if arr.min() < 1:
        raise DomainError("first-success times are >= 1")
    vals, counts = np.unique(arr, return_counts=True)
    return vals.astype(float), counts.astype(float)


def mle_first_success(samples) -> EstimateReport:
    """MLE of (w1, w2) from an i.i.d. sample of first-success times.

    Works on the histogram of the sample; assumes the w2 > 0 regime (an
    all-ones sample sits on the w2 = 0 boundary and is flagged, not solved).
    """
    vals, counts = _compress_sample(samples)
    big_l = float(counts.sum())
    if big_l < 2:
        raise InsufficientDataError("need at least 2 observations")
    if vals.max() == 1:
        return _boundary_report("first-success", math.nan, 0.0, "w2->0", loglik=0.0)
    nl1 = vals - 1.0
    pos = nl1 > 0

    def denom(wv):
        a = float(np.sum(counts / (wv + nl1)))
        b = sum(c * (digamma(wv + u) - digamma(wv)) for u, c in zip(nl1[pos], counts[pos]))
        return a + b

    def w1_of(wv):
        return big_l / denom(wv)

    def g(wv):
        w2v = wv - w1_of(wv)
        if w2v <= 0:
            return math.nan
        c_term = sum(
            c * (digamma(w2v + u) - digamma(w2v)) for u, c in zip(nl1[pos], counts[pos])
        )
        return c_term - denom(wv)

    bracket = _scan_sign_change(g, np.geomspace(1e-8, 1e8, 400))
    if bracket is None:
        finite = [g(x) for x in np.geomspace(1e-8, 1e8, 400) if math.isfinite(g(x))]
        if finite and max(finite) < 0:
            return _boundary_report("first-success", math.nan, 0.0, "w2->0")
        return _boundary_report("first-success", math.nan, math.inf, "w2->inf")
    w_root, iters = _brent(g, *bracket)
    w1_hat = w1_of(w_root)
    w2_hat = w_root - w1_hat
    r1 = big_l / w1_hat - denom(w_root)
    r2 = g(w_root)
    converged = max(abs(r1), abs(r2)) <= _SCORE_TOL

    def loglik_vec(params):
        return _loglik_first_raw(params[0], params[1], vals, counts)

    cov = _covariance(loglik_vec, [w1_hat, w2_hat])
    return EstimateReport(
        w1_hat=w1_hat,
        w2_hat=w2_hat,
        constraint="first-success",
        loglik=_loglik_first_raw(w1_hat, w2_hat, vals, counts),
        iterations=iters,
        converged=converged,
        covariance=cov,
    )


def method_of_moments_first_success(mean: float, variance: float) -> Weights:
    """Invert E(K_1+) = (w-1)/(w1-1) and Var(K_1) = mu(1+mu) w1/(w1-2)
    (mu = mean - 1) for (w1, w2); requires moments consistent with w1 > 2."""
    if not mean > 1:
        raise InfeasibleMomentsError("E(K_1+) > 1 for every parameter choice")
    if not variance > 0:
        raise InfeasibleMomentsError("variance must be positive")
    mu = mean - 1.0
    floor = mu * (1.0 + mu)
    if variance <= floor:
        raise InfeasibleMomentsError(
            f"variance {variance} at or below the overdispersion floor {floor}"
        )
    w1 = 2.0 * variance / (variance - floor)
    w2 = mu * (w1 - 1.0)
    return Weights(w1, w2)
