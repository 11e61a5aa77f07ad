"""Seeded Monte Carlo engine.

Reproducibility contract: every sampler is a pure function of its
parameters and an RngSpec.  Streams are built on numpy's Philox counter
generator — `Philox(key=seed).jumped(stream)` — so distinct stream indices
are provably non-overlapping and identical (seed, stream) pairs reproduce
outputs bit-for-bit on the same build.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .disaster_chain import ChainSpec
from .errors import DomainError
from .estimation import TrialSequence
from .species_sampling import SampleConfiguration
from .success_counts import AlphaModel, Weights, _as_model

__all__ = [
    "RngSpec",
    "DisasterPath",
    "FirstSuccessSample",
    "sample_trials",
    "sample_success_counts",
    "sample_first_success",
    "sample_first_success_batch",
    "sample_power_model",
    "sample_power_counts",
    "sample_disaster",
    "sample_species_sequence",
    "sample_species_batch",
    "sample_passage_time",
]


@dataclass(frozen=True)
class RngSpec:
    """Seed plus independent-substream index."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream < 0:
            raise DomainError("seed and stream must be nonnegative integers")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.seed).jumped(self.stream))


@dataclass(frozen=True, eq=False)
class DisasterPath:
    """A simulated disaster-chain path with excursion and record structure.

    `excursion_boundaries` are the time indices at state 0; `records` the
    indices where the running maximum strictly increases.
    """

    states: np.ndarray
    excursion_boundaries: np.ndarray
    records: np.ndarray

    @property
    def running_max(self) -> np.ndarray:
        return np.maximum.accumulate(self.states)


@dataclass(frozen=True, eq=False)
class FirstSuccessSample:
    """Batch of first-success draws; censored entries hit the cap."""

    values: np.ndarray
    censored: np.ndarray
    cap: int
    survival_at_cap: float


def sample_trials(model, n: int, rng: RngSpec) -> TrialSequence:
    """One trial sequence of length n; success probability at step m+1 from
    k prior successes is (w1 + k alpha)/(w + m)."""
    m = _as_model(model)
    if n < 0:
        raise DomainError("n must be >= 0")
    g = rng.generator()
    w1, w = m.weights.w1, m.weights.w
    if m.alpha == 0.0:
        p = w1 / (w + np.arange(n, dtype=float))
        bits = g.random(n) < p
        return TrialSequence.from_iterable(bits.astype(np.int8))
    bits = np.zeros(n, dtype=np.int8)
    k = 0
    u = g.random(n)
    for step in range(n):
        if u[step] < (w1 + k * m.alpha) / (w + step):
            bits[step] = 1
            k += 1
    return TrialSequence.from_iterable(bits)


def sample_success_counts(model, n: int, reps: int, rng: RngSpec) -> np.ndarray:
    """S_n for `reps` independent runs (state iterated across the batch)."""
    m = _as_model(model)
    if n < 0 or reps < 1:
        raise DomainError("need n >= 0 and reps >= 1")
    g = rng.generator()
    w1, w, a = m.weights.w1, m.weights.w, m.alpha
    k = np.zeros(reps, dtype=np.int64)
    for step in range(n):
        p = (w1 + a * k) / (w + step)
        k += g.random(reps) < p
    return k


def _log_survival(weights: Weights, ns: np.ndarray) -> np.ndarray:
    """log P(K_1+ > n) elementwise; w2 = 0 handled by the caller."""
    w2, w = weights.w2, weights.w
    ns = np.asarray(ns, dtype=float)
    return gammaln(w2 + ns) - gammaln(w2) - gammaln(w + ns) + gammaln(w)


def sample_first_success_batch(
    weights: Weights, reps: int, rng: RngSpec, cap: int = 10**9
) -> FirstSuccessSample:
    """First-success times by inverting the survival function.

    For each uniform u the draw is the smallest n >= 1 with
    P(K_1+ > n) < u, found by bisection on the log survival (identical in
    law to stepping through the trials, but O(log cap) per draw, which
    heavy tails require).  Draws beyond `cap` are censored, never silently
    truncated; the analytic survival at the cap is reported alongside.
    """
    if reps < 1 or cap < 1:
        raise DomainError("need reps >= 1 and cap >= 1")
    g = rng.generator()
    u = np.maximum(g.random(reps), 1e-300)
    if weights.w2 == 0:
        return FirstSuccessSample(
            np.ones(reps, dtype=np.int64), np.zeros(reps, dtype=bool), cap, 0.0
        )
    logu = np.log(u)
    log_surv_cap = float(_log_survival(weights, np.array([cap]))[0])
    censored = logu <= log_surv_cap
    lo = np.zeros(reps, dtype=np.int64)  # invariant: log survival(lo) >= log u
    hi = np.full(reps, cap, dtype=np.int64)
    while np.any(hi - lo > 1):
        mid = (lo + hi) // 2
        above = _log_survival(weights, mid) >= logu
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    values = hi.copy()
    values[censored] = cap
    return FirstSuccessSample(values, censored, cap, math.exp(log_surv_cap))


def sample_first_success(weights: Weights, rng: RngSpec, cap: int = 10**9):
    """Single first-success draw; None when censored at the cap."""
    batch = sample_first_success_batch(weights, 1, rng, cap)
    if batch.censored[0]:
        return None
    return int(batch.values[0])


def sample_power_model(weights: Weights, alpha_exponent: float, n: int, rng: RngSpec) -> TrialSequence:
    """Independent bits with P(I_m = 1) = w1/(w + m^a - 1); a = 1 recovers
    the harmonic trials."""
    if alpha_exponent <= 0:
        raise DomainError("alpha_exponent must be positive")
    if n < 0:
        raise DomainError("n must be >= 0")
    g = rng.generator()
    ms = np.arange(1, n + 1, dtype=float)
    p = weights.w1 / (weights.w + ms**alpha_exponent - 1.0)
    bits = (g.random(n) < p).astype(np.int8)
    return TrialSequence.from_iterable(bits)


def sample_power_counts(
    weights: Weights, alpha_exponent: float, n: int, reps: int, rng: RngSpec,
    chunk: int = 2000,
) -> np.ndarray:
    """S_n of the power model for `reps` independent runs (chunked columns
    to bound memory)."""
    if alpha_exponent <= 0:
        raise DomainError("alpha_exponent must be positive")
    if n < 0 or reps < 1:
        raise DomainError("need n >= 0 and reps >= 1")
    g = rng.generator()
    out = np.zeros(reps, dtype=np.int64)
    for start in range(0, n, chunk):
        ms = np.arange(start + 1, min(start + chunk, n) + 1, dtype=float)
        p = weights.w1 / (weights.w + ms**alpha_exponent - 1.0)
        out += (g.random((reps, len(ms))) < p).sum(axis=1)
    return out


def sample_disaster(spec: ChainSpec, steps: int, n_start: int, rng: RngSpec) -> DisasterPath:
    """Path of the disaster chain: each step goes up by one or resets to 0."""
    if steps < 0 or n_start < 0:
        raise DomainError("need steps >= 0 and n_start >= 0")
    g = rng.generator()
    u = g.random(steps).tolist()
    p_cache = list(1.0 - spec.q_array(max(n_start, 64)))
    w1, w, alpha = spec.weights.w1, spec.weights.w, spec.alpha
    states = np.empty(steps + 1, dtype=np.int64)
    states[0] = cur = n_start
    for i in range(steps):
        if cur >= len(p_cache):
            grow = np.arange(len(p_cache), 2 * len(p_cache), dtype=float)
            p_cache.extend(1.0 - w1 / (w + grow**alpha))
        cur = cur + 1 if u[i] <= p_cache[cur] else 0
        states[i + 1] = cur
    boundaries = np.nonzero(states == 0)[0]
    runmax = np.maximum.accumulate(states)
    records = np.nonzero(states[1:] > runmax[:-1])[0] + 1
    return DisasterPath(states, boundaries, records)


def sample_species_batch(model, n: int, reps: int, rng: RngSpec):
    """Species configurations for `reps` runs of n draws each.

    Returns (n0, counts, k): reservoir hits, the (reps, n) matrix of species
    counts in order of appearance, and the species count per run.

    Seating rule: a draw creates a new species with weight w1 + k alpha,
    hits the reservoir with weight w2 + n0, and joins existing species l
    with weight n_l - alpha (all over w + m at draw m+1).  Conformance to
    the joint configuration law is distributional and is asserted by tests
    against the exact law.
    """
    m = _as_model(model)
    if n < 0 or reps < 1:
        raise DomainError("need n >= 0 and reps >= 1")
    g = rng.generator()
    w1, w2, w = m.weights.w1, m.weights.w2, m.weights.w
    a = m.alpha
    n0 = np.zeros(reps, dtype=np.int64)
    counts = np.zeros((reps, max(n, 1)), dtype=np.int64)
    k = np.zeros(reps, dtype=np.int64)
    rows = np.arange(reps)
    for step in range(n):
        u = g.random(reps) * (w + step)
        new_w = w1 + k * a
        res_w = w2 + n0
        is_new = u < new_w
        u2 = u - new_w
        is_res = ~is_new & (u2 < res_w)
        u3 = u2 - res_w
        existing = np.where(counts > 0, counts - a, 0.0)
        cum = np.cumsum(existing, axis=1)
        idx = (u3[:, None] >= cum).sum(axis=1)
        idx = np.minimum(idx, np.maximum(k - 1, 0))
        is_old = ~is_new & ~is_res
        n0[is_res] += 1
        counts[rows[is_old], idx[is_old]] += 1
        counts[rows[is_new], k[is_new]] += 1
        k[is_new] += 1
    return n0, counts, k


def sample_species_sequence(model, n: int, rng: RngSpec) -> SampleConfiguration:
    """One run of the sequential species sampler."""
    n0, counts, k = sample_species_batch(model, n, 1, rng)
    parts = tuple(int(c) for c in counts[0, : k[0]])
    return SampleConfiguration(int(n0[0]), parts)


def _log_conditional_survival(weights: Weights, m: float, i: float) -> float:
    """log P(gap > i | l-th success at m) = log([w2+m]_i/[w+m]_i).

    gammaln differences below 1e8; above that the integrated log1p form
    with an endpoint correction (error O(w1^2/m), irrelevant at that size).
    """
    w1, w2, w = weights.w1, weights.w2, weights.w
    if w + m + i < 1e8:
        return float(
            gammaln(w2 + m + i) - gammaln(w2 + m) - gammaln(w + m + i) + gammaln(w + m)
        )
    return -w1 * math.log((w + m + i) / (w + m))


def sample_passage_time(weights: Weights, l: int, rng: RngSpec, cap: float = 1e30) -> float:
    """K_l+ drawn as a sum of conditional gaps, each by inverting the
    conditional survival; positions beyond float-exact range are carried
    as floats, which is fine for the large-l growth checks this supports."""
    if l < 1:
        raise DomainError("l must be >= 1")
    g = rng.generator()
    pos = 0.0
    for _ in range(l):
        u = max(float(g.random()), 1e-300)
        target = math.log(u)
        # doubling search then bisection on i >= 1
        if _log_conditional_survival(weights, pos, 1.0) < target:
            pos += 1.0
            continue
        hi = 2.0
        while _log_conditional_survival(weights, pos, hi) >= target and pos + hi < cap:
            hi *= 2.0
        lo = hi / 2.0
        while hi - lo > max(1.0, lo * 1e-12):
            mid = math.floor((lo + hi) / 2.0)
            if _log_conditional_survival(weights, pos, mid) >= target:
                lo = mid
            else:
                hi = mid
        pos += hi
    return pos
