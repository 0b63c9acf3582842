"""The limiting Poisson model of small-cycle structure.

The number of j-cycles in a large random permutation behaves like an
independent Poisson(1/j) variable; the achievable fixed-set sizes become the
random sumset {sum j*x_j : 0 <= x_j <= X_j}. Vectors here are truncated at a
caller-chosen level K; events confined to sums <= cap are unaffected once
K >= cap, since longer cycles cannot contribute.

Intervals of cycle lengths are written as spans (lo, hi), meaning the
integers j with lo < j <= hi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .perms import SumsetBitset, bounded_subset_sum_bits

Span = tuple[int, int]


@dataclass(frozen=True)
class PoissonCycleVector:
    """A realization (X_1, ..., X_K), counts[j-1] = X_j."""

    counts: np.ndarray

    def __post_init__(self):
        if self.counts.ndim != 1 or len(self.counts) < 1:
            raise ValueError("counts must be a nonempty 1-d array")
        if (self.counts < 0).any():
            raise ValueError("counts must be nonnegative")

    @property
    def K(self) -> int:
        return len(self.counts)

    def count(self, j: int) -> int:
        if not 1 <= j <= self.K:
            return 0
        return int(self.counts[j - 1])

    def weighted_total(self, span: Span | None = None) -> int:
        """sum of j*X_j over the span (default: all of 1..K)."""
        lo, hi = span if span is not None else (0, self.K)
        hi = min(hi, self.K)
        js = np.arange(lo + 1, hi + 1)
        return int((js * self.counts[lo:hi]).sum())


def poisson_inversion(lams: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Poisson draws by inversion with sequential search, one uniform each.

    Exact and branch-light for the small parameters used here (all <= 1).
    """
    lams = np.asarray(lams, dtype=float)
    u = rng.random(lams.shape)
    p = np.exp(-lams)
    cdf = p.copy()
    x = np.zeros(lams.shape, dtype=np.int64)
    k = 0
    while True:
        active = u > cdf
        if not active.any():
            return x
        k += 1
        x[active] += 1
        p = p * lams / k
        cdf = cdf + p


def sample_vector(K: int, rng: np.random.Generator) -> PoissonCycleVector:
    """Truncated model vector: independent Poisson(1/j) for j = 1..K."""
    if K < 1:
        raise ValueError("K must be positive")
    lams = 1.0 / np.arange(1, K + 1)
    return PoissonCycleVector(poisson_inversion(lams, rng))


def sample_span_counts(span: Span, rng: np.random.Generator) -> np.ndarray:
    """Counts X_j for j in (lo, hi] only, as an array of length hi - lo."""
    lo, hi = span
    if not 0 <= lo < hi:
        raise ValueError("span must satisfy 0 <= lo < hi")
    lams = 1.0 / np.arange(lo + 1, hi + 1)
    return poisson_inversion(lams, rng)


def sumset(span: Span, v: PoissonCycleVector, cap: int | None = None) -> SumsetBitset:
    """Achievable sums sum_{j in span} j*x_j with 0 <= x_j <= X_j, up to cap.

    cap=None uses the natural cap (the full weighted total over the span);
    a smaller explicit cap truncates the set.
    """
    lo, hi = span
    if lo < 0 or hi > v.K:
        raise ValueError("span must lie within [0, K]")
    natural = v.weighted_total(span)
    if cap is None:
        cap = natural
    items = [
        (j, int(v.counts[j - 1]))
        for j in range(lo + 1, hi + 1)
        if v.counts[j - 1] > 0
    ]
    return SumsetBitset(cap, bounded_subset_sum_bits(items, cap))


def intersection_trial(
    r: int, K: int, cap: int, rng: np.random.Generator
) -> SumsetBitset:
    """Intersection of r freshly sampled sumsets over (0, K], capped."""
    if r < 1:
        raise ValueError("r must be positive")
    bits = (1 << (cap + 1)) - 1
    for _ in range(r):
        v = sample_vector(K, rng)
        bits &= sumset((0, K), v, cap=cap).bits
    return SumsetBitset(cap, bits)


def event_deficit(v: PoissonCycleVector, k: int) -> float:
    """Smallest C making the short-cycle abundance event hold.

    The event asks sum_{m<j<=k} X_j >= 0.99*log(k/m) - C for all integers
    0 <= m <= k; the m = 0 instance is evaluated with m replaced by 1 (the
    log is undefined at 0 and the full-sum condition is what is meant).
    Returns max over m of the right-hand side minus the left-hand side, so
    the event holds iff the deficit is <= C.
    """
    if v.K < k:
        raise ValueError("vector truncation K must be at least k")
    x = v.counts[:k]
    # suffix[m] = sum_{m<j<=k} X_j for m = 0..k
    suffix = np.zeros(k + 1, dtype=np.int64)
    suffix[:k] = x[::-1].cumsum()[::-1]
    ms = np.maximum(np.arange(k + 1), 1)
    rhs = 0.99 * np.log(k / ms)
    return float((rhs - suffix).max())


def event_E(v: PoissonCycleVector, k: int, C: float) -> bool:
    """True iff every short-cycle window (m, k] holds >= 0.99*log(k/m) - C cycles."""
    return event_deficit(v, k) <= C


def zero_window_prob(a: int, b: int) -> float:
    """P(X_j = 0 for all a < j <= b) = exp(-(h_b - h_a))."""
    if not 0 <= a <= b:
        raise ValueError("need 0 <= a <= b")
    return math.exp(-math.fsum(1.0 / j for j in range(a + 1, b + 1)))
