"""Exact probabilities over S_n via partition enumeration and cycle-type weights.

Everything here is exact rational arithmetic (floats appear only in the
closed-form bound). This module is the ground truth the Monte Carlo side is
checked against, so it stays deliberately simple: enumerate partitions,
weight each by the number of permutations with that cycle type divided by
n!, and aggregate.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import e as _e, factorial, log
from typing import Iterator, Optional

from .errors import CapacityError
from .perms import CycleType, SumsetBitset, fixed_set_sizes

#: Largest n for exact distributions by default.
EXACT_LIMIT = 30
#: Largest n for r-fold (r >= 3) intersection probabilities by default.
EXACT_LIMIT_TRIPLE = 25


@dataclass(frozen=True)
class WeightedSignature:
    """A distinct interior sumset together with its total cycle-type weight."""

    interior_sumset: SumsetBitset
    weight: Fraction

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("weight must be positive")


def partitions(n: int, limit: int = EXACT_LIMIT) -> Iterator[CycleType]:
    """All partitions of n as CycleTypes, in reverse-lexicographic order.

    The order (largest parts first, [n] down to [1]*n) is part of the
    contract so that emitted tables are stable.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > limit:
        raise CapacityError(f"exact mode limited to n <= {limit}, got {n}")

    def rec(rem: int, maxpart: int, acc: list[int]) -> Iterator[list[int]]:
        if rem == 0:
            yield acc
            return
        for first in range(min(rem, maxpart), 0, -1):
            yield from rec(rem - first, first, acc + [first])

    for parts in rec(n, n, []):
        yield CycleType.from_lengths(parts)


def permutation_count(ct: CycleType) -> int:
    """Number of elements of S_n with this cycle type (always an integer)."""
    denom = 1
    for j, c in ct.counts:
        denom *= factorial(c) * j**c
    num = factorial(ct.n)
    assert num % denom == 0
    return num // denom


def cauchy_weight(ct: CycleType) -> Fraction:
    """Probability that a uniform element of S_n has this cycle type."""
    return Fraction(permutation_count(ct), factorial(ct.n))


def _signature_counts(n: int, limit: int, mask: Optional[int] = None) -> dict:
    """Map masked interior-sumset bits -> number of permutations with it."""
    if mask is None:
        mask = (1 << n) - 2 if n >= 2 else 0
    out: dict[int, int] = {}
    for ct in partitions(n, limit):
        bits = fixed_set_sizes(ct).interior_bits() & mask
        out[bits] = out.get(bits, 0) + permutation_count(ct)
    return out


def weighted_signatures(n: int, limit: int = EXACT_LIMIT) -> list[WeightedSignature]:
    """Distinct interior sumsets of S_n with their aggregated weights."""
    nfact = factorial(n)
    out = []
    for bits, count in sorted(_signature_counts(n, limit).items()):
        out.append(
            WeightedSignature(SumsetBitset(n, bits | 1), Fraction(count, nfact))
        )
    return out


def exact_common_size_prob(
    n: int,
    r: int,
    limit: Optional[int] = None,
    window: Optional[tuple[int, int]] = None,
    grouped: bool = True,
) -> Fraction:
    """P(r independent uniform elements of S_n share a fixed-set size l).

    Only 0 < l < n count. window=(lo, hi) further restricts to lo < l <= hi.
    grouped=False skips the signature merge (slower; kept for the losslessness
    check).
    """
    if n < 1 or r < 1:
        raise ValueError("n and r must be positive")
    if limit is None:
        limit = EXACT_LIMIT_TRIPLE if r >= 3 else EXACT_LIMIT
    mask = (1 << n) - 2 if n >= 2 else 0
    if window is not None:
        lo, hi = window
        wmask = 0
        for l in range(max(lo + 1, 1), min(hi, n - 1) + 1):
            wmask |= 1 << l
        mask &= wmask
    if grouped:
        sigs = _signature_counts(n, limit, mask)
    else:
        sigs = {}
        items = []
        for ct in partitions(n, limit):
            items.append(
                (fixed_set_sizes(ct).interior_bits() & mask, permutation_count(ct))
            )
    if not grouped:
        acc = list(items)
        for _ in range(r - 1):
            acc = [(b1 & b2, c1 * c2) for b1, c1 in acc for b2, c2 in items]
        num = sum(c for b, c in acc if b)
        return Fraction(num, factorial(n) ** r)
    acc = dict(sigs)
    for _ in range(r - 1):
        new: dict[int, int] = {}
        for b1, c1 in acc.items():
            for b2, c2 in sigs.items():
                key = b1 & b2
                new[key] = new.get(key, 0) + c1 * c2
        acc = new
    num = sum(c for b, c in acc.items() if b)
    return Fraction(num, factorial(n) ** r)


def exact_small_cycle_count_dist(
    n: int, k: int, limit: int = EXACT_LIMIT
) -> dict[int, Fraction]:
    """Exact law of the number of cycles of length <= k, for uniform S_n."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    nfact = factorial(n)
    acc: dict[int, int] = {}
    for ct in partitions(n, limit):
        l = sum(c for j, c in ct.counts if j <= k)
        acc[l] = acc.get(l, 0) + permutation_count(ct)
    return {l: Fraction(c, nfact) for l, c in sorted(acc.items())}


def exact_quenched_prob(
    n: int, k: int, max_small_cycles: float, limit: int = EXACT_LIMIT
) -> Fraction:
    """P(pi fixes a set of size k and has <= max_small_cycles cycles <= k)."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    nfact = factorial(n)
    num = 0
    for ct in partitions(n, limit):
        small = sum(c for j, c in ct.counts if j <= k)
        if small <= max_small_cycles and k in fixed_set_sizes(ct):
            num += permutation_count(ct)
    return Fraction(num, nfact)


def single_set_bound(k: int, l: int) -> float:
    """Closed-form upper bound on P(exactly l cycles of length <= k).

    (e/k) * (1+log k)^l / l! * (1 + l/(1+log k)), natural log.
    """
    if k < 1 or l < 0:
        raise ValueError("need k >= 1 and l >= 0")
    lk = 1.0 + log(k)
    return (_e / k) * lk**l / factorial(l) * (1.0 + l / lk)
