"""Permutation sampling, cycle types, and fixed-set-size sumsets.

Conventions: points are 0-indexed internally; a permutation is stored as its
one-line image array, entry i giving the image of i. A permutation fixes a
set of size l exactly when l is a subset sum of its cycle lengths, so the
whole fixed-set-size structure lives in a single bit vector.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class Permutation:
    """A permutation of {0, ..., n-1} in one-line (image array) notation."""

    image: tuple[int, ...]

    def __post_init__(self):
        n = len(self.image)
        if n == 0:
            raise ValueError("degree must be at least 1")
        seen = bytearray(n)
        for v in self.image:
            if not 0 <= v < n or seen[v]:
                raise ValueError("image is not a bijection on {0,...,n-1}")
            seen[v] = 1

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i]

    def one_indexed(self) -> tuple[int, ...]:
        """1-indexed image, for display only."""
        return tuple(v + 1 for v in self.image)


@dataclass(frozen=True)
class CycleType:
    """Multiset of cycle lengths, stored as (length, count) pairs.

    Doubles as an integer partition of n. Only nonzero counts are stored;
    pairs are sorted by length.
    """

    n: int
    counts: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("n must be positive")
        total = 0
        last = 0
        for j, c in self.counts:
            if j <= last or j > self.n:
                raise ValueError("cycle lengths must be sorted and in 1..n")
            if c <= 0:
                raise ValueError("stored counts must be positive")
            last = j
            total += j * c
        if total != self.n:
            raise ValueError("cycle lengths must sum to n")

    @classmethod
    def from_dict(cls, n: int, counts: dict) -> "CycleType":
        return cls(n, tuple(sorted((j, c) for j, c in counts.items() if c)))

    @classmethod
    def from_lengths(cls, lengths: Iterable[int]) -> "CycleType":
        lengths = list(lengths)
        return cls.from_dict(sum(lengths), Counter(lengths))

    def as_dict(self) -> dict:
        return dict(self.counts)

    def count(self, j: int) -> int:
        return dict(self.counts).get(j, 0)

    def total_cycles(self) -> int:
        return sum(c for _, c in self.counts)

    def lengths(self) -> tuple[int, ...]:
        out = []
        for j, c in self.counts:
            out.extend([j] * c)
        return tuple(out)


@dataclass(frozen=True)
class SumsetBitset:
    """Set of achievable sums as a bit vector: bit l set iff l is achievable."""

    cap: int
    bits: int

    def __post_init__(self):
        if self.cap < 0:
            raise ValueError("cap must be nonnegative")
        if not self.bits & 1:
            raise ValueError("bit 0 (the empty sum) must be set")
        if self.bits >> (self.cap + 1):
            raise ValueError("bits beyond cap are set")

    def __contains__(self, l: int) -> bool:
        return 0 <= l <= self.cap and bool(self.bits >> l & 1)

    def support(self) -> list[int]:
        return [l for l in range(self.cap + 1) if self.bits >> l & 1]

    def interior_bits(self) -> int:
        """Bits restricted to 1..cap-1 (drops the trivial 0 and full sums)."""
        if self.cap < 2:
            return 0
        return self.bits & ((1 << self.cap) - 2)

    def count(self) -> int:
        return bin(self.bits).count("1")


def bounded_subset_sum_bits(items: Iterable[tuple[int, int]], cap: int) -> int:
    """Subset sums of a bounded multiset, as a bit vector of length cap+1.

    items are (value, multiplicity) pairs. Multiplicities are split into
    powers of two so each value costs O(log c) shift-or passes.
    """
    mask = (1 << (cap + 1)) - 1
    bits = 1
    for j, c in sorted(items):
        if j <= 0:
            raise ValueError("values must be positive")
        if j > cap:
            continue
        m = 1
        while c > 0:
            take = min(m, c)
            bits |= (bits << (j * take)) & mask
            c -= take
            m <<= 1
    return bits


def subset_sum_witness(
    items: Sequence[tuple[int, int]], target: int
) -> Optional[dict]:
    """Multiplicities achieving target as a bounded subset sum, or None.

    Returns {value: multiplicity used} with 0 <= used <= available. The
    choice is deterministic (smallest multiplicity of the last item first).
    """
    items = sorted(items)
    if target < 0:
        return None
    # forward DP keeping the reachable-set prefix after each item
    stages = [1]
    bits = 1
    for j, c in items:
        new = bits
        for _ in range(c):
            new |= new << j
        bits = new
        stages.append(bits)
    if not bits >> target & 1:
        return None
    out = {}
    rem = target
    for idx in range(len(items) - 1, -1, -1):
        j, c = items[idx]
        prev = stages[idx]
        for t in range(c + 1):
            r = rem - t * j
            if r >= 0 and prev >> r & 1:
                if t:
                    out[j] = out.get(j, 0) + t
                rem = r
                break
        else:  # pragma: no cover - forward pass guarantees a branch
            return None
    return out if rem == 0 else None


def sample_permutation(n: int, rng: np.random.Generator) -> Permutation:
    """Uniform random element of S_n (Fisher-Yates via the generator)."""
    if n < 1:
        raise ValueError("degree must be at least 1")
    return Permutation(tuple(int(v) for v in rng.permutation(n)))


def permutation_parity(p: Permutation) -> int:
    """0 for even, 1 for odd; parity = (n - #cycles) mod 2."""
    return (p.n - cycle_type(p).total_cycles()) % 2


def sample_permutation_with_parity(
    n: int, parity: str, rng: np.random.Generator
) -> Permutation:
    """Uniform sample from A_n (parity="even") or the odd coset.

    Samples uniformly from S_n, then composes with the fixed transposition
    (0 1) when the parity mismatches; this is an exact 2-to-1 coupling.
    """
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    if n < 2:
        raise ValueError("parity sampling needs n >= 2")
    want = 0 if parity == "even" else 1
    p = sample_permutation(n, rng)
    if permutation_parity(p) != want:
        img = list(p.image)
        img[0], img[1] = img[1], img[0]
        p = Permutation(tuple(img))
    return p


def cycle_lengths_of_image(image: Sequence[int]) -> list[int]:
    """Cycle lengths of a one-line image array, in first-seen order."""
    n = len(image)
    seen = bytearray(n)
    out = []
    for i in range(n):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = 1
            j = image[j]
            length += 1
        out.append(length)
    return out


def cycle_type(p: Permutation) -> CycleType:
    """Cycle decomposition; linear in n."""
    return CycleType.from_lengths(cycle_lengths_of_image(p.image))


def fixed_set_sizes(ct: CycleType) -> SumsetBitset:
    """All fixed-set sizes of a permutation of this cycle type.

    bit l is set iff some sub-multiset of the cycle lengths sums to l.
    """
    return SumsetBitset(ct.n, bounded_subset_sum_bits(ct.counts, ct.n))


def common_fixed_size(cts: Sequence[CycleType]) -> Optional[int]:
    """Smallest 0 < l < n achievable in every given cycle type, or None."""
    if not cts:
        raise ValueError("need at least one cycle type")
    n = cts[0].n
    if any(ct.n != n for ct in cts):
        raise ValueError("all cycle types must have the same degree")
    inter = (1 << (n + 1)) - 1
    for ct in cts:
        inter &= fixed_set_sizes(ct).bits
        if not inter & ((1 << n) - 2):
            return None
    inter &= (1 << n) - 2
    return (inter & -inter).bit_length() - 1


# ---------------------------------------------------------------------------
# Batch helpers (raw image arrays, used by the Monte Carlo harness)
# ---------------------------------------------------------------------------


def sample_permutation_batch(
    n: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """(count, n) array of independent uniform one-line images."""
    base = np.tile(np.arange(n), (count, 1))
    return rng.permuted(base, axis=1)


def cycle_count_batch(perms: np.ndarray) -> np.ndarray:
    """Number of cycles of each row, by pointer-doubling orbit minima."""
    b, n = perms.shape
    m = np.tile(np.arange(n), (b, 1))
    p = perms
    steps = 1
    while steps < n:
        m = np.minimum(m, np.take_along_axis(m, p, axis=1))
        p = np.take_along_axis(p, p, axis=1)
        steps *= 2
    return (m == np.arange(n)).sum(axis=1)


def small_cycle_counts_batch(perms: np.ndarray, kmax: int) -> np.ndarray:
    """(B, kmax) array of counts of cycles of each length 1..kmax, per row."""
    b, n = perms.shape
    idx = np.arange(n)
    # points whose cycle length divides l, for l = 1..kmax
    divides = np.empty((kmax, b, n), dtype=bool)
    p = perms
    divides[0] = p == idx
    for l in range(2, kmax + 1):
        p = np.take_along_axis(perms, p, axis=1)
        divides[l - 1] = p == idx
    out = np.zeros((b, kmax), dtype=np.int64)
    exact = np.zeros((kmax, b, n), dtype=bool)
    for l in range(1, kmax + 1):
        e = divides[l - 1].copy()
        for d in range(1, l):
            if l % d == 0:
                e &= ~exact[d - 1]
        exact[l - 1] = e
        out[:, l - 1] = e.sum(axis=1) // l
    return out


def force_parity_batch(perms: np.ndarray, parity: str) -> np.ndarray:
    """Copy of the batch with each row forced to the requested parity.

    Rows of the wrong parity are composed with the transposition (0 1),
    i.e. their first two image entries are swapped.
    """
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    want = 0 if parity == "even" else 1
    n = perms.shape[1]
    par = (n - cycle_count_batch(perms)) % 2
    out = perms.copy()
    wrong = par != want
    out[wrong, 0], out[wrong, 1] = perms[wrong, 1], perms[wrong, 0]
    return out
