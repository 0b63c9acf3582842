"""Independent brute-force oracles used by the test suite.

Everything here is deliberately naive: straight enumeration and symbolic
expansion with exact rational coefficients, so the fast implementations in
the package are checked against code that is obviously correct.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from invgen.fourier import RieszInstance


def brute_subset_sums(lengths) -> set[int]:
    """All sub-multiset sums by enumerating every coordinate choice."""
    sums = {0}
    for l in lengths:
        sums |= {s + l for s in sums}
    return sums


def all_permutation_images(n: int):
    """Every one-line image of S_n (use only for tiny n)."""
    return itertools.permutations(range(n))


def cycle_lengths_brute(image) -> list[int]:
    n = len(image)
    seen = [False] * n
    out = []
    for i in range(n):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = image[j]
            length += 1
        out.append(length)
    return out


def partition_count(n: int) -> int:
    """p(n) by the standard two-argument recursion."""

    def rec(rem: int, maxpart: int) -> int:
        if rem == 0:
            return 1
        return sum(rec(rem - f, f) for f in range(min(rem, maxpart), 0, -1))

    return rec(n, n)


# ---------------------------------------------------------------------------
# symbolic expansion of the Riesz product
# ---------------------------------------------------------------------------


def symbolic_coeffs(inst: RieszInstance) -> dict[tuple[int, int], Fraction]:
    """Fourier coefficients of F as a map (p, q) -> exact rational.

    Each unit exponent of the x-vector at length j contributes the factor
    (1 + e(j*theta1))/2, i.e. frequencies {(0,0), (j,0)} with weight 1/2;
    the y-vector contributes (0, j); the z-vector, through
    theta3 = -theta1 - theta2, contributes (-j, -j). The full product is
    expanded by repeated convolution.
    """
    coeffs = {(0, 0): Fraction(1)}
    half = Fraction(1, 2)
    lo = inst.span[0]
    steps = []
    for arr, direction in ((inst.x, (1, 0)), (inst.y, (0, 1)), (inst.z, (-1, -1))):
        for i, e in enumerate(arr):
            j = lo + 1 + i
            step = (j * direction[0], j * direction[1])
            steps.extend([step] * int(e))
    for dp, dq in steps:
        new: dict[tuple[int, int], Fraction] = {}
        for (p, q), c in coeffs.items():
            c2 = c * half
            new[(p, q)] = new.get((p, q), Fraction(0)) + c2
            key = (p + dp, q + dq)
            new[key] = new.get(key, Fraction(0)) + c2
        coeffs = new
    return coeffs


def symbolic_power_sum(inst: RieszInstance) -> Fraction:
    """Exact integral of |F|^2 as the coefficient power sum (Parseval)."""
    return sum((c * c for c in symbolic_coeffs(inst).values()), Fraction(0))


def symbolic_support(inst: RieszInstance) -> set[tuple[int, int]]:
    """Frequency support of F (no cancellation: all coefficients positive)."""
    return set(symbolic_coeffs(inst).keys())


def instance_from_counts(k: int, beta: float, span, x, y, z) -> RieszInstance:
    return RieszInstance(
        span=span,
        x=np.asarray(x, dtype=np.int64),
        y=np.asarray(y, dtype=np.int64),
        z=np.asarray(z, dtype=np.int64),
        beta=beta,
        k=k,
    )
