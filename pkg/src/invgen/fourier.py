"""Riesz products on the torus, their exact quadrature, and the S-set.

F(theta) is a product over cycle lengths j of factors ((1+e(j*theta_i))/2)
raised to the sampled Poisson exponents. Its Fourier support is the
two-dimensional difference set S of three sumsets, and Parseval turns the
mean of |F|^2 into a lower bound on |S|. Since |F|^2 is a trigonometric
polynomial, its integral is computed exactly on a sufficiently fine uniform
grid; no adaptive quadrature is involved anywhere.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .constants import BETA
from .errors import CapacityError
from .poisson import Span, sample_span_counts

Theta = Union[float, Fraction]

#: default cap on achievable sums in S-set computations
DEFAULT_SSET_CAP = 1 << 16
#: default cap on quadrature grid cells
DEFAULT_BUDGET_CELLS = 1 << 24


def tnorm(theta: Theta) -> float:
    """Distance from theta to the nearest integer, in [0, 1/2].

    Exact for Fraction inputs (the fractional part is reduced before the
    float conversion), which matters when probing near 0.
    """
    if isinstance(theta, Fraction):
        frac = theta - math.floor(theta)
        return float(min(frac, 1 - frac))
    frac = theta % 1.0
    return min(frac, 1.0 - frac)


@dataclass(frozen=True)
class TorusPoint:
    """A point of T^2 with the dependent third coordinate -(t1+t2) mod 1."""

    theta1: Theta
    theta2: Theta

    @property
    def theta3(self) -> Theta:
        t = -(self.theta1 + self.theta2)
        if isinstance(t, Fraction):
            return t - math.floor(t)
        return t % 1.0

    def thetas(self) -> tuple[Theta, Theta, Theta]:
        return (self.theta1, self.theta2, self.theta3)

    def norms(self) -> tuple[float, float, float]:
        return tuple(tnorm(t) for t in self.thetas())  # type: ignore[return-value]


@dataclass(frozen=True)
class RieszInstance:
    """Sampled exponent vectors over a span of cycle lengths.

    x[i], y[i], z[i] are the exponents for length j = span[0] + 1 + i.
    """

    span: Span
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    beta: float
    k: int

    def __post_init__(self):
        lo, hi = self.span
        width = hi - lo
        if not (len(self.x) == len(self.y) == len(self.z) == width):
            raise ValueError("exponent arrays must match the span width")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")

    def js(self) -> np.ndarray:
        return np.arange(self.span[0] + 1, self.span[1] + 1)

    def caps(self) -> tuple[int, int, int]:
        """Max achievable sum for each of the three exponent vectors."""
        js = self.js()
        return (
            int((js * self.x).sum()),
            int((js * self.y).sum()),
            int((js * self.z).sum()),
        )

    def total_weight(self) -> int:
        js = self.js()
        return int((js * (self.x + self.y + self.z)).sum())


def riesz_span(k: int, beta: float = BETA) -> Span:
    """The short-cycle window (k^beta, k] as an integer span."""
    if k < 2:
        raise ValueError("k must be at least 2")
    return (int(math.floor(k**beta)), k)


def sample_riesz_instance(
    k: int, rng: np.random.Generator, beta: float = BETA
) -> RieszInstance:
    """Three independent Poisson exponent vectors over (k^beta, k]."""
    span = riesz_span(k, beta)
    return RieszInstance(
        span=span,
        x=sample_span_counts(span, rng),
        y=sample_span_counts(span, rng),
        z=sample_span_counts(span, rng),
        beta=beta,
        k=k,
    )


def _cpow(base: complex, exp: int) -> complex:
    # repeated multiplication keeps full accuracy for the common small exponents
    if exp <= 30:
        out = 1 + 0j
        for _ in range(exp):
            out *= base
        return out
    return base**exp


def eval_F(inst: RieszInstance, t: TorusPoint) -> complex:
    """Pointwise value of the Riesz product; |F| <= 1 and F(0) = 1."""
    th = t.thetas()
    lo = inst.span[0]
    val = 1 + 0j
    for arr, theta in ((inst.x, th[0]), (inst.y, th[1]), (inst.z, th[2])):
        theta_f = float(theta)
        for i, e in enumerate(arr):
            if e:
                j = lo + 1 + i
                base = (1 + cmath.exp(2j * math.pi * ((j * theta_f) % 1.0))) / 2
                val *= _cpow(base, int(e))
    return val


def integrate_F_sq(
    inst: RieszInstance, budget_cells: int = DEFAULT_BUDGET_CELLS
) -> float:
    """Exact mean of |F|^2 over T^2 (up to roundoff).

    |F|^2 is a trigonometric polynomial of degree at most N per axis with
    N the total weighted exponent mass, so the mean over an M x M uniform
    grid with M = 2N+1 is exact. |(1+e(j t))/2|^2 = cos^2(pi j t), so the
    evaluation is a real product accumulated with pairwise summation.
    """
    n_total = inst.total_weight()
    m = 2 * n_total + 1
    if m * m > budget_cells:
        raise CapacityError(
            f"quadrature grid {m}x{m} exceeds budget of {budget_cells} cells"
        )
    ts = np.arange(m) / m
    grid = np.ones((m, m))
    lo = inst.span[0]
    for i, e in enumerate(inst.x):
        if e:
            j = lo + 1 + i
            grid *= (np.cos(np.pi * j * ts) ** (2 * int(e)))[:, None]
    for i, e in enumerate(inst.y):
        if e:
            j = lo + 1 + i
            grid *= (np.cos(np.pi * j * ts) ** (2 * int(e)))[None, :]
    for i, e in enumerate(inst.z):
        if e:
            j = lo + 1 + i
            grid *= np.cos(np.pi * j * (ts[:, None] + ts[None, :])) ** (2 * int(e))
    return float(grid.mean())


@dataclass(frozen=True)
class SSet2D:
    """Difference set S as a bit matrix over [-cap, cap]^2."""

    cap: int
    grid: np.ndarray

    def __post_init__(self):
        side = 2 * self.cap + 1
        if self.grid.shape != (side, side):
            raise ValueError("grid must cover [-cap, cap]^2")
        if not self.grid[self.cap, self.cap]:
            raise ValueError("(0, 0) must always be a member")

    def contains(self, a: int, b: int) -> bool:
        if abs(a) > self.cap or abs(b) > self.cap:
            return False
        return bool(self.grid[a + self.cap, b + self.cap])

    def count(self) -> int:
        return int(self.grid.sum())

    def support(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(self.grid)
        return [(int(r) - self.cap, int(c) - self.cap) for r, c in zip(rows, cols)]


def _bits_to_indicator(bits: int, cap: int) -> np.ndarray:
    raw = bits.to_bytes(cap // 8 + 1, "little")
    arr = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return arr[: cap + 1]


def difference_support(
    ind1: np.ndarray, ind2: np.ndarray, ind3: np.ndarray
) -> np.ndarray:
    """Support of {(n1-n3, n2-n3)} as a bool array.

    Entry (a + c3, b + c3) is True iff (a, b) is attainable, where ci is
    the largest index of each indicator. Computed as a rank-structured
    matrix product over the n3 values (counts are exact in float32 well
    below 2^24, so the 0.5 threshold is safe).
    """
    c1, c2, c3 = len(ind1) - 1, len(ind2) - 1, len(ind3) - 1
    l3 = np.nonzero(ind3)[0]
    rows, cols = c1 + c3 + 1, c2 + c3 + 1
    pad1 = np.zeros(c1 + 2 * c3 + 1, dtype=np.float32)
    pad1[c3 : c3 + c1 + 1] = ind1
    pad2 = np.zeros(c2 + 2 * c3 + 1, dtype=np.float32)
    pad2[c3 : c3 + c2 + 1] = ind2
    g = pad1[np.arange(rows)[:, None] + l3[None, :]]
    h = pad2[l3[:, None] + np.arange(cols)[None, :]]
    return (g @ h) > 0.5


def compute_S(inst: RieszInstance, cap_budget: int = DEFAULT_SSET_CAP) -> SSet2D:
    """The difference set S of the instance's three sumsets."""
    from .perms import bounded_subset_sum_bits

    c1, c2, c3 = inst.caps()
    cap = max(c1, c2, c3)
    if cap > cap_budget:
        raise CapacityError(f"S-set cap {cap} exceeds budget {cap_budget}")
    lo = inst.span[0]
    inds = []
    for arr, c in ((inst.x, c1), (inst.y, c2), (inst.z, c3)):
        items = [(lo + 1 + i, int(e)) for i, e in enumerate(arr) if e]
        inds.append(_bits_to_indicator(bounded_subset_sum_bits(items, c), c))
    supp = difference_support(*inds)
    side = 2 * cap + 1
    grid = np.zeros((side, side), dtype=bool)
    grid[cap - c3 : cap + c1 + 1, cap - c3 : cap + c2 + 1] = supp
    return SSet2D(cap, grid)


def parseval_lower_bound_check(
    inst: RieszInstance,
    cap_budget: int = DEFAULT_SSET_CAP,
    budget_cells: int = DEFAULT_BUDGET_CELLS,
) -> tuple[int, float]:
    """(|S|, 1/integral of |F|^2); |S| >= bound holds on every instance."""
    size = compute_S(inst, cap_budget).count()
    integral = integrate_F_sq(inst, budget_cells)
    return size, 1.0 / integral


def ki_thresholds(
    t: TorusPoint, k: int, beta: float = BETA
) -> tuple[float, float, float]:
    """Per-coordinate crossover scales used by the decay estimates.

    k_i = k^beta when the coordinate is far from integers, 1/||theta_i||
    in the middle range, and k when within 1/k of an integer. Each value
    satisfies the crude bound k^beta / ||theta_i||^(1-beta).
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    out = []
    for norm in t.norms():
        if norm >= k**-beta:
            ki = k**beta
        elif norm > 1.0 / k:
            ki = 1.0 / norm
        else:
            ki = float(k)
        if norm > 0.0:
            assert ki <= k**beta / norm ** (1.0 - beta) * (1.0 + 1e-12)
        out.append(ki)
    return tuple(out)  # type: ignore[return-value]


def trigsum(m: int, theta: Theta) -> float:
    """Partial sum of cos(2 pi j theta)/j for j <= m.

    Arguments are reduced mod 1 before the cosine (exactly for Fraction
    inputs); chunks are pairwise-summed and combined with fsum so the
    result stays accurate out to very large m.
    """
    if m < 1:
        raise ValueError("m must be positive")
    chunk = 1 << 20
    partials = []
    use_exact = isinstance(theta, Fraction)
    if use_exact:
        p, q = theta.numerator, theta.denominator
    else:
        th = float(theta)
    for start in range(1, m + 1, chunk):
        js = np.arange(start, min(start + chunk, m + 1))
        if use_exact:
            frac = ((js % q) * p % q) / q
        else:
            frac = (js * th) % 1.0
        partials.append(np.sum(np.cos(2.0 * np.pi * frac) / js))
    return math.fsum(partials)
