"""Named numeric constants and the small closed-form exponent calculations.

All values here are plain evaluations of explicit formulas; nothing is
calibrated or fitted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

#: Exponent governing the short-cycle window (k^BETA, k].
BETA = 1.0 - 2.0 / (3.0 * math.log(2.0)) - 0.02

#: Decay exponent for the probability that a permutation fixes a set of size k.
DELTA_FIX = 1.0 - (1.0 + math.log(math.log(2.0))) / math.log(2.0)

#: Default master seed; reproducibility-first, opt out with seed="entropy".
DEFAULT_SEED = 0xC0FFEE


def harmonic(k: int) -> float:
    """Partial harmonic sum h_k = 1 + 1/2 + ... + 1/k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return math.fsum(1.0 / j for j in range(1, k + 1))


def fourgen_exponent(eps: float) -> float:
    """Exponent c(eps) = min(eps^2/3, -1 - 4(log 2 - 1 + 2 eps)).

    Positive only for small eps; the caller must check the sign before
    using it as a decay rate.
    """
    if not 0.0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    return min(eps * eps / 3.0, -1.0 - 4.0 * (math.log(2.0) - 1.0 + 2.0 * eps))


def mainlemma_constants_check(beta: float = BETA) -> bool:
    """Check the two arithmetic inequalities the main decay lemma relies on."""
    a = 3.0 * 0.99 * math.log(2.0) * (1.0 - beta)
    b = 2.0 * 0.99 * math.log(2.0) * (1.0 - beta)
    return a > 2.02 and b > 1.3


def mainlemma_margins(beta: float = BETA) -> tuple[float, float]:
    """Margins of the two inequalities above (positive iff they hold)."""
    a = 3.0 * 0.99 * math.log(2.0) * (1.0 - beta) - 2.02
    b = 2.0 * 0.99 * math.log(2.0) * (1.0 - beta) - 1.3
    return a, b


@dataclass(frozen=True)
class Constants:
    """Bundle of run-level constants, mostly for record-keeping."""

    beta: float = BETA
    delta_fix: float = DELTA_FIX
    eps: float = 0.025
    c_fourgen: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.c_fourgen is None:
            object.__setattr__(self, "c_fourgen", fourgen_exponent(self.eps))

    @staticmethod
    def harmonic(k: int) -> float:
        return harmonic(k)
