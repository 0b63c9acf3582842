"""Monte Carlo harness for the theorem-level contrasts and decay bounds.

Trials are organized into fixed-size batches; the random stream of batch b
is derived from (master seed, b), so estimates are bit-identical no matter
how batches are scheduled across workers. Wherever two events are compared
by inclusion, the comparison is coupled (both events evaluated on the same
sampled permutations or vectors), which turns asymptotic inequalities into
exact per-run invariants.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .constants import BETA
from .errors import CapacityError
from .fourier import (
    RieszInstance,
    compute_S,
    integrate_F_sq,
    riesz_span,
)
from .perms import (
    bounded_subset_sum_bits,
    cycle_lengths_of_image,
    force_parity_batch,
    sample_permutation_batch,
    small_cycle_counts_batch,
)
from .poisson import (
    PoissonCycleVector,
    event_deficit,
    poisson_inversion,
    sample_vector,
)

BATCH = 1024
WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass(frozen=True)
class Estimate:
    """A binomial estimate with its Wilson 95% interval."""

    p_hat: float
    trials: int
    successes: int
    ci_low: float
    ci_high: float
    seed: int

    def sigma(self) -> float:
        return math.sqrt(max(self.p_hat * (1.0 - self.p_hat), 1e-12) / self.trials)


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval; well behaved near 0 and 1."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def make_estimate(successes: int, trials: int, seed: int) -> Estimate:
    lo, hi = wilson_interval(successes, trials)
    return Estimate(successes / trials, trials, successes, lo, hi, seed)


def _batches(trials: int) -> list[tuple[int, int]]:
    """(batch index, batch size) pairs covering the trial count."""
    out = []
    b = 0
    while trials > 0:
        size = min(BATCH, trials)
        out.append((b, size))
        trials -= size
        b += 1
    return out


def _run_batches(fn, tasks, workers: int):
    if workers <= 1:
        results = [fn(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, tasks, chunksize=8))
    total = results[0]
    for r in results[1:]:
        total = total + r
    return total


def _interior_bits(lengths: Sequence[int], n: int, cache: dict) -> int:
    key = tuple(sorted(lengths))
    bits = cache.get(key)
    if bits is None:
        from collections import Counter

        full = bounded_subset_sum_bits(Counter(lengths).items(), n)
        bits = full & ((1 << n) - 2)
        if len(cache) < 1 << 17:
            cache[key] = bits
    return bits


# ---------------------------------------------------------------------------
# common fixed-set size
# ---------------------------------------------------------------------------


def _common_size_batch(task) -> np.ndarray:
    n, r_max, seed, b, size, first_parity = task
    rng = np.random.default_rng([seed, b])
    perms = sample_permutation_batch(n, size * r_max, rng)
    if first_parity is not None:
        first = perms[0 :: r_max]
        perms[0::r_max] = force_parity_batch(first, first_parity)
    counts = np.zeros(r_max, dtype=np.int64)
    cache: dict = {}
    imask = (1 << n) - 2
    for t in range(size):
        inter = imask
        for i in range(r_max):
            row = perms[t * r_max + i].tolist()
            inter &= _interior_bits(cycle_lengths_of_image(row), n, cache)
            if not inter:
                break
            counts[i] += 1
    return counts


def mc_common_size(
    n: int,
    r_max: int,
    trials: int,
    seed: int,
    workers: int = 1,
    first_parity: Optional[str] = None,
) -> list[Estimate]:
    """Estimates of P(first r permutations share a fixed-set size), r = 1..r_max.

    All prefixes are evaluated on the same sampled permutations, so the
    returned success counts are exactly nonincreasing in r.
    """
    if n < 2 or r_max < 1 or trials < 1:
        raise ValueError("need n >= 2, r_max >= 1, trials >= 1")
    tasks = [(n, r_max, seed, b, size, first_parity) for b, size in _batches(trials)]
    counts = _run_batches(_common_size_batch, tasks, workers)
    return [make_estimate(int(c), trials, seed) for c in counts]


# ---------------------------------------------------------------------------
# quenched fixing probability
# ---------------------------------------------------------------------------


def _quenched_batch(task) -> np.ndarray:
    n, k, threshold, seed, b, size = task
    rng = np.random.default_rng([seed, b])
    perms = sample_permutation_batch(n, size, rng)
    hits = 0
    cache: dict = {}
    for t in range(size):
        lengths = cycle_lengths_of_image(perms[t].tolist())
        if sum(1 for l in lengths if l <= k) > threshold:
            continue
        bits = _interior_bits(lengths, n, cache)
        if bits >> k & 1:
            hits += 1
    return np.array([hits], dtype=np.int64)


def mc_quenched_fix(
    n: int, k: int, eps: float, trials: int, seed: int, workers: int = 1
) -> tuple[Estimate, float]:
    """P(pi fixes a set of size k and has <= (1+eps) log k cycles <= k).

    Returns the estimate and the comparison shape k^(log 2 - 1 + 2 eps).
    """
    if not 1 <= k <= n // 2:
        raise ValueError("need 1 <= k <= n/2")
    threshold = (1.0 + eps) * math.log(k) if k > 1 else (1.0 + eps) * 0.0
    tasks = [(n, k, threshold, seed, b, size) for b, size in _batches(trials)]
    hits = int(_run_batches(_quenched_batch, tasks, workers)[0])
    shape = k ** (math.log(2.0) - 1.0 + 2.0 * eps)
    return make_estimate(hits, trials, seed), shape


# ---------------------------------------------------------------------------
# dyadic scan for the four-permutation event
# ---------------------------------------------------------------------------


def _dyadic_ks(n: int) -> list[int]:
    ks = []
    k = 1
    while k <= n // 2:
        ks.append(k)
        k *= 2
    return ks


def _dyadic_batch(task) -> np.ndarray:
    n, ks, seed, b, size = task
    rng = np.random.default_rng([seed, b])
    r = 4
    perms = sample_permutation_batch(n, size * r, rng)
    counts = np.zeros(len(ks), dtype=np.int64)
    cache: dict = {}
    windows = []
    for k in ks:
        w = 0
        for l in range(k // 2 + 1, min(k, n - 1) + 1):
            w |= 1 << l
        windows.append(w)
    for t in range(size):
        inter = (1 << n) - 2
        for i in range(r):
            row = perms[t * r + i].tolist()
            inter &= _interior_bits(cycle_lengths_of_image(row), n, cache)
            if not inter:
                break
        if not inter:
            continue
        for idx, w in enumerate(windows):
            if inter & w:
                counts[idx] += 1
    return counts


def mc_dyadic_scan(
    n: int, trials: int, seed: int, workers: int = 1
) -> tuple[list[tuple[int, Estimate]], Optional[float]]:
    """Per dyadic k: P(four permutations share a fixed-set size in (k/2, k]).

    All windows are evaluated on the same four permutations per trial.
    Also returns the least-squares slope of log p-hat against log k over
    the windows with k >= 2 and a nonzero estimate (None if under two
    usable points).
    """
    if n < 4:
        raise ValueError("need n >= 4")
    ks = _dyadic_ks(n)
    tasks = [(n, ks, seed, b, size) for b, size in _batches(trials)]
    counts = _run_batches(_dyadic_batch, tasks, workers)
    ests = [(k, make_estimate(int(c), trials, seed)) for k, c in zip(ks, counts)]
    pts = [(math.log(k), math.log(e.p_hat)) for k, e in ests if k >= 2 and e.p_hat > 0]
    slope = None
    if len(pts) >= 2:
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        slope = float(np.polyfit(xs, ys, 1)[0])
    return ests, slope


# ---------------------------------------------------------------------------
# S-set size and containment
# ---------------------------------------------------------------------------


def sbig_samples(
    k: int,
    trials: int,
    seed: int,
    beta: float = BETA,
    cap_budget: int = 1 << 16,
) -> tuple[np.ndarray, np.ndarray]:
    """Per trial: (S contained in [-10k,10k]^2, |S|) for fresh instances."""
    from .fourier import sample_riesz_instance

    contained = np.zeros(trials, dtype=bool)
    sizes = np.zeros(trials, dtype=np.int64)
    for b, size in _batches(trials):
        rng = np.random.default_rng([seed, b])
        for t in range(size):
            inst = sample_riesz_instance(k, rng, beta)
            idx = b * BATCH + t
            caps = inst.caps()
            contained[idx] = max(caps) <= 10 * k
            sizes[idx] = compute_S(inst, cap_budget).count()
    return contained, sizes


def mc_sbig(
    k: int, trials: int, seed: int, c: float, beta: float = BETA
) -> tuple[Estimate, Estimate]:
    """(joint event estimate, containment-only estimate), coupled per trial.

    Joint event: S inside [-10k, 10k]^2 and |S| >= c*k^2. The containment
    estimate is a relaxation, so its count is >= the joint count per run.
    """
    if k < 4 or c <= 0:
        raise ValueError("need k >= 4 and c > 0")
    contained, sizes = sbig_samples(k, trials, seed, beta)
    joint = int((contained & (sizes >= c * k * k)).sum())
    return make_estimate(joint, trials, seed), make_estimate(
        int(contained.sum()), trials, seed
    )


def calibrate_sbig_c(
    k: int,
    trials: int,
    seed: int,
    beta: float = BETA,
    grid: Optional[np.ndarray] = None,
) -> Optional[float]:
    """Largest grid value c with joint-event frequency >= 1/2, or None."""
    if grid is None:
        grid = np.arange(0.05, 5.0001, 0.05)
    contained, sizes = sbig_samples(k, trials, seed, beta)
    best = None
    for c in grid:
        joint = int((contained & (sizes >= c * k * k)).sum())
        if joint * 2 >= trials:
            best = float(c)
    return best


# ---------------------------------------------------------------------------
# gated integral decay
# ---------------------------------------------------------------------------


def calibrate_event_C(eps: float, k: int, samples: int, seed: int) -> float:
    """Smallest C with empirical P(short-cycle event) >= 1 - eps.

    Returns the (1-eps) quantile of the sampled deficits.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    deficits = np.zeros(samples)
    for b, size in _batches(samples):
        rng = np.random.default_rng([seed, b])
        for t in range(size):
            v = sample_vector(k, rng)
            deficits[b * BATCH + t] = event_deficit(v, k)
    return float(np.quantile(deficits, 1.0 - eps, method="higher"))


def _gated_integrals(
    k: int,
    samples: int,
    C: float,
    seed: int,
    beta: float,
    budget_cells: int,
) -> np.ndarray:
    """Values of 1_E * integral(|F|^2) for fresh full-vector triples."""
    span = riesz_span(k, beta)
    out = np.zeros(samples)
    for b, size in _batches(samples):
        rng = np.random.default_rng([seed, b])
        for t in range(size):
            vx, vy, vz = (sample_vector(k, rng) for _ in range(3))
            gate = all(event_deficit(v, k) <= C for v in (vx, vy, vz))
            if not gate:
                continue
            inst = RieszInstance(
                span=span,
                x=vx.counts[span[0] : span[1]],
                y=vy.counts[span[0] : span[1]],
                z=vz.counts[span[0] : span[1]],
                beta=beta,
                k=k,
            )
            out[b * BATCH + t] = integrate_F_sq(inst, budget_cells)
    return out


def mc_integral_decay(
    k_list: Sequence[int],
    samples: int,
    eps: float,
    seed: int,
    beta: float = BETA,
    C: Optional[float] = None,
    budget_cells: int = 1 << 24,
    calib_samples: int = 2000,
) -> list[dict]:
    """Median and mean of the event-gated |F|^2 integral at each scale k.

    The gate constant C is calibrated once, at the largest requested k,
    and held fixed across scales (the lemma's constant is k-uniform).
    """
    if C is None:
        C = calibrate_event_C(eps, max(k_list), calib_samples, seed + 1)
    out = []
    for k in k_list:
        vals = _gated_integrals(k, samples, C, seed, beta, budget_cells)
        out.append(
            {
                "k": k,
                "median": float(np.median(vals)),
                "mean": float(vals.mean()),
                "gated_fraction": float((vals > 0).mean()),
                "C": C,
            }
        )
    return out


# ---------------------------------------------------------------------------
# witness search (three equal subset sums)
# ---------------------------------------------------------------------------


def witness_search(
    k: int,
    vx: PoissonCycleVector,
    vy: PoissonCycleVector,
    vz: PoissonCycleVector,
    beta: float = BETA,
) -> Optional[tuple[dict, dict, dict]]:
    """Equal-sum coefficient triple over (k^beta, 60k], or None.

    Follows the constructive strategy: pick a long length j3 in (20k, 50k]
    present in the third vector, then search lengths j1, j2 in (10k, 60k]
    whose offsets against j3 land in the difference set of the short window
    (k^beta, k]. Absence is honest for the strategy, not for all witnesses.
    """
    from .perms import subset_sum_witness

    if any(v.K < 60 * k for v in (vx, vy, vz)):
        raise ValueError("vectors must extend to 60k")
    lo = riesz_span(k, beta)[0]
    items = []
    bitsets = []
    caps = []
    for v in (vx, vy, vz):
        it = [(j, int(v.counts[j - 1])) for j in range(lo + 1, k + 1) if v.count(j)]
        cap = sum(j * c for j, c in it)
        items.append(it)
        caps.append(cap)
        bitsets.append(bounded_subset_sum_bits(it, cap))
    b1, b2, b3 = bitsets
    c1, c2, c3 = caps

    j3_opts = [j for j in range(20 * k + 1, 50 * k + 1) if vz.count(j) > 0]
    j1_opts = [j for j in range(10 * k + 1, 60 * k + 1) if vx.count(j) > 0]
    j2_opts = [j for j in range(10 * k + 1, 60 * k + 1) if vy.count(j) > 0]
    for j3 in j3_opts:
        for j1 in j1_opts:
            a = j3 - j1  # n1 - n3 must equal a
            if a < -c3 or a > c1:
                continue
            for j2 in j2_opts:
                b = j3 - j2
                if b < -c3 or b > c2:
                    continue
                for n3 in range(max(0, -a, -b), c3 + 1):
                    if not b3 >> n3 & 1:
                        continue
                    n1, n2 = n3 + a, n3 + b
                    if n1 <= c1 and n2 <= c2 and b1 >> n1 & 1 and b2 >> n2 & 1:
                        wx = subset_sum_witness(items[0], n1) or {}
                        wy = subset_sum_witness(items[1], n2) or {}
                        wz = subset_sum_witness(items[2], n3) or {}
                        wx[j1] = wx.get(j1, 0) + 1
                        wy[j2] = wy.get(j2, 0) + 1
                        wz[j3] = wz.get(j3, 0) + 1
                        s1 = sum(j * c for j, c in wx.items())
                        s2 = sum(j * c for j, c in wy.items())
                        s3 = sum(j * c for j, c in wz.items())
                        assert s1 == s2 == s3 and s1 > 0
                        return wx, wy, wz
    # degenerate fallback: a single length shared by all three vectors
    for j in range(lo + 1, 60 * k + 1):
        if vx.count(j) and vy.count(j) and vz.count(j):
            return {j: 1}, {j: 1}, {j: 1}
    return None


def witness_frequency(
    k: int, trials: int, seed: int, beta: float = BETA
) -> Estimate:
    """Empirical success rate of the witness search on fresh triples."""
    hits = 0
    for b, size in _batches(trials):
        rng = np.random.default_rng([seed, b])
        for _ in range(size):
            vs = [sample_vector(60 * k, rng) for _ in range(3)]
            if witness_search(k, *vs, beta=beta) is not None:
                hits += 1
    return make_estimate(hits, trials, seed)


# ---------------------------------------------------------------------------
# disjoint interval recursion
# ---------------------------------------------------------------------------


def disjoint_intervals(
    k1: int, count: int, beta: float = BETA, max_hi: int = 1 << 62
) -> list[tuple[int, int]]:
    """Intervals (floor(k_i^beta), 60 k_i] with k_{i+1} = ceil((60 k_i)^(1/beta)).

    Pairwise disjoint by construction; raises CapacityError once the next
    scale would overflow the integer budget (after very few steps, since
    1/beta is about 55 at the standard beta).
    """
    if k1 < 1 or count < 1:
        raise ValueError("k1 and count must be positive")
    if math.floor(k1**beta) < 1:
        raise ValueError("k1 too small: k1^beta must be at least 1")
    out = []
    k = k1
    for i in range(count):
        lo, hi = math.floor(k**beta), 60 * k
        if lo >= hi:
            raise ValueError("interval is empty at this scale")
        out.append((lo, hi))
        if i + 1 < count:
            if math.log(60 * k) / beta > math.log(max_hi):
                raise CapacityError(
                    f"next scale (60*{k})^(1/{beta:.4g}) exceeds the integer budget"
                )
            nxt = math.ceil((60 * k) ** (1.0 / beta))
            while math.floor(nxt**beta) < hi:  # guard against float undershoot
                nxt = int(nxt * 1.001) + 1
            k = nxt
    for (lo1, hi1), (lo2, hi2) in zip(out, out[1:]):
        assert lo2 >= hi1
    return out


# ---------------------------------------------------------------------------
# model-convergence total variation
# ---------------------------------------------------------------------------


def _encode_rows(rows: np.ndarray) -> np.ndarray:
    rows = np.minimum(rows, 63)
    key = np.zeros(len(rows), dtype=np.int64)
    for i in range(rows.shape[1]):
        key = (key << 6) | rows[:, i]
    return key


def tv_distance_rows(a: np.ndarray, b: np.ndarray) -> float:
    """TV distance between the empirical laws of two samples of count rows."""
    ka, kb = _encode_rows(a), _encode_rows(b)
    keys = np.union1d(ka, kb)
    pa = np.searchsorted(keys, ka)
    pb = np.searchsorted(keys, kb)
    ca = np.bincount(pa, minlength=len(keys)) / len(ka)
    cb = np.bincount(pb, minlength=len(keys)) / len(kb)
    return 0.5 * float(np.abs(ca - cb).sum())


def mc_poisson_tv(
    n: int,
    kmax: int,
    samples: int,
    seed: int,
    parity: Optional[str] = None,
) -> float:
    """TV distance between permutation small-cycle counts and the model.

    Both sides are sampled: `samples` uniform permutations of S_n (parity
    forced when requested) versus `samples` truncated model vectors.
    """
    perm_rows = np.zeros((samples, kmax), dtype=np.int64)
    for b, size in _batches(samples):
        rng = np.random.default_rng([seed, 2 * b])
        perms = sample_permutation_batch(n, size, rng)
        if parity is not None:
            perms = force_parity_batch(perms, parity)
        perm_rows[b * BATCH : b * BATCH + size] = small_cycle_counts_batch(perms, kmax)
    rng = np.random.default_rng([seed, 1])
    lams = np.tile(1.0 / np.arange(1, kmax + 1), (samples, 1))
    model_rows = poisson_inversion(lams, rng)
    return tv_distance_rows(perm_rows, model_rows)


# ---------------------------------------------------------------------------
# pointwise decay diagnostic
# ---------------------------------------------------------------------------


def riesz_theta_diagnostic(
    k: int,
    points,
    samples: int,
    C: float,
    seed: int,
    beta: float = BETA,
) -> list[dict]:
    """Ratio of the Monte Carlo mean of 1_E |F(theta)|^2 to the decay shape.

    The shape is (k * prod ||theta_i||^(1/3))^(-2.02); the proportionality
    constant is unquantified, so callers treat the ratio as a diagnostic.
    Points must have all three coordinates at distance >= k^-beta from the
    integers (the regime where the shape applies).
    """
    from .fourier import eval_F

    span = riesz_span(k, beta)
    out = []
    for t in points:
        norms = t.norms()
        if min(norms) < k**-beta:
            raise ValueError("diagnostic points must be in the far regime")
        rng = np.random.default_rng([seed, int(1e6 * norms[0]), int(1e6 * norms[1])])
        acc = 0.0
        for _ in range(samples):
            vx, vy, vz = (sample_vector(k, rng) for _ in range(3))
            if not all(event_deficit(v, k) <= C for v in (vx, vy, vz)):
                continue
            inst = RieszInstance(
                span=span,
                x=vx.counts[span[0] : span[1]],
                y=vy.counts[span[0] : span[1]],
                z=vz.counts[span[0] : span[1]],
                beta=beta,
                k=k,
            )
            acc += abs(eval_F(inst, t)) ** 2
        mean = acc / samples
        shape = (k * (norms[0] * norms[1] * norms[2]) ** (1.0 / 3.0)) ** -2.02
        out.append({"norms": norms, "mean": mean, "shape": shape, "ratio": mean / shape})
    return out
