import math

import numpy as np
import pytest

from helpers import brute_subset_sums
from invgen.constants import harmonic
from invgen.poisson import (
    PoissonCycleVector,
    event_E,
    event_deficit,
    intersection_trial,
    poisson_inversion,
    sample_span_counts,
    sample_vector,
    sumset,
    zero_window_prob,
)


def vec(*counts):
    return PoissonCycleVector(np.array(counts, dtype=np.int64))


class TestSampling:
    def test_vector_shape_and_validation(self):
        v = sample_vector(10, np.random.default_rng(0))
        assert v.K == 10 and (v.counts >= 0).all()
        with pytest.raises(ValueError):
            sample_vector(0, np.random.default_rng(0))
        with pytest.raises(ValueError):
            PoissonCycleVector(np.array([1, -1]))

    def test_means_match_one_over_j(self):
        draws = 100000
        rng = np.random.default_rng(42)
        lams = np.tile(1.0 / np.arange(1, 6), (draws, 1))
        x = poisson_inversion(lams, rng)
        for j in range(1, 6):
            mean = x[:, j - 1].mean()
            sigma = math.sqrt((1.0 / j) / draws)  # Poisson variance = mean
            assert abs(mean - 1.0 / j) < 4 * sigma
        # mean of X_1 within the coarse window too
        assert 0.96 < x[:, 0].mean() < 1.04

    def test_mass_at_zero(self):
        draws = 100000
        rng = np.random.default_rng(43)
        x = poisson_inversion(np.full(draws, 0.25), rng)
        p = math.exp(-0.25)
        sigma = math.sqrt(p * (1 - p) / draws)
        assert abs((x == 0).mean() - p) < 4 * sigma

    def test_weighted_total_mean_is_K(self):
        draws, K = 100000, 50
        rng = np.random.default_rng(44)
        lams = np.tile(1.0 / np.arange(1, K + 1), (draws, 1))
        x = poisson_inversion(lams, rng)
        totals = (x * np.arange(1, K + 1)).sum(axis=1)
        # Var(sum j X_j) = sum j^2 / j = K(K+1)/2
        sigma = math.sqrt(K * (K + 1) / 2 / draws)
        assert abs(totals.mean() - K) < 4 * sigma

    def test_pgf_identity(self):
        # E a^P = exp((a-1) lambda) for Poisson(lambda)
        draws = 100000
        for i, (a, lam) in enumerate(((2.0, 1.0), (2.0, 0.5), (0.99, 1.0 / 3.0))):
            rng = np.random.default_rng(100 + i)
            p = poisson_inversion(np.full(draws, lam), rng)
            vals = a**p.astype(float)
            want = math.exp((a - 1.0) * lam)
            sigma = vals.std() / math.sqrt(draws)
            assert abs(vals.mean() - want) < 4 * sigma

    def test_span_counts(self):
        rng = np.random.default_rng(1)
        counts = sample_span_counts((3, 8), rng)
        assert counts.shape == (5,)
        with pytest.raises(ValueError):
            sample_span_counts((5, 5), rng)


class TestSumset:
    def test_trivial_examples(self):
        assert sumset((0, 3), vec(0, 0, 0)).support() == [0]
        assert sumset((0, 3), vec(0, 1, 0)).support() == [0, 2]
        assert sumset((0, 3), vec(2, 0, 0)).support() == [0, 1, 2]

    def test_against_brute_force_enumeration(self):
        rng = np.random.default_rng(9)
        checked = 0
        while checked < 60:
            v = sample_vector(12, rng)
            if np.prod(v.counts + 1) > 10**5:
                continue
            checked += 1
            lengths = [j for j in range(1, 13) for _ in range(v.count(j))]
            assert set(sumset((0, 12), v).support()) == brute_subset_sums(lengths)

    def test_subinterval_and_cap(self):
        v = vec(1, 1, 0, 1)  # X_1 = X_2 = X_4 = 1
        assert set(sumset((1, 4), v).support()) == {0, 2, 4, 6}
        capped = sumset((1, 4), v, cap=3)
        assert set(capped.support()) == {0, 2}
        with pytest.raises(ValueError):
            sumset((0, 9), v)


class TestIntersection:
    def test_bit_zero_always_set(self):
        rng = np.random.default_rng(2)
        for r in (1, 2, 4):
            assert 0 in intersection_trial(r, 10, 10, rng)

    def test_r1_nonzero_probability_analytic(self):
        # nonempty iff not all X_j = 0: P = 1 - e^{-h_K}
        draws, K = 20000, 2
        rng = np.random.default_rng(3)
        hits = 0
        for _ in range(draws):
            s = intersection_trial(1, K, K, rng)
            hits += any(l in s for l in range(1, K + 1))
        p = 1.0 - math.exp(-harmonic(K))
        sigma = math.sqrt(p * (1 - p) / draws)
        assert abs(hits / draws - p) < 4 * sigma

    def test_markov_containment(self):
        # all three sumsets of [1, k] inside [0, 3k/eps] with prob >= 1 - eps
        eps, k, draws = 0.3, 50, 10000
        bound = int(3 * k / eps)
        rng = np.random.default_rng(4)
        hits = 0
        for _ in range(draws):
            ok = True
            for _ in range(3):
                v = sample_vector(k, rng)
                ok = ok and v.weighted_total((0, k)) <= bound
            hits += ok
        assert hits / draws >= 1 - eps


class TestEventE:
    def test_all_zero_vector_fails_at_k100(self):
        v = PoissonCycleVector(np.zeros(100, dtype=np.int64))
        assert event_deficit(v, 100) == pytest.approx(0.99 * math.log(100))
        assert not event_E(v, 100, C=1.0)

    def test_large_C_always_true(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            v = sample_vector(30, rng)
            assert event_E(v, 30, C=0.99 * math.log(30))

    def test_deficit_matches_direct_sweep(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            v = sample_vector(20, rng)
            worst = max(
                0.99 * math.log(20 / max(m, 1))
                - sum(v.count(j) for j in range(m + 1, 21))
                for m in range(0, 21)
            )
            assert event_deficit(v, 20) == pytest.approx(worst)

    def test_truncation_guard(self):
        with pytest.raises(ValueError):
            event_deficit(vec(1, 0), 5)


class TestZeroWindow:
    def test_endpoints_and_formula(self):
        assert zero_window_prob(7, 7) == 1.0
        assert zero_window_prob(0, 2) == pytest.approx(math.exp(-1.5))
        assert zero_window_prob(200, 500) == pytest.approx(0.4005, abs=2e-4)

    def test_long_window_below_half_for_all_k(self):
        # (20k, 50k] spans just under log(5/2) of harmonic mass: e^-log(5/2) < 1/2
        for k in range(1, 200):
            assert zero_window_prob(20 * k, 50 * k) <= 0.5

    def test_matches_empirical(self):
        draws = 20000
        rng = np.random.default_rng(8)
        counts = poisson_inversion(
            np.tile(1.0 / np.arange(3, 7), (draws, 1)), rng
        )
        p = zero_window_prob(2, 6)
        sigma = math.sqrt(p * (1 - p) / draws)
        assert abs((counts == 0).all(axis=1).mean() - p) < 4 * sigma

    def test_rejects_bad_window(self):
        with pytest.raises(ValueError):
            zero_window_prob(5, 3)
