import math
from fractions import Fraction

import numpy as np
import pytest

from helpers import (
    instance_from_counts,
    symbolic_coeffs,
    symbolic_power_sum,
    symbolic_support,
)
from invgen.constants import BETA, mainlemma_constants_check, mainlemma_margins
from invgen.errors import CapacityError
from invgen.fourier import (
    TorusPoint,
    compute_S,
    eval_F,
    integrate_F_sq,
    ki_thresholds,
    parseval_lower_bound_check,
    riesz_span,
    sample_riesz_instance,
    tnorm,
    trigsum,
)


def zero_instance(k=10, width=None):
    span = riesz_span(k)
    w = span[1] - span[0]
    z = [0] * w
    return instance_from_counts(k, BETA, span, z, z, z)


def unit_instance(slot=3, axis="x", k=10):
    span = riesz_span(k)
    w = span[1] - span[0]
    arrs = {a: [0] * w for a in "xyz"}
    arrs[axis][slot] = 1
    return instance_from_counts(k, BETA, span, arrs["x"], arrs["y"], arrs["z"])


def small_random_instance(rng, max_weight=60):
    while True:
        k = int(rng.integers(6, 16))
        inst = sample_riesz_instance(k, rng)
        if 0 < inst.total_weight() <= max_weight:
            return inst


class TestTnormAndTorusPoint:
    def test_tnorm_values(self):
        assert tnorm(0.0) == 0.0
        assert tnorm(0.5) == 0.5
        assert tnorm(0.75) == 0.25
        assert tnorm(2.25) == 0.25
        assert tnorm(Fraction(1, 3)) == pytest.approx(1 / 3)
        assert tnorm(Fraction(10**15 + 1, 3 * 10**15)) > 0  # exact reduction

    def test_theta3_closes_the_triple(self):
        for t1, t2 in ((0.1, 0.3), (0.9, 0.9), (Fraction(1, 3), Fraction(1, 2))):
            t = TorusPoint(t1, t2)
            total = float(t.theta1) + float(t.theta2) + float(t.theta3)
            assert total % 1.0 == pytest.approx(0.0, abs=1e-12) or total % 1.0 == (
                pytest.approx(1.0, abs=1e-12)
            )
            assert all(0.0 <= x <= 0.5 for x in t.norms())


class TestEvalF:
    def test_value_one_at_origin(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            inst = small_random_instance(rng)
            assert eval_F(inst, TorusPoint(0.0, 0.0)) == pytest.approx(1.0)

    def test_all_zero_instance_is_constant_one(self):
        inst = zero_instance()
        for t in (TorusPoint(0.2, 0.7), TorusPoint(0.5, 0.5)):
            assert eval_F(inst, t) == pytest.approx(1.0)

    def test_single_factor_vanishes_at_half_period(self):
        inst = unit_instance(slot=2)
        j = inst.span[0] + 3
        assert abs(eval_F(inst, TorusPoint(1.0 / (2 * j), 0.3))) < 1e-12

    def test_modulus_at_most_one(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            inst = small_random_instance(rng)
            t = TorusPoint(float(rng.random()), float(rng.random()))
            assert abs(eval_F(inst, t)) <= 1.0 + 1e-12

    def test_matches_symbolic_expansion_pointwise(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            inst = small_random_instance(rng, max_weight=30)
            t = TorusPoint(float(rng.random()), float(rng.random()))
            want = sum(
                float(c)
                * complex(
                    math.cos(2 * math.pi * (p * t.theta1 + q * t.theta2)),
                    math.sin(2 * math.pi * (p * t.theta1 + q * t.theta2)),
                )
                for (p, q), c in symbolic_coeffs(inst).items()
            )
            assert eval_F(inst, t) == pytest.approx(want, abs=1e-9)


class TestTrigsum:
    def test_theta_zero_is_harmonic(self):
        assert trigsum(1000, 0.0) == pytest.approx(
            math.fsum(1.0 / j for j in range(1, 1001))
        )

    def test_alternating_limit(self):
        assert abs(trigsum(10**6, Fraction(1, 2)) + math.log(2)) < 1e-5

    def test_third_roots_limit(self):
        # closed form: sum cos(2 pi j/3)/j -> -log|2 sin(pi/3)| = -log sqrt(3)
        assert abs(trigsum(10**6, Fraction(1, 3)) + 0.5 * math.log(3)) < 1e-4

    def test_fraction_and_float_agree(self):
        for th in (Fraction(1, 7), Fraction(3, 10)):
            assert trigsum(5000, th) == pytest.approx(trigsum(5000, float(th)), abs=1e-9)

    def test_rejects_bad_m(self):
        with pytest.raises(ValueError):
            trigsum(0, 0.5)


class TestComputeS:
    def test_all_zero_instance(self):
        s = compute_S(zero_instance())
        assert s.count() == 1 and s.contains(0, 0)

    def test_single_x_unit(self):
        inst = unit_instance(slot=1, axis="x")
        j = inst.span[0] + 2
        s = compute_S(inst)
        assert s.count() == 2
        assert s.contains(0, 0) and s.contains(j, 0)

    def test_single_y_and_z_units(self):
        insty = unit_instance(slot=1, axis="y")
        j = insty.span[0] + 2
        assert set(compute_S(insty).support()) == {(0, 0), (0, j)}
        instz = unit_instance(slot=1, axis="z")
        assert set(compute_S(instz).support()) == {(0, 0), (-j, -j)}

    def test_matches_symbolic_support_at_k30(self):
        rng = np.random.default_rng(3)
        done = 0
        while done < 20:
            inst = sample_riesz_instance(30, rng)
            if inst.total_weight() > 60:
                continue
            done += 1
            assert set(compute_S(inst).support()) == symbolic_support(inst)

    def test_cap_budget_error(self):
        rng = np.random.default_rng(4)
        inst = small_random_instance(rng)
        with pytest.raises(CapacityError):
            compute_S(inst, cap_budget=1)


class TestIntegrateFsq:
    def test_trivial_values(self):
        assert integrate_F_sq(zero_instance()) == pytest.approx(1.0)
        assert integrate_F_sq(unit_instance(slot=0, axis="x")) == pytest.approx(0.5)
        span = riesz_span(10)
        w = span[1] - span[0]
        x = [0] * w
        y = [0] * w
        x[0], y[2] = 1, 1
        inst = instance_from_counts(10, BETA, span, x, y, [0] * w)
        assert integrate_F_sq(inst) == pytest.approx(0.25)

    def test_matches_symbolic_power_sum(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            inst = small_random_instance(rng)
            assert abs(integrate_F_sq(inst) - float(symbolic_power_sum(inst))) < 1e-9

    def test_budget_error(self):
        rng = np.random.default_rng(6)
        inst = small_random_instance(rng)
        with pytest.raises(CapacityError):
            integrate_F_sq(inst, budget_cells=4)


class TestParseval:
    def test_equality_cases(self):
        assert parseval_lower_bound_check(zero_instance()) == (1, pytest.approx(1.0))
        size, bound = parseval_lower_bound_check(unit_instance())
        assert size == 2 and bound == pytest.approx(2.0)

    def test_coefficients_sum_to_one(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            inst = small_random_instance(rng)
            assert sum(symbolic_coeffs(inst).values()) == 1

    def test_no_violations_on_random_instances(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            inst = sample_riesz_instance(int(rng.integers(5, 40)), rng)
            size, bound = parseval_lower_bound_check(inst)
            assert size >= bound - 1e-9


class TestKiThresholds:
    def test_three_cases(self):
        k = 100
        # norm 0 -> k
        assert ki_thresholds(TorusPoint(0.0, 0.0), k) == (
            float(k),
            float(k),
            float(k),
        )
        # norm 1/sqrt(k): middle case when k^-beta > k^-1/2
        t = TorusPoint(1.0 / math.sqrt(k), 0.0)
        assert ki_thresholds(t, k)[0] == pytest.approx(math.sqrt(k))
        # far case requires norm >= k^-beta, so k must satisfy 2^(1/beta) <= k
        big_beta = 0.5
        t = TorusPoint(0.5, 0.0)
        assert ki_thresholds(t, 100, beta=big_beta)[0] == pytest.approx(
            100**big_beta
        )

    def test_paper_beta_midrange_at_half(self):
        # at the paper beta, k^-beta > 1/2 for all k < 2^(1/beta), so
        # norm 1/2 falls in the middle case and the threshold is 1/norm = 2
        out = ki_thresholds(TorusPoint(0.5, 0.5), 100)
        assert out[0] == pytest.approx(2.0)

    def test_crude_bound_holds_on_grid(self):
        for k in (10, 100):
            for a in range(1, 10):
                t = TorusPoint(a / 20.0, a / 13.0)
                for ki, norm in zip(ki_thresholds(t, k), t.norms()):
                    if norm > 0:
                        assert ki <= k**BETA / norm ** (1 - BETA) * (1 + 1e-9)


class TestArithmeticSanity:
    def test_mainlemma_inequalities(self):
        assert mainlemma_constants_check()
        m1, m2 = mainlemma_margins()
        assert m1 > 0 and m2 > 0
        assert not mainlemma_constants_check(beta=0.5)
