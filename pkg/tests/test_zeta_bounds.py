# tests/test_zeta_bounds.py
import math
import asyncio

import numpy as np
import pytest

from src.errors import DomainError, InsufficientCoverage, InvalidParams
from src.extremal_functions import ExtremalParams, Kind, l1_distance
from src.zeta_bounds import (
    EULER_GAMMA,
    Regime,
    appendix_A1,
    appendix_A2,
    bound_grid,
    euler_product_lower,
    final_bound,
    hadamard_identity,
    lemma_bound_sum_k,
    lemma_initial_ineq,
    littlewood_bounds,
    mertens_sum,
    prime_sum_bound,
    sandwich_check,
    seam_gap,
    select_regime,
    theorem_lower,
    theorem_upper,
)

T_TEN = 1e10
# log log t > 4 となり Middle 領域が空でない高さ
T_MIDDLE = 1e40


class TestHadamardIdentity:
    @pytest.mark.parametrize("alpha,t", [(0.75, 100.0), (1.0, 500.0), (0.6, 300.0)])
    def test_residual_within_budget(self, zeros, alpha, t):
        check = hadamard_identity(alpha, t, zeros)
        assert abs(check.residual) <= check.budget
        assert abs(check.exact_residual) <= check.zero_tail + 1e-8

    def test_low_height(self, zeros):
        with pytest.raises(DomainError):
            hadamard_identity(0.75, 40.0, zeros)

    def test_insufficient_coverage(self, zeros):
        with pytest.raises(InsufficientCoverage):
            hadamard_identity(0.75, 100.0, zeros.truncated(150.0))


class TestSandwich:
    def test_both_kinds_hold_and_order(self, zeros):
        lower_fn = sandwich_check(ExtremalParams(0.75, 1.0, Kind.MAJORANT), 100.0, zeros)
        upper_fn = sandwich_check(ExtremalParams(0.75, 1.0, Kind.MINORANT), 100.0, zeros)
        assert upper_fn.holds and upper_fn.kind == "minorant"
        assert lower_fn.holds and lower_fn.kind == "majorant"
        assert lower_fn.bound <= upper_fn.bound
        assert upper_fn.actual == lower_fn.actual


class TestPrimeSumBound:
    def test_near_one_branch(self):
        assert prime_sum_bound(math.exp(10.0), 0.95) == pytest.approx(math.log(10.0), abs=1e-12)

    def test_middle_branch(self):
        expected = (0.2 / 0.24) * math.exp(8.0) / 20.0 / (1.0 + math.exp(-2.0)) + math.log(20.0)
        value = prime_sum_bound(math.exp(20.0), 0.6)
        assert value == pytest.approx(expected, rel=1e-12)
        assert value == pytest.approx(112.3965, abs=1e-3)

    def test_switches_to_near_one_as_alpha_grows(self):
        x = math.exp(20.0)
        assert prime_sum_bound(x, 0.96) == pytest.approx(math.log(20.0))
        assert prime_sum_bound(x, 0.9) > math.log(20.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            prime_sum_bound(5.0, 0.75)


class TestLemmas:
    def test_initial_examples(self):
        assert lemma_initial_ineq(0, 2, 100, 0.75)
        assert lemma_initial_ineq(5, 50, 50, 0.6)
        for k in range(6):
            assert lemma_initial_ineq(k, 2, 2, 0.8)

    def test_bound_sum_examples(self):
        assert lemma_bound_sum_k(1, 2, 1000, 0.8)
        assert lemma_bound_sum_k(10, 5000, 1e4, 0.95)
        for k in (1, 4, 9):
            assert lemma_bound_sum_k(k, 300, 300, 0.7)

    def test_random_grid(self):
        rng = np.random.default_rng(7)
        for _ in range(2000):
            x = float(np.exp(rng.uniform(math.log(10.0), math.log(1e6))))
            n = float(rng.uniform(2.0, x))
            alpha = float(rng.uniform(0.51, 1.0))
            k = int(rng.integers(0, 20))
            assert lemma_initial_ineq(k, n, x, alpha)
            assert lemma_bound_sum_k(k + 1, n, x, alpha)

    def test_invalid_inputs(self):
        with pytest.raises(DomainError):
            lemma_initial_ineq(-1, 2, 10, 0.75)
        with pytest.raises(DomainError):
            lemma_bound_sum_k(0, 2, 10, 0.75)
        with pytest.raises(DomainError):
            lemma_bound_sum_k(1, 20, 10, 0.75)
        with pytest.raises(InvalidParams):
            lemma_initial_ineq(1, 2, 10, 0.4)


def _a1_middle(x: float, alpha: float) -> float:
    beta = 1.0 - alpha
    return x ** beta / (beta * math.log(x)) + math.log(math.log(x))


class TestAppendix:
    def test_a1_at_alpha_one(self):
        result = appendix_A1(10.0, 1.0)
        assert result.numeric == pytest.approx(math.log(math.log(10.0)) - math.log(math.log(2.0)), abs=1e-10)
        assert result.numeric == pytest.approx(1.2005454, abs=1e-7)
        assert result.branch == Regime.NEAR_ONE.value

    @pytest.mark.parametrize("alpha", [0.6, 0.75])
    @pytest.mark.parametrize("x", [1e3, 1e4, 1e5, 1e6])
    def test_a1_relative_deviation(self, alpha, x):
        result = appendix_A1(x, alpha)
        assert result.numeric == pytest.approx(result.reference, rel=1e-9)
        deviation = abs(result.numeric / _a1_middle(x, alpha) - 1.0)
        assert deviation <= 2.0 / ((1.0 - alpha) * math.log(x))

    def test_a1_deviation_decreasing(self):
        def deviation(x, alpha):
            return abs(appendix_A1(x, alpha).numeric / _a1_middle(x, alpha) - 1.0)

        quarter = [deviation(x, 0.75) for x in (1e8, 1e12, 1e16)]
        assert all(a > b for a, b in zip(quarter, quarter[1:]))
        wide = [deviation(x, 0.6) for x in (1e6, 1e8, 1e10)]
        assert all(a > b for a, b in zip(wide, wide[1:]))

    def test_a1_absolute_envelope(self):
        result = appendix_A1(1e6, 0.6)
        assert result.branch == Regime.MIDDLE.value
        assert abs(result.numeric - result.asymptotic) <= 3.0 * 1e6 ** 0.4 / (0.16 * math.log(1e6) ** 2)

    def test_a1_near_one_branch(self):
        x = 1e3
        result = appendix_A1(x, 1.0 - 1.0 / math.log(x))
        assert result.branch == Regime.NEAR_ONE.value
        assert abs(result.numeric - math.log(math.log(x))) <= 3.0

    @pytest.mark.parametrize("alpha", [0.6, 0.75])
    def test_a2_deviation(self, alpha):
        deviations = []
        for x in (1e3, 1e4, 1e5, 1e6):
            result = appendix_A2(x, alpha)
            assert result.numeric == pytest.approx(result.reference, rel=1e-9)
            deviation = abs(result.numeric / result.asymptotic - 1.0)
            assert deviation <= 2.0 / (alpha * math.log(x))
            deviations.append(deviation)
        assert all(a > b for a, b in zip(deviations, deviations[1:]))

    def test_a2_absolute_envelope(self):
        result = appendix_A2(1e4, 0.75)
        assert abs(result.numeric - result.asymptotic) <= 4.0 * 1e4 ** 0.75 / math.log(1e4) ** 2

    def test_domain(self):
        with pytest.raises(DomainError):
            appendix_A1(5.0, 0.75)
        with pytest.raises(DomainError):
            appendix_A2(5.0, 0.75)


class TestRegimes:
    def test_select_regime(self):
        # t = 1e10 では NearHalf と NearOne の条件が重なり Middle は空
        assert select_regime(0.7, T_TEN) is Regime.NEAR_HALF
        assert select_regime(0.9, T_TEN) is Regime.NEAR_ONE
        assert select_regime(1.0, T_TEN) is Regime.NEAR_ONE
        assert select_regime(0.75, T_MIDDLE) is Regime.MIDDLE

    def test_height_below_e_e(self):
        with pytest.raises(DomainError):
            select_regime(0.75, 10.0)

    def test_near_one_values(self):
        ll = math.log(math.log(T_TEN))
        upper = theorem_upper(1.0, T_TEN)
        lower = theorem_lower(1.0, T_TEN)
        assert upper.regime is Regime.NEAR_ONE
        assert upper.bound_value == pytest.approx(math.log(2.0 * ll))
        assert lower.bound_value == pytest.approx(-math.log(2.0 * ll))
        assert upper.delta_used == pytest.approx(ll / math.pi)

    def test_middle_values(self):
        alpha = 0.75
        log_t = math.log(T_MIDDLE)
        ll = math.log(log_t)
        coeff = 0.5 + (2 * alpha - 1) / (alpha * (1 - alpha))
        upper = theorem_upper(alpha, T_MIDDLE)
        assert upper.regime is Regime.MIDDLE
        assert upper.main_term == pytest.approx(coeff * log_t ** (2 - 2 * alpha) / ll, rel=1e-12)
        assert upper.bound_value == pytest.approx(upper.main_term + math.log(2 * ll), rel=1e-12)
        lower = theorem_lower(alpha, T_MIDDLE)
        assert lower.main_term == pytest.approx(-upper.main_term)
        assert lower.bound_value == pytest.approx(-upper.bound_value)

    def test_near_half_recovers_limit(self):
        ll = math.log(math.log(T_TEN))
        limit = math.log(2.0) / 2.0 * math.log(T_TEN) / ll
        close = theorem_upper(0.5 + 1e-3 / ll, T_TEN)
        assert close.regime is Regime.NEAR_HALF
        assert abs(close.main_term / limit - 1.0) <= 2e-3
        values = [theorem_upper(0.5 + eps / ll, T_TEN).main_term for eps in (0.5, 0.1, 0.01, 1e-3)]
        assert all(a < b for a, b in zip(values, values[1:]))
        assert values[-1] < limit

    def test_near_half_lower_diverges(self):
        values = [theorem_lower(0.5 + eps, T_TEN).main_term for eps in (0.1, 1e-2, 1e-4, 1e-8)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < -50.0

    def test_branch_monotone_inside_region(self):
        near_half = [theorem_upper(a, T_TEN).bound_value for a in np.linspace(0.51, 0.81, 16)]
        assert all(a > b for a, b in zip(near_half, near_half[1:]))
        ll = math.log(math.log(T_MIDDLE))
        alphas = np.linspace(0.5 + 1.0 / ll + 1e-3, 1.0 - 1.0 / ll - 1e-3, 12)
        middle = [theorem_upper(a, T_MIDDLE) for a in alphas]
        assert all(r.regime is Regime.MIDDLE for r in middle)
        steps = np.abs(np.diff([r.bound_value for r in middle]))
        assert np.all(steps < 0.5 * max(abs(r.bound_value) for r in middle))

    def test_seam_gap_flags(self):
        gaps = seam_gap(T_TEN)
        assert [gap.seam for gap in gaps] == ["near_half", "near_one"]
        for gap in gaps:
            assert gap.alpha_below < gap.alpha_above
            assert gap.gap == pytest.approx(gap.bound_above - gap.bound_below)
        ll = math.log(math.log(T_TEN))
        assert "near_half_seam" in theorem_upper(0.5 + 1.0 / ll, T_TEN).flags
        assert "near_one_seam" in theorem_lower(1.0 - 1.0 / ll, T_TEN).flags

    def test_with_actual_at_desk_height(self):
        upper = theorem_upper(0.75, 1e4, with_actual=True)
        lower = theorem_lower(0.75, 1e4, with_actual=True)
        assert upper.actual == lower.actual
        assert upper.slack == pytest.approx(upper.bound_value - upper.actual)
        assert lower.slack == pytest.approx(lower.actual - lower.bound_value)

    def test_actual_omitted_above_backend_range(self):
        report = theorem_upper(0.75, T_TEN, with_actual=True)
        assert report.actual is None
        assert "actual_omitted" in report.flags
        assert report.to_dict()["regime"] == "NearHalf"


class TestFinalBound:
    def test_minorant_at_alpha_one(self):
        report = final_bound(1.0, T_TEN, 1.0, Kind.MINORANT)
        l1 = l1_distance(ExtremalParams(1.0, 1.0, Kind.MINORANT))
        assert report.side == "upper"
        assert report.main_term == pytest.approx(l1 / (4 * math.pi) * math.log(T_TEN / 2))
        assert report.secondary_terms == pytest.approx(math.log(2 * math.exp(EULER_GAMMA) * math.pi))

    def test_majorant_at_alpha_one(self):
        report = final_bound(1.0, T_TEN, 1.0, Kind.MAJORANT)
        assert report.side == "lower"
        assert report.main_term < 0
        assert report.secondary_terms == pytest.approx(-math.log(12 * math.exp(EULER_GAMMA) / math.pi))

    def test_general_delta_main_term(self):
        alpha, delta, t = 0.75, 1.5, 1e6
        a = (2 * alpha - 1) * math.pi * delta
        expected = math.log((1 + math.exp(-a)) / (1 + math.exp(-4 * math.pi * delta))) / (2 * math.pi * delta)
        report = final_bound(alpha, t, delta, Kind.MINORANT)
        assert report.main_term == pytest.approx(expected * math.log(t / 2), rel=1e-9)
        assert report.delta_used == delta

    def test_default_delta(self):
        report = final_bound(0.8, T_TEN)
        assert report.delta_used == pytest.approx(math.log(math.log(T_TEN)) / math.pi)

    def test_upper_above_lower_with_actual(self):
        upper = final_bound(0.75, 500.0, 1.0, Kind.MINORANT, with_actual=True)
        lower = final_bound(0.75, 500.0, 1.0, Kind.MAJORANT, with_actual=True)
        assert lower.bound_value < upper.bound_value
        assert upper.actual is not None


class TestLittlewood:
    def test_constants(self):
        report = littlewood_bounds(T_TEN)
        ll = math.log(math.log(T_TEN))
        assert report.upper / ll == pytest.approx(3.5621450, abs=1e-6)
        assert report.lower_reciprocal / ll == pytest.approx(2.1655244, abs=1e-6)
        assert report.upper == pytest.approx(11.17, abs=0.01)
        assert report.actual_abs is None

    def test_actual_slack(self):
        report = littlewood_bounds(1e4, with_actual=True)
        assert report.upper_slack > 0
        assert report.lower_slack > 0
        assert report.actual_reciprocal == pytest.approx(1.0 / report.actual_abs)


class TestMertens:
    def test_mertens_sum(self, table):
        result = mertens_sum(table, 500)
        assert result.reference == pytest.approx(math.log(math.log(500)) + EULER_GAMMA)
        assert abs(result.difference) < 0.05

    def test_euler_product(self, table):
        result = euler_product_lower(table, 500)
        assert result.value < 0
        assert abs(result.difference) < 0.1

    def test_domain(self, table):
        with pytest.raises(DomainError):
            mertens_sum(table, 601)
        with pytest.raises(DomainError):
            euler_product_lower(table, 2)


def test_bound_grid_order():
    reports = asyncio.run(bound_grid([0.75, 1.0], [T_TEN]))
    assert [(r.alpha, r.side) for r in reports] == [
        (0.75, "upper"), (0.75, "lower"), (1.0, "upper"), (1.0, "lower")
    ]
