import math

import numpy as np
import pytest
from scipy import integrate

from pricepump import (
    LengthMismatch,
    MarketState,
    PsychoParams,
    SaturatedHazard,
    annual_growth_rate,
    bubble_peak_time,
    crash_time_density,
    discounted_price_series,
    estimate_gamma,
    expected_discounted_price,
    exposure_proportions,
    hazard_curve,
    hazard_rate,
    hazard_survival,
    survival_curve,
)

from conftest import random_state


def golden_section_argmax(f, lo, hi, tol=1e-12):
    """Independent maximizer used as the oracle for the peak search."""
    inv_phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    while b - a > tol * max(1.0, abs(b)):
        if f(c) > f(d):
            b = d
        else:
            a = c
        c = b - inv_phi * (b - a)
        d = a + inv_phi * (b - a)
    return (a + b) / 2


class TestExposureProportions:
    def test_fresh_market_has_zero_drawdown(self, rng):
        state = random_state(rng, 20)
        assert exposure_proportions(state).r == 0.0

    def test_all_stretched(self):
        state = MarketState(
            price=1.0, day=0,
            stock_value=np.full(8, 20.0), cash=np.ones(8),
            target_ratio=np.ones(8), initial_cash=np.ones(8),
        )
        out = exposure_proportions(state, q_threshold=0.1)
        assert out.q == 1.0

    def test_matches_enumeration_oracle(self, rng):
        for _ in range(50):
            state = random_state(rng, int(rng.integers(2, 30)))
            state.cash = rng.uniform(0.01, 2.0, state.n_agents)
            out = exposure_proportions(state, q_threshold=0.3, r_threshold=0.6)
            q_count = sum(
                1 for i in range(state.n_agents)
                if state.cash[i] / state.stock_value[i] < 0.3
            )
            r_count = sum(
                1 for i in range(state.n_agents)
                if state.cash[i] / state.initial_cash[i] < 0.6
            )
            assert out.q == q_count / state.n_agents
            assert out.r == r_count / state.n_agents


class TestHazard:
    @pytest.mark.parametrize("p,expected", [(0.0, 0.0), (0.5, 1.0), (0.9, 9.0)])
    def test_odds_arithmetic(self, p, expected):
        assert hazard_rate(p) == pytest.approx(expected, rel=1e-12)

    def test_monotone(self):
        grid = np.linspace(0, 0.99, 100)
        values = [hazard_rate(p) for p in grid]
        assert np.all(np.diff(values) > 0)

    def test_saturation_raises(self):
        with pytest.raises(SaturatedHazard):
            hazard_rate(1.0)
        with pytest.raises(SaturatedHazard):
            hazard_rate(1.0 - 1e-13)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            hazard_rate(-0.1)
        with pytest.raises(ValueError):
            hazard_rate(1.1)

    def test_curve_matches_scalar_and_saturates_to_inf(self):
        p = np.array([0.0, 0.25, 0.5, 1.0])
        h = hazard_curve(p)
        assert h[0] == 0.0
        assert h[1] == pytest.approx(hazard_rate(0.25), rel=1e-15)
        assert h[2] == pytest.approx(1.0, rel=1e-15)
        assert np.isinf(h[3])


class TestSurvival:
    def test_zero_hazard(self):
        np.testing.assert_array_equal(survival_curve(np.zeros(10), 1 / 360), np.ones(10))

    def test_constant_hazard_closed_form(self):
        h0, dt, n = 2.5, 1 / 360, 400
        s = survival_curve(np.full(n, h0), dt)
        t = np.arange(n) * dt
        np.testing.assert_allclose(s, np.exp(-h0 * t), rtol=1e-12)

    def test_linear_hazard_closed_form(self):
        # trapezoid integrates a linear integrand exactly
        sigma, gamma, dt, n = 0.06, 0.36, 1 / 360, 7200
        t = np.arange(n) * dt
        s = survival_curve(sigma**2 * t / gamma, dt)
        np.testing.assert_allclose(s, np.exp(-sigma**2 * t**2 / (2 * gamma)), rtol=1e-9)

    def test_nonincreasing_with_unit_start(self, rng):
        h = rng.uniform(0, 5, 200)
        s = survival_curve(h, 1 / 360)
        assert s[0] == 1.0
        assert np.all(np.diff(s) <= 0)

    def test_infinite_hazard_zeroes_curve(self):
        h = np.array([0.0, 1.0, np.inf, 1.0])
        s = survival_curve(h, 1 / 360)
        assert s[0] == 1.0 and s[1] > 0
        assert s[2] == 0.0 and s[3] == 0.0

    def test_bundle_helper(self):
        curve = hazard_survival(np.array([0.0, 0.5, 0.5]), 1 / 360)
        assert curve.survival[0] == 1.0
        assert curve.hazard[1] == 1.0


class TestDiscountedPrice:
    def test_unit_survival_is_identity(self):
        prices = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(discounted_price_series(prices, np.ones(3)), prices)

    def test_half_survival_halves(self):
        prices = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(
            discounted_price_series(prices, np.full(3, 0.5)), prices / 2
        )

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            discounted_price_series(np.ones(3), np.ones(4))


class TestGammaFit:
    def test_exact_law(self):
        h = np.linspace(0, 0.5, 100)
        fit = estimate_gamma(0.4 * h, h)
        assert fit.slope == pytest.approx(0.4, rel=1e-12)
        assert fit.r_squared == pytest.approx(1.0, rel=1e-12)

    def test_series_must_align(self):
        with pytest.raises(LengthMismatch):
            estimate_gamma(np.ones(5), np.ones(6))


class TestCrashTimeDensity:
    def test_zero_at_origin(self):
        assert crash_time_density(0.06, 0.36, 0.0) == 0.0

    def test_integrates_to_one(self):
        total, err = integrate.quad(
            lambda t: crash_time_density(0.06, 0.36, t), 0, np.inf
        )
        assert abs(total - 1.0) < 1e-6

    def test_mode_at_sqrt_gamma_over_sigma(self):
        sigma, gamma = 0.08, 0.25
        t = np.linspace(0, 40, 400001)
        dens = crash_time_density(sigma, gamma, t)
        assert t[np.argmax(dens)] == pytest.approx(math.sqrt(gamma) / sigma, rel=1e-4)

    def test_equals_negative_survival_derivative(self):
        # density = h(t) S(t) with h = sigma^2 t / gamma; compare to -dS/dt
        sigma, gamma = 0.06, 0.36
        t = np.linspace(0.0, 60.0, 200001)
        s = np.exp(-(sigma**2) * t**2 / (2 * gamma))
        numeric = -np.gradient(s, t)
        np.testing.assert_allclose(
            crash_time_density(sigma, gamma, t[1:-1]), numeric[1:-1], atol=1e-5
        )


class TestExpectedDiscountedPrice:
    def test_starts_at_p0(self):
        assert expected_discounted_price(2.5, 0.5, 0.06, 0.36, 0.0) == 2.5

    def test_zero_growth_strictly_decreasing(self):
        t = np.linspace(0, 10, 50)
        values = expected_discounted_price(1.0, 1e-300, 0.06, 0.36, t)
        assert np.all(np.diff(values) < 0)

    def test_printed_formula_arithmetic(self):
        # independent evaluation with scalar math in a different operation order
        p0, r0, sigma, gamma, t = 1.0, 0.51, 0.06, 0.36, 10.0
        expected = p0 * math.exp(r0 * t) * math.exp(-(sigma * t) ** 2 / (2.0 * gamma))
        assert expected_discounted_price(p0, r0, sigma, gamma, t) == pytest.approx(
            expected, rel=1e-12
        )


class TestAnnualGrowthRate:
    def test_reference_setup_growth(self):
        r0 = annual_growth_rate(PsychoParams(1.2, 0.96), 10, 500, 360)
        assert r0 == pytest.approx(0.50940, rel=1e-4)
        assert 1.60 <= math.exp(r0) <= 1.73

    def test_balanced_feedback_is_flat(self):
        assert annual_growth_rate(PsychoParams(1.25, 0.8), 10, 500) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_daily_scaling_identity(self):
        params = PsychoParams(1.2, 0.96)
        m, n, dpy = 10, 500, 360
        daily = m / (2 * n) * math.log(params.alpha * params.beta)
        assert annual_growth_rate(params, m, n, dpy) / dpy == pytest.approx(daily, rel=1e-12)


class TestBubblePeak:
    def test_numeric_argmax_matches_golden_section(self):
        r0, sigma, gamma = 0.5, 0.06, 0.36
        peak = bubble_peak_time(r0, sigma, gamma)
        oracle = golden_section_argmax(
            lambda t: expected_discounted_price(1.0, r0, sigma, gamma, t), 0.0, 200.0
        )
        assert peak.peak_time == pytest.approx(oracle, rel=1e-8)
        assert peak.peak_time == pytest.approx(50.0, rel=1e-6)
        assert peak.stationary_time == pytest.approx(50.0, rel=1e-12)
        assert peak.breakeven_time == pytest.approx(100.0, rel=1e-12)

    def test_vanishing_growth_peaks_early(self):
        peak = bubble_peak_time(1e-6, 0.06, 0.36)
        assert peak.peak_time < 1e-3

    def test_peak_dominates_grid(self):
        r0, sigma, gamma = 0.3, 0.08, 0.5
        peak = bubble_peak_time(r0, sigma, gamma)
        t = np.linspace(1e-6, 10 * peak.peak_time, 2000)
        values = expected_discounted_price(1.0, r0, sigma, gamma, t)
        assert peak.peak_price >= values.max() - 1e-12
