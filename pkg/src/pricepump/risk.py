"""Crash-risk analytics: exposure, hazard and survival, discounted prices.

A crash is never simulated; everything here is an overlay computed from
trajectories. Exposure proportions feed an odds-style hazard rate, the
hazard integrates into a survival probability, and the price discounted by
survival is the expected price under the convention that a crash wipes it
out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy import optimize

from .errors import DegenerateRegressor, LengthMismatch, SaturatedHazard
from .market import MarketState, PsychoParams
from .stats import RegressionFit, cumulative_volatility, linear_regression

if TYPE_CHECKING:
    from .ensemble import TrajectoryRecord

# Proportions within this distance of 1 are treated as certain crashes.
SATURATION_TOL = 1e-12


@dataclass(frozen=True)
class ExposureProportions:
    """Fractions of agents flagged by the two exposure metrics.

    ``q``: cash-to-stock ratio below the q threshold (stretched portfolios).
    ``r``: cash below the r-threshold fraction of the agent's initial cash
    (drawn-down reserves); zero at day 0 by construction.
    """

    q: float
    r: float


@dataclass(frozen=True)
class HazardCurve:
    """Per-day hazard values and the survival curve they integrate into."""

    hazard: np.ndarray
    survival: np.ndarray


@dataclass(frozen=True)
class GammaEstimate:
    """Volatility-hazard slope pooled over paths: arithmetic mean of per-path fits."""

    gamma: float
    fits: list[RegressionFit]

    @property
    def mean_r_squared(self) -> float:
        return float(np.mean([f.r_squared for f in self.fits]))


@dataclass(frozen=True)
class BubblePeak:
    """Peak analytics of the expected discounted price.

    ``peak_time`` is the numeric argmax; it coincides with
    ``stationary_time`` = r0 * gamma / sigma^2, where the growth exponent's
    derivative vanishes. ``breakeven_time`` = 2 * r0 * gamma / sigma^2 is
    where the discounted price falls back to its starting value; it is twice
    the peak time and is reported alongside because the two are easy to
    conflate.
    """

    peak_time: float
    peak_price: float
    stationary_time: float
    breakeven_time: float


def exposure_proportions(
    state: MarketState, q_threshold: float = 0.1, r_threshold: float = 0.6
) -> ExposureProportions:
    """Count the stretched and drawn-down agents in one market snapshot."""
    q = float(np.mean(state.cash < q_threshold * state.stock_value))
    r = float(np.mean(state.cash < r_threshold * state.initial_cash))
    return ExposureProportions(q=q, r=r)


def hazard_rate(p: float) -> float:
    """Odds form of an exposure proportion: p / (1 - p), a per-year rate."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"proportion must lie in [0, 1], got {p}")
    if p >= 1.0 - SATURATION_TOL:
        raise SaturatedHazard(f"proportion {p} is saturated: crash is certain")
    return p / (1.0 - p)


def hazard_curve(proportions: np.ndarray) -> np.ndarray:
    """Elementwise hazard of a proportion series.

    Unlike the scalar form, saturated entries map to +inf rather than
    raising, so downstream survival curves collapse to zero exactly where
    the crash becomes certain. This keeps whole-trajectory pipelines total.
    """
    p = np.asarray(proportions, dtype=float)
    if np.any((p < 0.0) | (p > 1.0)):
        raise ValueError("proportions must lie in [0, 1]")
    saturated = p >= 1.0 - SATURATION_TOL
    out = np.empty(p.shape)
    out[saturated] = np.inf
    out[~saturated] = p[~saturated] / (1.0 - p[~saturated])
    return out


def survival_curve(hazard: np.ndarray, dt: float = 1.0 / 360.0) -> np.ndarray:
    """No-crash probability: exp of minus the trapezoidal hazard integral.

    ``hazard[i]`` is read as the rate at time i * dt, so the first entry has
    survival exactly 1. Infinite hazards zero the curve from that point on.
    """
    h = np.asarray(hazard, dtype=float)
    if np.any(h < 0.0) or np.any(np.isnan(h)):
        raise ValueError("hazard values must be nonnegative")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    out = np.empty(h.shape)
    if h.size == 0:
        return out
    steps = dt * 0.5 * (h[1:] + h[:-1])
    out[0] = 1.0
    np.exp(-np.cumsum(steps), out=out[1:])
    return out


def hazard_survival(proportions: np.ndarray, dt: float = 1.0 / 360.0) -> HazardCurve:
    """Hazard and survival series for one exposure-proportion trajectory."""
    h = hazard_curve(proportions)
    return HazardCurve(hazard=h, survival=survival_curve(h, dt))


def discounted_price_series(prices: np.ndarray, survival: np.ndarray) -> np.ndarray:
    """Price times survival probability, elementwise."""
    prices = np.asarray(prices, dtype=float)
    survival = np.asarray(survival, dtype=float)
    if prices.shape != survival.shape:
        raise LengthMismatch(
            f"prices and survival lengths differ: {prices.shape} vs {survival.shape}"
        )
    return prices * survival


def estimate_gamma(cumulative_vol: np.ndarray, hazard: np.ndarray) -> RegressionFit:
    """Slope of cumulative volatility on the drawdown hazard for one path."""
    v = np.asarray(cumulative_vol, dtype=float)
    h = np.asarray(hazard, dtype=float)
    if v.shape != h.shape:
        raise LengthMismatch(f"series lengths differ: {v.shape} vs {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("hazard series must be finite for the slope fit")
    return linear_regression(h, v)


def gamma_from_records(
    records: list["TrajectoryRecord"], days_per_year: int
) -> GammaEstimate:
    """Per-path volatility-hazard fits, pooled by arithmetic mean of the slopes."""
    fits = []
    for rec in records:
        if not rec.completed or rec.n_days < 2:
            continue
        v = cumulative_volatility(rec.log_gross_return, days_per_year)
        h = hazard_curve(rec.r_proportion)
        try:
            fits.append(estimate_gamma(v, h))
        except DegenerateRegressor:
            continue
    if not fits:
        raise DegenerateRegressor("no usable paths for the volatility-hazard fit")
    return GammaEstimate(gamma=float(np.mean([f.slope for f in fits])), fits=fits)


def crash_time_density(sigma: float, gamma: float, t):
    """Crash-time density (sigma^2 t / gamma) exp(-sigma^2 t^2 / (2 gamma)).

    A Weibull density with shape 2 and scale sqrt(2 gamma) / sigma; its mode
    sits at sqrt(gamma) / sigma.
    """
    if sigma <= 0 or gamma <= 0:
        raise ValueError("sigma and gamma must be positive")
    t = np.asarray(t, dtype=float)
    rate = sigma * sigma / gamma
    out = rate * t * np.exp(-0.5 * rate * t * t)
    return float(out) if out.ndim == 0 else out


def expected_discounted_price(p0: float, r0: float, sigma: float, gamma: float, t):
    """Expected price after crash discounting: p0 exp(r0 t - sigma^2 t^2 / (2 gamma))."""
    if p0 <= 0 or sigma <= 0 or gamma <= 0:
        raise ValueError("p0, sigma and gamma must be positive")
    t = np.asarray(t, dtype=float)
    out = p0 * np.exp(r0 * t - sigma * sigma * t * t / (2.0 * gamma))
    return float(out) if out.ndim == 0 else out


def annual_growth_rate(
    params: PsychoParams, m: int | float, n_agents: int, days_per_year: int = 360
) -> float:
    """Per-year log growth rate: (days_per_year * m / (2 N)) ln(alpha beta).

    ``m`` may be fractional to express a mean active-set size under the
    variable-size selection mode.
    """
    if m <= 0 or n_agents < 1 or days_per_year < 1:
        raise ValueError("counts must be positive")
    return days_per_year * m / (2.0 * n_agents) * math.log(params.alpha * params.beta)


def bubble_peak_time(r0: float, sigma: float, gamma: float) -> BubblePeak:
    """Locate the maximum of the expected discounted price numerically.

    The search brackets the peak by doubling the horizon until the price
    turns down, then minimizes the negative log price (same argmax, no
    overflow) to high precision.
    """
    if r0 <= 0 or sigma <= 0 or gamma <= 0:
        raise ValueError("r0, sigma and gamma must be positive")
    curvature = sigma * sigma / gamma

    def neg_log(t: float) -> float:
        return -(r0 * t - 0.5 * curvature * t * t)

    t_hi = 1.0
    while neg_log(t_hi) <= neg_log(t_hi / 2.0) and t_hi < 2**40:
        t_hi *= 2.0
    result = optimize.minimize_scalar(
        neg_log, bounds=(0.0, t_hi), method="bounded",
        options={"xatol": 1e-12 * t_hi},
    )
    peak_time = float(result.x)
    stationary = r0 * gamma / (sigma * sigma)
    return BubblePeak(
        peak_time=peak_time,
        peak_price=float(expected_discounted_price(1.0, r0, sigma, gamma, peak_time)),
        stationary_time=stationary,
        breakeven_time=2.0 * stationary,
    )
