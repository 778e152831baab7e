"""Return and volatility estimation plus the regression utilities built on them.

Pure functions over immutable arrays; everything here is safe to call from
any thread.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np

from .errors import DegenerateRegressor, EmptySeries, InsufficientData

if TYPE_CHECKING:
    from .ensemble import TrajectoryRecord

MIN_OBSERVATIONS = 30


@dataclass(frozen=True)
class ReturnStats:
    mean_log_return: float
    sigma: float
    n_obs: int


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float


def log_returns(prices: np.ndarray) -> np.ndarray:
    """Natural log of consecutive gross returns P(n)/P(n-1); length shrinks by one."""
    prices = np.asarray(prices, dtype=float)
    if prices.size < 2:
        raise EmptySeries(f"need at least 2 prices, got {prices.size}")
    if np.any(prices <= 0):
        raise EmptySeries("prices must be positive")
    return np.diff(np.log(prices))


def estimate_return_stats(traj: "TrajectoryRecord", burn_in_days: int) -> ReturnStats:
    """Sample mean and standard deviation of post-burn-in daily log returns."""
    series = np.asarray(traj.log_gross_return, dtype=float)
    if burn_in_days >= series.size:
        raise InsufficientData(
            f"burn-in of {burn_in_days} days consumes the whole {series.size}-day series"
        )
    post = series[burn_in_days:]
    if post.size < MIN_OBSERVATIONS:
        raise InsufficientData(
            f"only {post.size} post-burn-in observations, need {MIN_OBSERVATIONS}"
        )
    return ReturnStats(
        mean_log_return=float(post.mean()),
        sigma=float(post.std(ddof=1)),
        n_obs=int(post.size),
    )


def linear_regression(x: np.ndarray, y: np.ndarray) -> RegressionFit:
    """Ordinary least squares of y on x with intercept.

    A constant y is a legal degenerate case (slope 0, r^2 defined as 0); a
    constant x is not.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise EmptySeries(f"x and y lengths differ: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise EmptySeries(f"need at least 2 points, got {x.size}")
    xm = x.mean()
    ym = y.mean()
    dx = x - xm
    dy = y - ym
    var_x = float(dx @ dx)
    if var_x == 0.0:
        raise DegenerateRegressor("x is constant; slope is undefined")
    cov = float(dx @ dy)
    slope = cov / var_x
    var_y = float(dy @ dy)
    r_squared = (cov * cov) / (var_x * var_y) if var_y > 0.0 else 0.0
    return RegressionFit(slope=slope, intercept=ym - slope * xm, r_squared=r_squared)


def fit_volatility_law(grid: Mapping[tuple[float, float], float]) -> RegressionFit:
    """Fit sigma = c * (alpha - beta) + d over a grid of measured volatilities."""
    if len(grid) < 3:
        raise DegenerateRegressor(f"need at least 3 grid cells, got {len(grid)}")
    spreads = np.array([alpha - beta for alpha, beta in grid])
    sigmas = np.array(list(grid.values()), dtype=float)
    if np.unique(spreads).size < 3:
        raise DegenerateRegressor("need at least 3 distinct alpha - beta values")
    return linear_regression(spreads, sigmas)


def cumulative_volatility(log_returns: np.ndarray, days_per_year: int) -> np.ndarray:
    """Running sum of squared consecutive log-return differences, scaled by 2/year.

    Output aligns with the input: entry n accumulates every difference formed
    through day n, so entry 0 (no pair yet) is zero and the series is
    nondecreasing. The divisor is twice the trading-day count, which makes a
    year of independent returns contribute their per-day variance.
    """
    lr = np.asarray(log_returns, dtype=float)
    if lr.size < 2:
        raise EmptySeries(f"need at least 2 log returns, got {lr.size}")
    increments = np.diff(lr) ** 2 / (2.0 * days_per_year)
    out = np.empty(lr.size)
    out[0] = 0.0
    np.cumsum(increments, out=out[1:])
    return out


def return_volatility_correlation(summaries: Iterable[ReturnStats]) -> float:
    """Pearson correlation between mean log-return and sigma across a parameter grid."""
    pairs = [(s.mean_log_return, s.sigma) for s in summaries]
    if len(pairs) < 3:
        raise EmptySeries(f"need at least 3 grid points, got {len(pairs)}")
    means = np.array([p[0] for p in pairs])
    sigmas = np.array([p[1] for p in pairs])
    dm = means - means.mean()
    ds = sigmas - sigmas.mean()
    denom = float(np.sqrt((dm @ dm) * (ds @ ds)))
    if denom == 0.0:
        raise DegenerateRegressor("correlation undefined: a variable is constant")
    return float((dm @ ds) / denom)
