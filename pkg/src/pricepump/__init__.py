"""Multi-agent market simulator for self-sustained price growth.

Randomly drawn subsets of adaptive traders clear a price among themselves
each period and multiplicatively adjust their target stock-to-cash ratios in
response. The package simulates seeded ensembles of such markets and
estimates the resulting return and volatility laws, exposure-based crash
hazards, and the volatility-hazard link.
"""

from .cli import TableSpec, main
from .config import ModelConfig, load_config, save_config
from .ensemble import (
    EnsembleSummary,
    TrajectoryRecord,
    derive_seed,
    path_rng,
    run_ensemble,
    run_trajectory,
    summarize,
)
from .errors import (
    ConfigError,
    DegenerateMarket,
    DegenerateRegressor,
    EmptySeries,
    InsufficientData,
    LengthMismatch,
    PricePumpError,
    SaturatedHazard,
)
from .market import (
    AgentPortfolio,
    Fixed,
    MarketState,
    PsychoParams,
    RoundReport,
    SelectionMode,
    TradeSignal,
    UniformRandom,
    apply_trades,
    classify_performance,
    clearing_price,
    desired_cash_flow,
    initial_state,
    select_active,
    trading_round,
    update_target_ratio,
)
from .risk import (
    BubblePeak,
    ExposureProportions,
    GammaEstimate,
    HazardCurve,
    annual_growth_rate,
    bubble_peak_time,
    crash_time_density,
    discounted_price_series,
    estimate_gamma,
    expected_discounted_price,
    exposure_proportions,
    gamma_from_records,
    hazard_curve,
    hazard_rate,
    hazard_survival,
    survival_curve,
)
from .stats import (
    RegressionFit,
    ReturnStats,
    cumulative_volatility,
    estimate_return_stats,
    fit_volatility_law,
    linear_regression,
    log_returns,
    return_volatility_correlation,
)

__version__ = "0.1.0"

__all__ = [
    "AgentPortfolio",
    "BubblePeak",
    "ConfigError",
    "DegenerateMarket",
    "DegenerateRegressor",
    "EmptySeries",
    "EnsembleSummary",
    "ExposureProportions",
    "Fixed",
    "GammaEstimate",
    "HazardCurve",
    "InsufficientData",
    "LengthMismatch",
    "MarketState",
    "ModelConfig",
    "PricePumpError",
    "PsychoParams",
    "RegressionFit",
    "ReturnStats",
    "RoundReport",
    "SaturatedHazard",
    "SelectionMode",
    "TableSpec",
    "TradeSignal",
    "TrajectoryRecord",
    "UniformRandom",
    "annual_growth_rate",
    "apply_trades",
    "bubble_peak_time",
    "classify_performance",
    "clearing_price",
    "crash_time_density",
    "cumulative_volatility",
    "derive_seed",
    "desired_cash_flow",
    "discounted_price_series",
    "estimate_gamma",
    "estimate_return_stats",
    "expected_discounted_price",
    "exposure_proportions",
    "fit_volatility_law",
    "gamma_from_records",
    "hazard_curve",
    "hazard_rate",
    "hazard_survival",
    "initial_state",
    "linear_regression",
    "load_config",
    "log_returns",
    "main",
    "path_rng",
    "return_volatility_correlation",
    "run_ensemble",
    "run_trajectory",
    "save_config",
    "select_active",
    "summarize",
    "survival_curve",
    "trading_round",
    "update_target_ratio",
]
