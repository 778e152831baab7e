"""Seeded Monte Carlo execution of many independent market trajectories.

Each path gets its own 64-bit seed derived from the master seed by a fixed
mixing function, so results are reproducible bit for bit regardless of how
paths are scheduled across workers. Aggregation happens in path order in the
parent process, which keeps summaries identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import risk, stats
from ._kernel import simulate_path
from .config import ModelConfig
from .errors import DegenerateRegressor, InsufficientData
from .market import FLAT_REL_TOL, Fixed, initial_state

_MASK64 = (1 << 64) - 1
# SplitMix64 constants (Steele, Lea & Flood's mixing function): the golden
# gamma stream increment and two xor-shift-multiply rounds. The increment is
# odd, so index -> seed is injective over the full 64-bit range.
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB


def derive_seed(master_seed: int, path_index: int) -> int:
    """Stable per-path seed: SplitMix64 of the master seed at the given index.

    The mapping is injective in ``path_index`` for a fixed master seed and
    involves no platform-dependent state, so ensembles can be partitioned
    arbitrarily without stream collisions.
    """
    z = (master_seed + _GOLDEN_GAMMA * (path_index + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX_1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_2) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def path_rng(config: ModelConfig, path_index: int) -> np.random.Generator:
    """The bit generator for one path: PCG64 seeded with the derived seed."""
    return np.random.Generator(np.random.PCG64(derive_seed(config.master_seed, path_index)))


@dataclass
class TrajectoryRecord:
    """Per-day outputs of one simulated path.

    All arrays share one length (the number of completed days). A path that
    hit a degenerate market carries the failing day index in
    ``degenerate_day`` and its arrays stop just before it; such paths are
    excluded from ensemble estimates but still counted.
    """

    seed: int
    price: np.ndarray
    log_gross_return: np.ndarray
    volume_cash_fraction: np.ndarray
    volume_shares: np.ndarray
    q_proportion: np.ndarray
    r_proportion: np.ndarray
    degenerate_day: int | None = None

    @property
    def n_days(self) -> int:
        return self.price.shape[0]

    @property
    def completed(self) -> bool:
        return self.degenerate_day is None


@dataclass
class EnsembleSummary:
    """Cross-path estimates in canonical path order.

    ``per_path_*`` arrays have one entry per path; excluded paths (degenerate
    markets, or too few post-burn-in observations) hold NaN. Pooled values
    average the finite per-path entries: sigma is the mean per-path standard
    deviation and gamma the mean per-path volatility-on-hazard slope.
    """

    config: ModelConfig
    n_paths: int
    n_degenerate: int
    per_path_mean: np.ndarray
    per_path_sigma: np.ndarray
    per_path_gamma: np.ndarray
    per_path_gamma_r2: np.ndarray
    mean_log_return: float
    sigma: float
    gamma: float


def run_trajectory(config: ModelConfig, path_index: int) -> TrajectoryRecord:
    """Simulate one path for the configured horizon.

    The path's generator first draws the initial target-ratio perturbations,
    then one subset per trading period; both belong to the reproducibility
    contract. Exposure proportions are evaluated on the end-of-day state.
    """
    config.validate()
    rng = path_rng(config, path_index)
    state = initial_state(config.n_agents, rng, config.init_epsilon)
    if isinstance(config.selection, Fixed):
        m_min = m_max = config.selection.m
    else:
        m_min, m_max = config.selection.m_min, config.selection.m_max

    (price, log_return, vol_cash, vol_shares, q, r, failed_day) = simulate_path(
        rng,
        state.stock_value,
        state.cash,
        state.target_ratio,
        state.initial_cash,
        config.n_days,
        config.trades_per_day,
        m_min,
        m_max,
        config.psycho.alpha,
        config.psycho.beta,
        FLAT_REL_TOL,
        config.q_threshold,
        config.r_threshold,
        state.price,
    )
    record = TrajectoryRecord(
        seed=derive_seed(config.master_seed, path_index),
        price=price,
        log_gross_return=log_return,
        volume_cash_fraction=vol_cash,
        volume_shares=vol_shares,
        q_proportion=q,
        r_proportion=r,
    )
    if failed_day >= 0:
        record.degenerate_day = int(failed_day)
        for name in ("price", "log_gross_return", "volume_cash_fraction",
                     "volume_shares", "q_proportion", "r_proportion"):
            setattr(record, name, getattr(record, name)[:failed_day].copy())
    return record


def _run_chunk(config: ModelConfig, start: int, stop: int) -> list[TrajectoryRecord]:
    return [run_trajectory(config, i) for i in range(start, stop)]


def run_ensemble(
    config: ModelConfig, workers: int = 1
) -> tuple[list[TrajectoryRecord], EnsembleSummary]:
    """Simulate ``config.n_paths`` independent trajectories and summarize them.

    Paths are independent by construction (disjoint derived seeds, no shared
    state), so the records and the summary are identical for any ``workers``
    value; the pool only changes wall-clock time.
    """
    config.validate()
    n = config.n_paths
    if workers <= 1 or n == 1:
        records = _run_chunk(config, 0, n)
    else:
        chunk = max(1, -(-n // workers))
        bounds = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, config, s, e) for s, e in bounds]
            records = []
            for fut in futures:  # futures list is already in path order
                records.extend(fut.result())
    return records, summarize(config, records)


def summarize(config: ModelConfig, records: list[TrajectoryRecord]) -> EnsembleSummary:
    """Per-path statistics pooled in path order (order-insensitive by construction)."""
    n = len(records)
    mean = np.full(n, np.nan)
    sigma = np.full(n, np.nan)
    gamma = np.full(n, np.nan)
    gamma_r2 = np.full(n, np.nan)
    n_degenerate = 0
    for i, rec in enumerate(records):
        if not rec.completed:
            n_degenerate += 1
            continue
        try:
            rs = stats.estimate_return_stats(rec, config.burn_in_days)
        except InsufficientData:
            continue
        mean[i] = rs.mean_log_return
        sigma[i] = rs.sigma
        try:
            fit = risk.estimate_gamma(
                stats.cumulative_volatility(rec.log_gross_return, config.days_per_year),
                risk.hazard_curve(rec.r_proportion),
            )
        except DegenerateRegressor:
            continue
        gamma[i] = fit.slope
        gamma_r2[i] = fit.r_squared

    def _pool(values: np.ndarray) -> float:
        finite = values[np.isfinite(values)]
        return float(finite.mean()) if finite.size else float("nan")

    return EnsembleSummary(
        config=config,
        n_paths=n,
        n_degenerate=n_degenerate,
        per_path_mean=mean,
        per_path_sigma=sigma,
        per_path_gamma=gamma,
        per_path_gamma_r2=gamma_r2,
        mean_log_return=_pool(mean),
        sigma=_pool(sigma),
        gamma=_pool(gamma),
    )
