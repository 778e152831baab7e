"""Command-line surface: seeded runs that regenerate every table as plain CSV.

Every command writes a ``manifest.json`` with the effective config, the
master seed, and a sha256 checksum per output file; re-running with the
manifest's config reproduces the checksummed outputs byte for byte. Figures
are out of scope: commands emit plot-ready columns, not images.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .config import ModelConfig, load_config, selection_from_flags
from .ensemble import derive_seed, run_ensemble, run_trajectory, summarize
from .errors import ConfigError, DegenerateRegressor, PricePumpError
from .market import Fixed, UniformRandom
from .risk import (
    annual_growth_rate,
    bubble_peak_time,
    discounted_price_series,
    gamma_from_records,
    hazard_curve,
    survival_curve,
)
from .stats import cumulative_volatility, fit_volatility_law

__version__ = "0.1.0"

OUTPUT_DIR_ENV = "PRICEPUMP_OUT"

# Default evaluation grid for the volatility table: optimism by pessimism.
TABLE_ALPHAS = (1.1, 1.2, 1.3, 1.4, 1.5)
TABLE_BETAS = (0.8, 0.825, 0.85, 0.875, 0.9, 0.925, 0.95, 0.975)


@dataclass(frozen=True)
class TableSpec:
    """Grid declaration for the volatility table command."""

    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    m_values: tuple[int, ...]
    n_paths: int

    def validate(self) -> None:
        if not self.alphas or not self.betas or not self.m_values:
            raise ConfigError("table grid must have at least one alpha, beta, and m")
        spreads = {round(a - b, 12) for a in self.alphas for b in self.betas}
        if len(spreads) < 3:
            raise DegenerateRegressor(
                f"grid spans only {len(spreads)} distinct alpha-beta spreads; "
                "the volatility fit needs at least 3"
            )
        if self.n_paths < 1:
            raise ConfigError(f"n_paths must be >= 1, got {self.n_paths}")


@dataclass
class RunManifest:
    command: str
    version: str
    config: dict[str, Any]
    started_at: str
    finished_at: str = ""
    outputs: list[dict[str, str]] = field(default_factory=list)

    def add(self, path: Path) -> None:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.outputs.append({"path": path.name, "sha256": digest})

    def write(self, out_dir: Path) -> Path:
        self.finished_at = _now()
        target = out_dir / "manifest.json"
        target.write_text(json.dumps(self.__dict__, indent=2) + "\n")
        return target


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _fmt(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    """Comma-separated text: one header row, newline-terminated, repr floats."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict[str, Any]) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def parse_config(args: argparse.Namespace) -> ModelConfig:
    """Merge flag > config file > default, validating the result."""
    base = load_config(args.config).to_dict() if args.config else {}
    overrides: dict[str, Any] = {}
    for flag, key in (
        ("seed", "master_seed"),
        ("paths", "n_paths"),
        ("alpha", "alpha"),
        ("beta", "beta"),
        ("agents", "n_agents"),
        ("years", "horizon_years"),
        ("burn_in_years", "burn_in_years"),
        ("q_threshold", "q_threshold"),
        ("r_threshold", "r_threshold"),
    ):
        value = getattr(args, flag)
        if value is not None:
            overrides[key] = value
    selection = selection_from_flags(args.active, args.active_range)
    if selection is not None:
        if isinstance(selection, Fixed):
            overrides["selection"] = {"mode": "fixed", "m": selection.m}
        else:
            overrides["selection"] = {
                "mode": "uniform", "m_min": selection.m_min, "m_max": selection.m_max,
            }
    return ModelConfig.from_dict({**base, **overrides})


def resolve_out_dir(args: argparse.Namespace) -> Path:
    out = args.out or os.environ.get(OUTPUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_simulate(config: ModelConfig, out_dir: Path) -> list[Path]:
    """One path, one CSV: the per-day trajectory table."""
    record = run_trajectory(config, path_index=0)
    target = out_dir / "trajectory.csv"
    rows = (
        (
            day + 1,
            record.price[day],
            record.log_gross_return[day],
            record.volume_cash_fraction[day],
            record.volume_shares[day],
            record.q_proportion[day],
            record.r_proportion[day],
        )
        for day in range(record.n_days)
    )
    write_csv(
        target,
        ("day", "price", "log_return", "volume_cash_fraction", "volume_shares", "q", "r"),
        rows,
    )
    return [target]


def cmd_ensemble(config: ModelConfig, out_dir: Path, workers: int) -> list[Path]:
    """Per-path statistics table plus the pooled summary."""
    records, summary = run_ensemble(config, workers=workers)
    paths_csv = out_dir / "paths.csv"
    rows = (
        (
            i,
            rec.seed,
            rec.n_days,
            -1 if rec.degenerate_day is None else rec.degenerate_day,
            summary.per_path_mean[i],
            summary.per_path_sigma[i],
            summary.per_path_gamma[i],
            summary.per_path_gamma_r2[i],
        )
        for i, rec in enumerate(records)
    )
    write_csv(
        paths_csv,
        ("path", "seed", "n_days", "degenerate_day", "mean_log_return", "sigma",
         "gamma", "gamma_r_squared"),
        rows,
    )
    summary_json = out_dir / "ensemble_summary.json"
    _write_json(summary_json, {
        "config": config.to_dict(),
        "n_paths": summary.n_paths,
        "n_degenerate": summary.n_degenerate,
        "mean_log_return": summary.mean_log_return,
        "sigma": summary.sigma,
        "gamma": summary.gamma,
    })
    return [paths_csv, summary_json]


def cmd_table_sigma(
    config: ModelConfig, spec: TableSpec, out_dir: Path, workers: int
) -> list[Path]:
    """Volatility grid over (alpha, beta) per m, plus the linear-law fit per m."""
    spec.validate()
    grid_rows = []
    fit_rows = []
    cell_index = 0
    for m in spec.m_values:
        grid: dict[tuple[float, float], float] = {}
        for alpha in spec.alphas:
            for beta in spec.betas:
                # Give each cell its own seed family, disjoint from path
                # indices by living above 2^32 in the derivation index.
                cell_seed = derive_seed(config.master_seed, 2**32 + cell_index)
                cell_index += 1
                cell = ModelConfig.from_dict({
                    **config.to_dict(),
                    "alpha": alpha,
                    "beta": beta,
                    "selection": {"mode": "fixed", "m": m},
                    "n_paths": spec.n_paths,
                    "master_seed": cell_seed,
                })
                _, summary = run_ensemble(cell, workers=workers)
                if not np.isfinite(summary.sigma):
                    raise ConfigError(
                        f"cell (alpha={alpha}, beta={beta}, m={m}) produced no usable "
                        "volatility estimate; horizon must exceed the burn-in"
                    )
                grid[(alpha, beta)] = summary.sigma
                grid_rows.append(
                    (m, alpha, beta, summary.sigma, spec.n_paths, summary.n_degenerate)
                )
        fit = fit_volatility_law(grid)
        fit_rows.append((m, fit.slope, fit.intercept, fit.r_squared))

    grid_csv = out_dir / "sigma_grid.csv"
    write_csv(grid_csv, ("m", "alpha", "beta", "sigma", "n_paths", "n_degenerate"), grid_rows)
    fit_csv = out_dir / "volatility_fit.csv"
    write_csv(fit_csv, ("m", "c", "d", "r_squared"), fit_rows)
    return [grid_csv, fit_csv]


def cmd_risk_report(config: ModelConfig, out_dir: Path, workers: int) -> list[Path]:
    """Per-day ensemble means of the risk pipeline plus pooled analytics.

    Day 0 is the known pre-trading state (price 1, both exposures 0). Mean
    hazards print as ``inf`` once any path's exposure saturates; the matching
    survival and discounted-price columns are exactly zero there.
    """
    if config.n_days < 1:
        raise ConfigError(f"horizon of {config.horizon_years} years has no trading days")
    records, summary = run_ensemble(config, workers=workers)
    completed = [rec for rec in records if rec.completed]
    if not completed:
        raise DegenerateRegressor("every path hit a degenerate market; nothing to report")

    n_days = config.n_days
    dt = 1.0 / config.days_per_year
    keys = ("q", "r", "h_q", "h_r", "s_q", "s_r", "p", "p_sq", "p_sr", "v")
    sums = {key: np.zeros(n_days + 1) for key in keys}
    for rec in completed:
        prices = np.concatenate(([1.0], rec.price))
        q = np.concatenate(([0.0], rec.q_proportion))
        r = np.concatenate(([0.0], rec.r_proportion))
        h_q = hazard_curve(q)
        h_r = hazard_curve(r)
        s_q = survival_curve(h_q, dt)
        s_r = survival_curve(h_r, dt)
        v = np.concatenate(([0.0], cumulative_volatility(rec.log_gross_return, config.days_per_year)))
        sums["q"] += q
        sums["r"] += r
        sums["h_q"] += h_q
        sums["h_r"] += h_r
        sums["s_q"] += s_q
        sums["s_r"] += s_r
        sums["p"] += prices
        sums["p_sq"] += discounted_price_series(prices, s_q)
        sums["p_sr"] += discounted_price_series(prices, s_r)
        sums["v"] += v
    means = {key: total / len(completed) for key, total in sums.items()}

    report_csv = out_dir / "risk_report.csv"
    rows = (
        (day, day * dt) + tuple(means[key][day] for key in keys)
        for day in range(n_days + 1)
    )
    write_csv(
        report_csv,
        ("day", "t_years", "q_mean", "r_mean", "h_q_mean", "h_r_mean", "s_q_mean",
         "s_r_mean", "price_mean", "price_sq_mean", "price_sr_mean", "v_mean"),
        rows,
    )

    gamma = gamma_from_records(completed, config.days_per_year)
    if isinstance(config.selection, Fixed):
        m_effective: float = config.selection.m
    else:
        m_effective = (config.selection.m_min + config.selection.m_max) / 2.0
    r0 = annual_growth_rate(config.psycho, m_effective, config.n_agents, config.days_per_year)
    peak: dict[str, float] | None = None
    if r0 > 0 and summary.sigma > 0:
        bp = bubble_peak_time(r0, summary.sigma, gamma.gamma)
        peak = {
            "peak_time_years": bp.peak_time,
            "peak_price_factor": bp.peak_price,
            "stationary_time_years": bp.stationary_time,
            "breakeven_time_years": bp.breakeven_time,
        }
    summary_json = out_dir / "risk_summary.json"
    _write_json(summary_json, {
        "config": config.to_dict(),
        "n_paths": summary.n_paths,
        "n_degenerate": summary.n_degenerate,
        "sigma": summary.sigma,
        "gamma": gamma.gamma,
        "gamma_mean_r_squared": gamma.mean_r_squared,
        "annual_log_growth_rate": r0,
        "bubble_peak": peak,
    })
    return [report_csv, summary_json]


def cmd_fit_gamma(config: ModelConfig, out_dir: Path, workers: int) -> list[Path]:
    """Per-path volatility-on-hazard fits and their pooled average."""
    records, _ = run_ensemble(config, workers=workers)
    completed = [rec for rec in records if rec.completed]
    if not completed:
        raise DegenerateRegressor("every path hit a degenerate market; nothing to fit")
    gamma = gamma_from_records(completed, config.days_per_year)

    fits_csv = out_dir / "gamma_fits.csv"
    rows = (
        (i, rec.seed, fit.slope, fit.intercept, fit.r_squared)
        for i, (rec, fit) in enumerate(zip(completed, gamma.fits))
    )
    write_csv(fits_csv, ("path", "seed", "slope", "intercept", "r_squared"), rows)
    summary_json = out_dir / "gamma_summary.json"
    _write_json(summary_json, {
        "config": config.to_dict(),
        "n_paths": len(records),
        "n_used": len(gamma.fits),
        "gamma": gamma.gamma,
        "mean_r_squared": gamma.mean_r_squared,
    })
    return [fits_csv, summary_json]


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    parser.add_argument("--seed", type=int, metavar="U64", help="master seed")
    parser.add_argument("--paths", type=int, metavar="N", help="number of paths")
    parser.add_argument("--alpha", type=float, metavar="F", help="optimism factor (> 1)")
    parser.add_argument("--beta", type=float, metavar="F", help="pessimism factor (0, 1]")
    parser.add_argument("--agents", type=int, metavar="N", help="number of traders")
    parser.add_argument("--active", type=int, metavar="M", help="fixed active-set size")
    parser.add_argument("--active-range", metavar="MIN,MAX",
                        help="uniform random active-set size range")
    parser.add_argument("--years", type=float, metavar="F", help="horizon in years")
    parser.add_argument("--burn-in-years", type=float, metavar="F",
                        help="years excluded from statistics (default 2)")
    parser.add_argument("--q-threshold", type=float, metavar="F",
                        help="cash-to-stock exposure threshold (default 0.1)")
    parser.add_argument("--r-threshold", type=float, metavar="F",
                        help="cash-drawdown exposure threshold (default 0.6)")
    parser.add_argument("--out", metavar="DIR",
                        help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")
    parser.add_argument("--workers", type=int, metavar="N", default=1,
                        help="worker processes (default 1)")


def _csv_floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(","))


def _csv_ints(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pricepump",
        description="Adaptive-trader market simulator with risk analytics",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("simulate", "write one path's per-day trajectory table"),
        ("ensemble", "run many paths and write per-path and pooled statistics"),
        ("table-sigma", "volatility grid over (alpha, beta) and its linear fit"),
        ("risk-report", "per-day ensemble risk metrics and peak analytics"),
        ("fit-gamma", "per-path volatility-on-hazard regression slopes"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        _add_common_flags(cmd)
        if name == "table-sigma":
            cmd.add_argument("--alphas", type=_csv_floats, metavar="A1,A2,...",
                             default=TABLE_ALPHAS, help="grid optimism values")
            cmd.add_argument("--betas", type=_csv_floats, metavar="B1,B2,...",
                             default=TABLE_BETAS, help="grid pessimism values")
            cmd.add_argument("--m-values", type=_csv_ints, metavar="M1,M2,...",
                             default=(10,), help="active-set sizes to tabulate")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        # Grid cells sweep (alpha, beta) themselves, and a 20-year default
        # horizon would make an 80-cell table crawl; 3 years (2 burn-in + 1
        # measured) matches the table's stationary-window convention.
        if args.command == "table-sigma" and args.years is None and args.config is None:
            args.years = 3.0
        config = parse_config(args)
        out_dir = resolve_out_dir(args)
        manifest = RunManifest(
            command=args.command,
            version=__version__,
            config=config.to_dict(),
            started_at=_now(),
        )
        if args.command == "simulate":
            outputs = cmd_simulate(config, out_dir)
        elif args.command == "ensemble":
            outputs = cmd_ensemble(config, out_dir, args.workers)
        elif args.command == "table-sigma":
            spec = TableSpec(
                alphas=tuple(args.alphas),
                betas=tuple(args.betas),
                m_values=tuple(args.m_values),
                n_paths=config.n_paths,
            )
            outputs = cmd_table_sigma(config, spec, out_dir, args.workers)
        elif args.command == "risk-report":
            outputs = cmd_risk_report(config, out_dir, args.workers)
        else:
            outputs = cmd_fit_gamma(config, out_dir, args.workers)
        for path in outputs:
            manifest.add(path)
        manifest.write(out_dir)
    except PricePumpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
