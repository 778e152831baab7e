import hashlib
import json

import numpy as np
import pytest

from pricepump import ConfigError, Fixed, ModelConfig, UniformRandom, load_config, save_config
from pricepump.cli import build_parser, main, parse_config


def run_cli(args):
    return main(args)


def parse(args):
    return parse_config(build_parser().parse_args(args))


class TestParseConfig:
    def test_defaults(self):
        config = parse(["simulate"])
        assert config.n_agents == 500
        assert config.selection == Fixed(10)
        assert config.psycho.alpha == 1.2
        assert config.psycho.beta == 0.96
        assert config.horizon_years == 20.0
        assert config.trades_per_day == 1
        assert config.days_per_year == 360
        assert config.burn_in_years == 2.0

    def test_alpha_must_exceed_one(self):
        with pytest.raises(ConfigError):
            parse(["simulate", "--alpha", "0.9"])

    def test_flag_beats_file_beats_default(self, tmp_path):
        cfg_file = tmp_path / "config.json"
        save_config(ModelConfig(n_agents=100, horizon_years=5.0), cfg_file)
        config = parse(["simulate", "--config", str(cfg_file), "--agents", "50"])
        assert config.n_agents == 50          # flag wins
        assert config.horizon_years == 5.0    # file beats default
        assert config.psycho.alpha == 1.2     # default fills the rest

    def test_round_trip_identity(self, tmp_path):
        config = ModelConfig(
            n_agents=77, selection=UniformRandom(2, 9), horizon_years=1.5,
            master_seed=321, init_epsilon=0.05, n_paths=17,
        )
        path = tmp_path / "config.json"
        save_config(config, path)
        assert load_config(path) == config

    def test_active_flags(self):
        assert parse(["simulate", "--active", "7"]).selection == Fixed(7)
        assert parse(["simulate", "--active-range", "2,9"]).selection == UniformRandom(2, 9)
        with pytest.raises(ConfigError):
            parse(["simulate", "--active", "3", "--active-range", "2,9"])

    def test_missing_config_file(self):
        with pytest.raises(ConfigError):
            parse(["simulate", "--config", "/nonexistent/config.json"])


class TestSimulateCommand:
    def test_writes_expected_table(self, tmp_path):
        out = tmp_path / "run"
        code = run_cli([
            "simulate", "--agents", "20", "--active", "3", "--years", "0.1",
            "--seed", "7", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "trajectory.csv").read_text().splitlines()
        assert lines[0] == "day,price,log_return,volume_cash_fraction,volume_shares,q,r"
        assert len(lines) == 1 + 36  # header + 0.1y * 360d
        first = lines[1].split(",")
        assert first[0] == "1"
        assert all(np.isfinite(float(v)) for v in first[1:])

    def test_byte_identical_reruns(self, tmp_path):
        args = ["simulate", "--agents", "15", "--active", "4", "--years", "0.2",
                "--seed", "11"]
        run_cli(args + ["--out", str(tmp_path / "a")])
        run_cli(args + ["--out", str(tmp_path / "b")])
        a = (tmp_path / "a" / "trajectory.csv").read_bytes()
        b = (tmp_path / "b" / "trajectory.csv").read_bytes()
        assert a == b

    def test_env_var_supplies_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PRICEPUMP_OUT", str(tmp_path / "env_out"))
        run_cli(["simulate", "--agents", "10", "--active", "2", "--years", "0.05"])
        assert (tmp_path / "env_out" / "trajectory.csv").exists()


class TestManifest:
    def test_outputs_checksummed_and_reproducible(self, tmp_path):
        args = ["simulate", "--agents", "12", "--active", "3", "--years", "0.1",
                "--seed", "5"]
        run_cli(args + ["--out", str(tmp_path / "a")])
        run_cli(args + ["--out", str(tmp_path / "b")])
        manifest_a = json.loads((tmp_path / "a" / "manifest.json").read_text())
        manifest_b = json.loads((tmp_path / "b" / "manifest.json").read_text())
        assert manifest_a["command"] == "simulate"
        assert manifest_a["config"]["master_seed"] == 5
        assert manifest_a["outputs"] == manifest_b["outputs"]
        for entry in manifest_a["outputs"]:
            digest = hashlib.sha256((tmp_path / "a" / entry["path"]).read_bytes()).hexdigest()
            assert digest == entry["sha256"]

    def test_rerun_from_manifest_config(self, tmp_path):
        run_cli(["simulate", "--agents", "12", "--active", "3", "--years", "0.1",
                 "--seed", "9", "--out", str(tmp_path / "a")])
        manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
        cfg_file = tmp_path / "replay.json"
        cfg_file.write_text(json.dumps(manifest["config"]))
        run_cli(["simulate", "--config", str(cfg_file), "--out", str(tmp_path / "replay")])
        replay = json.loads((tmp_path / "replay" / "manifest.json").read_text())
        assert replay["outputs"] == manifest["outputs"]


class TestEnsembleCommand:
    def test_paths_table_and_summary(self, tmp_path):
        out = tmp_path / "ens"
        code = run_cli([
            "ensemble", "--agents", "30", "--active", "4", "--years", "3",
            "--paths", "3", "--seed", "2", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "paths.csv").read_text().splitlines()
        assert len(lines) == 4
        summary = json.loads((out / "ensemble_summary.json").read_text())
        assert summary["n_paths"] == 3
        assert np.isfinite(summary["mean_log_return"])


class TestTableSigmaCommand:
    def test_small_grid_with_fit(self, tmp_path):
        out = tmp_path / "table"
        code = run_cli([
            "table-sigma", "--agents", "30", "--paths", "2", "--seed", "3",
            "--alphas", "1.1,1.3", "--betas", "0.8,0.9", "--m-values", "4",
            "--out", str(out),
        ])
        assert code == 0
        grid = (out / "sigma_grid.csv").read_text().splitlines()
        assert grid[0] == "m,alpha,beta,sigma,n_paths,n_degenerate"
        assert len(grid) == 5
        fit = (out / "volatility_fit.csv").read_text().splitlines()
        assert fit[0] == "m,c,d,r_squared"
        assert len(fit) == 2

    def test_single_cell_grid_refused(self, tmp_path, capsys):
        code = run_cli([
            "table-sigma", "--alphas", "1.2", "--betas", "0.9",
            "--out", str(tmp_path / "t"),
        ])
        captured = capsys.readouterr()
        assert code == 2
        assert "at least 3" in captured.err
        assert not (tmp_path / "t" / "sigma_grid.csv").exists()


class TestRiskReportCommand:
    def test_zero_length_horizon_refused(self, tmp_path, capsys):
        code = run_cli([
            "risk-report", "--years", "0.001", "--out", str(tmp_path / "r"),
        ])
        assert code == 2
        assert "horizon" in capsys.readouterr().err

    def test_report_columns_and_day_zero(self, tmp_path):
        out = tmp_path / "risk"
        code = run_cli([
            "risk-report", "--agents", "30", "--active", "4", "--years", "1",
            "--burn-in-years", "0.25", "--paths", "2", "--seed", "4",
            "--out", str(out),
        ])
        assert code == 0
        lines = (out / "risk_report.csv").read_text().splitlines()
        assert lines[0].startswith("day,t_years,q_mean,r_mean,h_q_mean,h_r_mean")
        assert len(lines) == 2 + 360  # header + day 0 + 360 days
        day0 = lines[1].split(",")
        assert float(day0[2]) == 0.0 and float(day0[3]) == 0.0  # exposures
        assert float(day0[8]) == 1.0  # price
        summary = json.loads((out / "risk_summary.json").read_text())
        assert np.isfinite(summary["gamma"])
        assert summary["bubble_peak"] is not None


class TestFitGammaCommand:
    def test_per_path_fit_rows(self, tmp_path):
        out = tmp_path / "gamma"
        code = run_cli([
            "fit-gamma", "--agents", "30", "--active", "4", "--years", "2",
            "--paths", "3", "--seed", "6", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "gamma_fits.csv").read_text().splitlines()
        assert lines[0] == "path,seed,slope,intercept,r_squared"
        summary = json.loads((out / "gamma_summary.json").read_text())
        assert summary["n_paths"] == 3
