"""
Tests for scenario parsing and the coopnet command line.

Usage:
    pytest tests/test_cli.py -v
"""

import csv
from pathlib import Path

import pytest

from coopnet.scripts import cli
from coopnet.scripts.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_RUNTIME,
    format_cell,
    main,
    resolve_seed,
    write_plot_script,
)
from coopnet.scripts.scenario import parse_config, snr_grid
from coopnet.simulator.config import DEFAULT_MASTER_SEED, SEED_ENV_VAR, Scheme
from coopnet.simulator.errors import ConfigParseError, ConfigValidationError

SCENARIO_DIR = Path(__file__).parent.parent / "scenarios"

SMALL_SCENARIO = """
# quick outage sweep
schemes = Direct, DF-MSC-opt
M = 4
K = 2
Nr = 2
N = 100
rate = 1
snr_db_start = 0
snr_db_stop = 10
snr_db_step = 5
trials = 300
master_seed = 7
"""


def _write(tmp_path, text, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


# ============================================================================
# Scenario parsing
# ============================================================================

class TestParseConfig:

    def test_db_suffix(self):
        config = parse_config("M = 15\nK = 6\nNr = 3\nrate = 2\nsigma2_sr = 30dB\n")
        assert config.params.sigma2_sr == pytest.approx(1000.0)

    def test_defaults(self):
        config = parse_config("M = 15\nK = 3\nNr = 3\nrate = 2\n")
        assert config.schemes == (Scheme.DF_MSC_OPT,)
        assert config.params.N == 200
        assert config.master_seed is None
        assert config.snr_grid_db == (0.0,)

    def test_lists_and_comments(self):
        config = parse_config(
            "schemes = DF-MSC-opt, ddf  # case-insensitive names\n"
            "M = 15\nK = 3\nNr = 3\nrates = 4, 6\n\n"
            "snr_db_start = 0\nsnr_db_stop = 40\nsnr_db_step = 10\n"
        )
        assert config.schemes == (Scheme.DF_MSC_OPT, Scheme.DDF)
        assert config.rates == (4.0, 6.0)
        assert config.snr_grid_db == (0.0, 10.0, 20.0, 30.0, 40.0)

    def test_k_above_m(self):
        with pytest.raises(ConfigValidationError, match="K ≤ M"):
            parse_config("M = 15\nK = 20\nNr = 3\nrate = 2\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigParseError) as excinfo:
            parse_config("M = 15\nK = 3\nNr = 3\nrate = 2\nbandwidth = 5\n")
        assert excinfo.value.line_number == 5

    def test_duplicate_key(self):
        with pytest.raises(ConfigParseError, match="more than once"):
            parse_config("M = 15\nK = 3\nK = 4\nNr = 3\nrate = 2\n")

    def test_rate_and_rates_are_one_key(self):
        with pytest.raises(ConfigParseError):
            parse_config("M = 15\nK = 3\nNr = 3\nrate = 2\nrates = 4, 6\n")

    @pytest.mark.parametrize("text", [
        "M = 15\nK = 3\nNr = 3\nrate\n",
        "M = 15\nK = 3\nNr = 3\nrate =\n",
        "M = fifteen\nK = 3\nNr = 3\nrate = 2\n",
        "M = 15\nK = 3\nNr = 3\nrate = 2dB\n",
        "M = 15.5\nK = 3\nNr = 3\nrate = 2\n",
        "schemes = DF-MSC-best\nM = 15\nK = 3\nNr = 3\nrate = 2\n",
        "M = 15\nK = 3\nNr = 3\nrates = 2,,4\n",
    ])
    def test_grammar_errors(self, text):
        with pytest.raises(ConfigParseError):
            parse_config(text)

    @pytest.mark.parametrize("extra", [
        "snr_db_step = 0",
        "snr_db_start = 10\nsnr_db_stop = 0",
        "trials = 0",
        "target_pout = 1.5",
        "master_seed = -1",
        "region = 3",
        "delta_r = 0",
    ])
    def test_validation_errors(self, extra):
        with pytest.raises(ConfigValidationError):
            parse_config(f"M = 15\nK = 3\nNr = 3\nrate = 2\n{extra}\n")

    def test_missing_required_key(self):
        with pytest.raises(ConfigValidationError, match="Nr"):
            parse_config("M = 15\nK = 3\nrate = 2\n")

    def test_snr_grid_is_inclusive(self):
        assert snr_grid(0.0, 30.0, 5.0) == (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
        assert snr_grid(0.0, 1.0, 0.1)[-1] == 1.0
        assert snr_grid(0.0, 0.95, 0.5) == (0.0, 0.5)

    @pytest.mark.parametrize("path", sorted(SCENARIO_DIR.glob("*.cfg")), ids=lambda p: p.stem)
    def test_shipped_scenarios_parse(self, path):
        config = parse_config(path.read_text(encoding="utf-8"))
        assert config.master_seed in (None, DEFAULT_MASTER_SEED)
        assert config.params.K <= config.params.M


# ============================================================================
# Output helpers
# ============================================================================

class TestOutputHelpers:

    def test_format_cell(self):
        assert format_cell(None) == ""
        assert format_cell(True) == "1"
        assert format_cell(3) == "3"
        assert format_cell(2.0) == "2"
        assert format_cell(0.1) == "0.1"
        assert format_cell(1.0 / 3.0) == "0.3333333333"
        assert format_cell(1.5e-7) == "1.5e-07"
        assert format_cell("DDF") == "DDF"

    def test_seed_precedence(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "11")
        assert resolve_seed(5, 7) == 5
        assert resolve_seed(None, 7) == 7
        assert resolve_seed(None, None) == 11
        monkeypatch.delenv(SEED_ENV_VAR)
        assert resolve_seed(None, None) == DEFAULT_MASTER_SEED

    def test_seed_errors(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "not-a-seed")
        with pytest.raises(ConfigValidationError):
            resolve_seed(None, None)
        with pytest.raises(ConfigValidationError):
            resolve_seed(-1, None)
        with pytest.raises(ConfigValidationError):
            resolve_seed(2 ** 64, None)

    def test_plot_script_is_valid_python(self, tmp_path):
        csv_path = tmp_path / "dmt.csv"
        script = tmp_path / "plots" / "dmt_plot.py"
        write_plot_script(script, "dmt", csv_path)
        text = script.read_text(encoding="utf-8")
        assert "import matplotlib.pyplot as plt" in text
        assert repr(str(csv_path)) in text
        compile(text, str(script), "exec")

    def test_plot_script_unknown_command(self, tmp_path):
        with pytest.raises(ConfigValidationError):
            write_plot_script(tmp_path / "plot.py", "schemes", tmp_path / "x.csv")


# ============================================================================
# Entry point
# ============================================================================

class TestMain:

    def test_simulate_writes_csv(self, tmp_path):
        config = _write(tmp_path, SMALL_SCENARIO)
        out = tmp_path / "p_out.csv"
        assert main(["simulate", "--config", str(config), "--out", str(out)]) == EXIT_OK

        rows = _read_rows(out)
        assert len(rows) == 2 * 3
        assert {r["scheme"] for r in rows} == {"Direct", "DF-MSC-opt"}
        for row in rows:
            assert row["trials"] == "300"
            assert row["seed"] == "7"
            assert row["N"] == "100"
            assert float(row["ci_low"]) <= float(row["p_out"]) <= float(row["ci_high"])
            assert (row["bound"] == "") == (row["scheme"] == "Direct")

    def test_csv_is_byte_identical_across_runs(self, tmp_path):
        config = _write(tmp_path, SMALL_SCENARIO)
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--config", str(config), "--out", str(first)]) == EXIT_OK
        assert main(["simulate", "--config", str(config), "--out", str(second)]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_seed_flag_overrides_scenario(self, tmp_path):
        config = _write(tmp_path, SMALL_SCENARIO)
        out = tmp_path / "p_out.csv"
        assert main(["simulate", "--config", str(config), "--out", str(out), "--seed", "99"]) == EXIT_OK
        assert {r["seed"] for r in _read_rows(out)} == {"99"}

    @pytest.mark.integration
    def test_csv_is_byte_identical_across_worker_counts(self, tmp_path):
        # several chunks per point so the pool actually splits the work
        text = SMALL_SCENARIO.replace("schemes = Direct, DF-MSC-opt", "schemes = DF-MSC-opt, DF-MSC-rand")
        config = _write(tmp_path, text.replace("trials = 300", "trials = 4500"))
        single, pooled = tmp_path / "w1.csv", tmp_path / "w8.csv"
        assert main(["simulate", "--config", str(config), "--out", str(single), "--workers", "1"]) == EXIT_OK
        assert main(["simulate", "--config", str(config), "--out", str(pooled), "--workers", "8"]) == EXIT_OK
        assert single.read_bytes() == pooled.read_bytes()
        assert {r["trials"] for r in _read_rows(single)} == {"4500"}

    def test_output_path_from_scenario(self, tmp_path):
        out = tmp_path / "from_scenario.csv"
        config = _write(tmp_path, f"M = 15\nK = 3\nNr = 3\nrate = 2\noutput = {out}\n")
        assert main(["trt", "--config", str(config)]) == EXIT_OK
        assert out.exists()

        override = tmp_path / "override.csv"
        assert main(["trt", "--config", str(config), "--out", str(override)]) == EXIT_OK
        assert override.read_bytes() == out.read_bytes()

    def test_missing_output_path_is_config_error(self, tmp_path, capsys):
        config = _write(tmp_path, "M = 15\nK = 3\nNr = 3\nrate = 2\n")
        assert main(["trt", "--config", str(config)]) == EXIT_CONFIG
        assert "--out" in capsys.readouterr().err

    def test_analytic_commands_build_no_engine(self, tmp_path, monkeypatch, capsys):
        def no_engine(*args, **kwargs):
            raise RuntimeError("engine built")

        monkeypatch.setattr(cli, "MonteCarloEngine", no_engine)
        for command, scenario in (("trt", "rate_shift.cfg"), ("dmt", "dmt.cfg"), ("bound", "outage_sigma_sr_30db.cfg")):
            out = tmp_path / f"{command}.csv"
            assert main([command, "--config", str(SCENARIO_DIR / scenario), "--out", str(out)]) == EXIT_OK
        assert "MonteCarloEngine initialized" not in capsys.readouterr().out

        config = _write(tmp_path, SMALL_SCENARIO)
        assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "x.csv")]) == EXIT_RUNTIME
        assert "engine built" in capsys.readouterr().err

    def test_trt_rows(self, tmp_path):
        out = tmp_path / "trt.csv"
        code = main(["trt", "--config", str(SCENARIO_DIR / "rate_shift.cfg"), "--out", str(out)])
        assert code == EXIT_OK
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "z,c,g,t,delta_r,predicted_shift_db"
        assert "1,4,10,2.5,2,2.4" in lines
        assert len(lines) == 1 + 3

    def test_dmt_opt_dominates_af(self, tmp_path, capsys):
        out = tmp_path / "dmt.csv"
        plot = tmp_path / "dmt_plot.py"
        code = main([
            "dmt", "--config", str(SCENARIO_DIR / "dmt.cfg"),
            "--out", str(out), "--plot-script", str(plot),
        ])
        assert code == EXIT_OK
        assert plot.exists()
        assert "best integer K" in capsys.readouterr().out

        rows = _read_rows(out)
        curves = {}
        for row in rows:
            curves.setdefault(row["scheme"], {})[row["r"]] = float(row["d"])
        opt, af = curves["DF-MSC-opt"], curves["AF-SDiv"]
        assert opt.keys() == af.keys()
        assert all(opt[r] >= af[r] for r in opt)

    def test_schemes_table(self, tmp_path):
        out = tmp_path / "schemes.csv"
        code = main(["schemes", "--config", str(SCENARIO_DIR / "capacity.cfg"), "--out", str(out)])
        assert code == EXIT_OK
        rows = _read_rows(out)
        assert [r["scheme"] for r in rows] == [s.value for s in Scheme]
        assert rows[0]["streams"] == "3"

    def test_bound_rows(self, tmp_path):
        out = tmp_path / "bound.csv"
        code = main(["bound", "--config", str(SCENARIO_DIR / "outage_sigma_sr_30db.cfg"), "--out", str(out)])
        assert code == EXIT_OK
        rows = _read_rows(out)
        assert [float(r["snr_db"]) for r in rows] == [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
        bounds = [float(r["bound"]) for r in rows]
        assert all(0.0 <= b <= 1.0 for b in bounds)
        assert all(b <= a + 1e-12 for a, b in zip(bounds, bounds[1:]))

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        config = _write(tmp_path, "M = 15\nK = 20\nNr = 3\nrate = 2\n")
        code = main(["trt", "--config", str(config), "--out", str(tmp_path / "x.csv")])
        assert code == EXIT_CONFIG
        assert "K ≤ M" in capsys.readouterr().err
        assert not (tmp_path / "x.csv").exists()

    def test_parse_error_exit_code(self, tmp_path):
        config = _write(tmp_path, "M = 15\nK = 3\nNr = 3\nrate = 2\ncolor = blue\n")
        assert main(["trt", "--config", str(config), "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG

    def test_missing_config_exit_code(self, tmp_path):
        missing = tmp_path / "nowhere.cfg"
        assert main(["trt", "--config", str(missing), "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG

    def test_bad_worker_count_exit_code(self, tmp_path):
        config = _write(tmp_path, SMALL_SCENARIO)
        code = main(["simulate", "--config", str(config), "--out", str(tmp_path / "x.csv"), "--workers", "0"])
        assert code == EXIT_CONFIG

    def test_runtime_error_exit_code(self, tmp_path, monkeypatch, capsys):
        def explode(config, seed, engine):
            raise RuntimeError("worker died")

        monkeypatch.setitem(cli.COMMANDS, "trt", explode)
        config = _write(tmp_path, SMALL_SCENARIO)
        assert main(["trt", "--config", str(config), "--out", str(tmp_path / "x.csv")]) == EXIT_RUNTIME
        assert "worker died" in capsys.readouterr().err

    @pytest.mark.parametrize("argv", [[], ["simulate"], ["simulate", "--config", "x.cfg", "--trials", "5"], ["paint"]])
    def test_usage_errors_are_config_errors(self, argv):
        with pytest.raises(SystemExit) as excinfo:
            main(argv)
        assert excinfo.value.code == EXIT_CONFIG

    def test_help_still_succeeds(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--help"])
        assert excinfo.value.code == EXIT_OK
        assert "simulate" in capsys.readouterr().out
