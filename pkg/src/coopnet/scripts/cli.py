#!/usr/bin/env python3
"""
coopnet command line

Runs one experiment from a scenario file and writes a CSV:

    coopnet simulate --config scenarios/outage_sigma_sr_30db.cfg --out p_out.csv --workers 8
    coopnet capacity --config scenarios/capacity.cfg --out capacity.csv
    coopnet bound    --config scenarios/outage_sigma_sr_30db.cfg --out bound.csv
    coopnet dmt      --config scenarios/dmt.cfg --out dmt.csv --plot-script dmt_plot.py
    coopnet trt      --config scenarios/rate_shift.cfg --out trt.csv
    coopnet shift    --config scenarios/rate_shift.cfg --out shift.csv
    coopnet schemes  --config scenarios/capacity.cfg --out schemes.csv

Seed precedence: --seed, then master_seed in the scenario, then COOPNET_SEED,
then the built-in default. --out may be left off when the scenario sets
`output`. Exit codes: 0 success, 1 configuration or usage error, 2 runtime
error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv

from ..simulator.analysis import (
    dmt_ddf,
    dmt_grid,
    dmt_msc,
    dmt_msc_opt,
    dmt_sdiv,
    best_decoding_threshold,
    k_star,
    outage_bound_breakdown,
    outage_bound_discrete,
    phi,
    predicted_snr_shift_db,
    trt_coefficients,
)
from ..simulator.baselines import scheme_profile
from ..simulator.config import (
    CSV_SIGNIFICANT_DIGITS,
    DEFAULT_MASTER_SEED,
    SEED_ENV_VAR,
    SNR_SEARCH_RANGE_DB,
    Scheme,
)
from ..simulator.engine import MonteCarloEngine
from ..simulator.errors import ConfigValidationError, NonBracketingError, ParameterError
from ..tracing.otel_config import setup_tracing
from .scenario import ScenarioConfig, parse_config

Row = Sequence[object]
Table = Tuple[List[str], List[Row]]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


# ============================================================================
# Output helpers
# ============================================================================

def format_cell(value: object) -> str:
    """CSV cell text: 10 significant digits for floats, empty for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, f".{CSV_SIGNIFICANT_DIGITS}g")
    return str(value)


def write_csv(path: Path, header: List[str], rows: List[Row]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


_PLOT_BODIES = {
    "simulate": (
        "for scheme in sorted({r['scheme'] for r in rows}):\n"
        "    for rate in sorted({r['rate'] for r in rows if r['scheme'] == scheme}, key=float):\n"
        "        sel = [r for r in rows if r['scheme'] == scheme and r['rate'] == rate]\n"
        "        plt.semilogy([float(r['snr_db']) for r in sel], [float(r['p_out']) for r in sel],\n"
        "                     marker='o', label=f'{scheme} R={rate}')\n"
        "        bound = [r for r in sel if r['bound']]\n"
        "        if bound:\n"
        "            plt.semilogy([float(r['snr_db']) for r in bound], [float(r['bound']) for r in bound],\n"
        "                         linestyle='--', label=f'{scheme} bound R={rate}')\n"
        "plt.xlabel('SNR (dB)')\n"
        "plt.ylabel('Outage probability')\n"
    ),
    "capacity": (
        "for scheme in sorted({r['scheme'] for r in rows}):\n"
        "    sel = [r for r in rows if r['scheme'] == scheme and r['capacity']]\n"
        "    plt.plot([float(r['snr_db']) for r in sel], [float(r['capacity']) for r in sel], marker='o', label=scheme)\n"
        "plt.xlabel('SNR (dB)')\n"
        "plt.ylabel('Outage capacity (bits/channel use)')\n"
    ),
    "bound": (
        "for rate in sorted({r['rate'] for r in rows}, key=float):\n"
        "    sel = [r for r in rows if r['rate'] == rate]\n"
        "    plt.semilogy([float(r['snr_db']) for r in sel], [float(r['bound']) for r in sel], label=f'bound R={rate}')\n"
        "    plt.semilogy([float(r['snr_db']) for r in sel], [float(r['discrete_bound']) for r in sel],\n"
        "                 linestyle='--', label=f'discrete bound R={rate}')\n"
        "plt.xlabel('SNR (dB)')\n"
        "plt.ylabel('Outage probability bound')\n"
    ),
    "dmt": (
        "for scheme in sorted({r['scheme'] for r in rows}):\n"
        "    sel = [r for r in rows if r['scheme'] == scheme]\n"
        "    plt.plot([float(r['r']) for r in sel], [float(r['d']) for r in sel], label=scheme)\n"
        "plt.xlabel('Multiplexing gain r')\n"
        "plt.ylabel('Diversity gain d(r)')\n"
    ),
    "trt": (
        "plt.bar([r['z'] for r in rows], [float(r['predicted_shift_db']) for r in rows])\n"
        "plt.xlabel('Operating region z')\n"
        "plt.ylabel('Predicted SNR shift (dB)')\n"
    ),
    "shift": (
        "labels = [f\"{r['scheme']} {r['rate_a']}->{r['rate_b']}\" for r in rows]\n"
        "plt.bar(labels, [float(r['shift_db']) for r in rows])\n"
        "plt.ylabel('Measured SNR shift (dB)')\n"
    ),
}


def write_plot_script(path: Path, command: str, csv_path: Path) -> None:
    """Write a matplotlib script that plots the CSV; it is not run here."""
    body = _PLOT_BODIES.get(command)
    if body is None:
        raise ConfigValidationError(f"no plot script for '{command}'")
    script = (
        "#!/usr/bin/env python3\n"
        f'"""Plot {command} results from {csv_path.name}."""\n\n'
        "import csv\n\n"
        "import matplotlib.pyplot as plt\n\n"
        f"CSV_PATH = {str(csv_path)!r}\n\n"
        "with open(CSV_PATH, newline='') as f:\n"
        "    rows = list(csv.DictReader(f))\n\n"
        f"{body}"
        "plt.grid(True, which='both', alpha=0.3)\n"
        "plt.legend()\n"
        "plt.tight_layout()\n"
        "plt.show()\n"
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(script, encoding="utf-8")


def resolve_seed(cli_seed: Optional[int], config_seed: Optional[int]) -> int:
    """--seed, scenario master_seed, COOPNET_SEED, default; first one set wins."""
    if cli_seed is not None:
        seed = cli_seed
    elif config_seed is not None:
        seed = config_seed
    elif os.getenv(SEED_ENV_VAR):
        try:
            seed = int(os.environ[SEED_ENV_VAR])
        except ValueError:
            raise ConfigValidationError(f"{SEED_ENV_VAR} must be an integer, got {os.environ[SEED_ENV_VAR]!r}")
    else:
        seed = DEFAULT_MASTER_SEED
    if not 0 <= seed < 2 ** 64:
        raise ConfigValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def resolve_output(cli_out: Optional[Path], config_output: Optional[str]) -> Path:
    """--out, then the scenario's output key; relative paths are taken from the working directory."""
    if cli_out is not None:
        return cli_out
    if config_output:
        return Path(config_output)
    raise ConfigValidationError("no output path: pass --out or set output in the scenario")


# ============================================================================
# Commands
# ============================================================================

def run_simulate(config: ScenarioConfig, seed: int, engine: MonteCarloEngine) -> Table:
    header = ["scheme", "snr_db", "rate", "trials", "outages", "p_out", "ci_low", "ci_high", "bound", "N", "seed"]
    rows: List[Row] = []
    for scheme in config.schemes:
        for rate in config.rates:
            sweep = engine.snr_sweep(scheme, config.params.with_rate(rate), config.snr_grid_db, config.trials, seed)
            for row in sweep.rows:
                e = row.estimate
                rows.append([
                    scheme.value, row.snr_db, row.rate, e.trials, e.outages,
                    e.p_out, e.ci_low, e.ci_high, row.bound, config.params.N, seed,
                ])
    return header, rows


def run_capacity(config: ScenarioConfig, seed: int, engine: MonteCarloEngine) -> Table:
    header = ["scheme", "snr_db", "target_pout", "capacity", "trials", "N", "seed"]
    rows: List[Row] = []
    for scheme in config.schemes:
        for snr_db in config.snr_grid_db:
            try:
                capacity = engine.outage_capacity(
                    scheme, config.params, config.target_pout, snr_db,
                    config.rate_tolerance, config.trials, seed,
                )
            except NonBracketingError as e:
                print(f"  ⚠️  {scheme} at {snr_db:g} dB: {e}")
                capacity = None
            rows.append([scheme.value, snr_db, config.target_pout, capacity, config.trials, config.params.N, seed])
    return header, rows


def run_bound(config: ScenarioConfig, seed: int, engine: Optional[MonteCarloEngine] = None) -> Table:
    header = [
        "snr_db", "rate", "phi_n", "direct_term", "relay_term",
        "alpha_star", "cooperative_level", "bound", "discrete_bound",
    ]
    rows: List[Row] = []
    for rate in config.rates:
        for snr_db in config.snr_grid_db:
            params = config.params.with_rate(rate).with_snr_db(snr_db)
            terms = outage_bound_breakdown(params)
            rows.append([
                snr_db, rate, phi(params.N, params), terms.direct_term, terms.relay_term,
                terms.alpha_star, terms.cooperative_level, terms.total, outage_bound_discrete(params),
            ])
    return header, rows


def run_dmt(config: ScenarioConfig, seed: int, engine: Optional[MonteCarloEngine] = None) -> Table:
    M, K, Nr = config.params.M, config.params.K, config.params.Nr
    curves: Dict[str, Callable[[float], float]] = {
        Scheme.DF_MSC_OPT.value: lambda r: dmt_msc_opt(r, M, Nr).d,
        f"{Scheme.DF_MSC_OPT.value}(K={K})": lambda r: dmt_msc(r, K, M, Nr).d,
        Scheme.DDF.value: lambda r: dmt_ddf(r, M, Nr).d,
        Scheme.AF_SDIV.value: lambda r: dmt_sdiv(r, M, Nr).d,
        Scheme.DF_SDIV.value: lambda r: dmt_sdiv(r, M, Nr).d,
    }
    grid = dmt_grid()
    rows: List[Row] = [[name, r, curve(r)] for name, curve in curves.items() for r in grid]

    print(f"\n  Optimal decoding threshold (M={M}, Nr={Nr}):")
    for r in (0.0, 0.25, 0.5, 0.75):
        print(f"    r={r:.2f}: K*={k_star(r, M, Nr):.3f}, best integer K={best_decoding_threshold(r, M, Nr)}")
    return ["scheme", "r", "d"], rows


def run_trt(config: ScenarioConfig, seed: int, engine: Optional[MonteCarloEngine] = None) -> Table:
    K, Nr = config.params.K, config.params.Nr
    rows: List[Row] = []
    for z in range(min(Nr, K + 1)):
        c = trt_coefficients(z, K, Nr)
        rows.append([c.z, c.c, c.g, c.t, config.delta_r, predicted_snr_shift_db(config.delta_r, z, K, Nr)])
    return ["z", "c", "g", "t", "delta_r", "predicted_shift_db"], rows


def run_shift(config: ScenarioConfig, seed: int, engine: MonteCarloEngine) -> Table:
    header = [
        "scheme", "rate_a", "rate_b", "target_pout", "snr_a_db", "snr_b_db",
        "shift_db", "predicted_shift_db", "trials", "N", "seed",
    ]
    rate_a = config.rates[0]
    rate_b = config.rates[1] if len(config.rates) > 1 else rate_a + config.delta_r
    grid = config.snr_grid_db
    search = (grid[0], grid[-1]) if len(grid) > 1 else SNR_SEARCH_RANGE_DB

    rows: List[Row] = []
    for scheme in config.schemes:
        shift, snr_a, snr_b = engine.measure_snr_shift_db(
            scheme, config.params, rate_a, rate_b, config.target_pout, config.trials, seed, search,
        )
        predicted = None
        if scheme is Scheme.DF_MSC_OPT and config.region is not None:
            predicted = predicted_snr_shift_db(rate_b - rate_a, config.region, config.params.K, config.params.Nr)
        rows.append([
            scheme.value, rate_a, rate_b, config.target_pout, snr_a, snr_b,
            shift, predicted, config.trials, config.params.N, seed,
        ])
    return header, rows


def run_schemes(config: ScenarioConfig, seed: int, engine: Optional[MonteCarloEngine] = None) -> Table:
    rows: List[Row] = []
    for scheme in Scheme:
        profile = scheme_profile(scheme, config.params)
        rows.append([scheme.value, profile.streams, profile.relays, profile.receiver])
    return ["scheme", "streams", "relays", "receiver"], rows


COMMANDS: Dict[str, Callable[[ScenarioConfig, int, Optional[MonteCarloEngine]], Table]] = {
    "simulate": run_simulate,
    "capacity": run_capacity,
    "bound": run_bound,
    "dmt": run_dmt,
    "trt": run_trt,
    "shift": run_shift,
    "schemes": run_schemes,
}

# Commands that draw channels; the rest are closed-form and get no engine.
SIMULATION_COMMANDS = frozenset({"simulate", "capacity", "shift"})


# ============================================================================
# Entry point
# ============================================================================

class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="Scenario file")
    common.add_argument("--out", type=Path, default=None, help="CSV output path (default: the scenario's output key)")
    common.add_argument("--workers", type=int, default=1, help="Worker processes for Monte-Carlo runs")
    common.add_argument("--seed", type=int, default=None, help="Master seed override")
    common.add_argument("--plot-script", type=Path, default=None, help="Also write a matplotlib script for the CSV")

    parser = _Parser(prog="coopnet", description="Multi-stream cooperative relay simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "Outage probability vs SNR",
        "capacity": "Outage capacity vs SNR",
        "bound": "Analytic outage upper bound vs SNR",
        "dmt": "Diversity-multiplexing tradeoff curves",
        "trt": "Throughput-reliability coefficients",
        "shift": "Measured SNR shift between two rates",
        "schemes": "Cooperative-phase profile of every scheme",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    setup_tracing()

    print("\n" + "=" * 80)
    print(f"COOPNET - {args.command.upper()}")
    print("=" * 80)

    try:
        config = parse_config(args.config.read_text(encoding="utf-8"))
        seed = resolve_seed(args.seed, config.master_seed)
        if args.workers < 1:
            raise ConfigValidationError(f"--workers must be at least 1, got {args.workers}")
        out = resolve_output(args.out, config.output)
    except (OSError, UnicodeDecodeError) as e:
        print(f"error: cannot read config {args.config}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ParameterError as e:
        print(f"error: {args.config}: {e}", file=sys.stderr)
        return EXIT_CONFIG

    print(f"[OK] Loaded scenario {args.config}")
    print(f"   Schemes: {', '.join(s.value for s in config.schemes)}")
    print(f"   M={config.params.M}, K={config.params.K}, Nr={config.params.Nr}, N={config.params.N}")
    print(f"   Seed: {seed}, trials: {config.trials}, workers: {args.workers}")

    try:
        if args.command in SIMULATION_COMMANDS:
            with MonteCarloEngine(worker_count=args.workers) as engine:
                header, rows = COMMANDS[args.command](config, seed, engine)
        else:
            header, rows = COMMANDS[args.command](config, seed, None)
        write_csv(out, header, rows)
        print(f"\n✓ Wrote {len(rows)} rows to {out}")
        if args.plot_script is not None:
            write_plot_script(args.plot_script, args.command, out)
            print(f"✓ Wrote plot script to {args.plot_script}")
    except ParameterError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
