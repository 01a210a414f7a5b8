"""
Regenerate every figure dataset from the scenario files.

Each entry runs one CLI command and writes its CSV and plot script under
generated_figures/. Runs share the master seed recorded in the scenarios, so
a rerun reproduces every CSV byte for byte.

Usage:
    python -m coopnet.scripts.regenerate_figures --workers 8
    python -m coopnet.scripts.regenerate_figures --only dmt trt_coefficients
"""

import argparse
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from dotenv import load_dotenv

# Script is at: src/coopnet/scripts/regenerate_figures.py; .env is at the project root
PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent.parent
load_dotenv(dotenv_path=PROJECT_ROOT / ".env")

from coopnet.scripts.cli import EXIT_OK, main as cli_main  # noqa: E402
from coopnet.simulator.config import FIGURE_OUTPUT_DIR, SCENARIO_DIR  # noqa: E402

# (output name, command, scenario file)
FIGURES: List[Tuple[str, str, str]] = [
    ("outage_sigma_sr_30db", "simulate", "outage_sigma_sr_30db.cfg"),
    ("outage_sigma_sr_40db", "simulate", "outage_sigma_sr_40db.cfg"),
    ("bound_sigma_sr_30db", "bound", "outage_sigma_sr_30db.cfg"),
    ("bound_sigma_sr_40db", "bound", "outage_sigma_sr_40db.cfg"),
    ("outage_antennas_nr2", "simulate", "outage_antennas_nr2.cfg"),
    ("outage_antennas_nr3", "simulate", "outage_antennas_nr3.cfg"),
    ("capacity", "capacity", "capacity.cfg"),
    ("schemes", "schemes", "capacity.cfg"),
    ("dmt", "dmt", "dmt.cfg"),
    ("trt_coefficients", "trt", "rate_shift.cfg"),
    ("rate_shift", "shift", "rate_shift.cfg"),
]


def run_figure(name: str, command: str, scenario: str, workers: int, output_dir: Path) -> int:
    csv_path = output_dir / f"{name}.csv"
    argv = [
        command,
        "--config", str(PROJECT_ROOT / SCENARIO_DIR / scenario),
        "--out", str(csv_path),
        "--workers", str(workers),
    ]
    if command != "schemes":
        argv += ["--plot-script", str(output_dir / f"{name}_plot.py")]
    return cli_main(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Regenerate the figure datasets")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--output-dir", type=Path, default=PROJECT_ROOT / FIGURE_OUTPUT_DIR)
    parser.add_argument("--only", nargs="*", default=None, help="Subset of figure names")
    args = parser.parse_args(argv)

    selected = [f for f in FIGURES if args.only is None or f[0] in args.only]
    if not selected:
        print(f"✗ No figure matches {args.only}; known: {', '.join(f[0] for f in FIGURES)}")
        return 1

    print("=" * 80)
    print("REGENERATING FIGURE DATASETS")
    print("=" * 80)
    print(f"  Figures: {len(selected)}")
    print(f"  Output: {args.output_dir}")
    print(f"  Workers: {args.workers}")

    failures = []
    for name, command, scenario in selected:
        started = time.perf_counter()
        code = run_figure(name, command, scenario, args.workers, args.output_dir)
        elapsed = time.perf_counter() - started
        if code == EXIT_OK:
            print(f"\n✅ {name} ({command}) finished in {elapsed:.1f}s")
        else:
            print(f"\n❌ {name} ({command}) failed with exit code {code}")
            failures.append(name)

    print("\n" + "=" * 80)
    print("FIGURE REGENERATION COMPLETE")
    print("=" * 80)
    if failures:
        print(f"⚠️  Failed: {', '.join(failures)}")
        return 2
    print(f"✅ All {len(selected)} datasets written to {args.output_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
