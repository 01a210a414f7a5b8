"""
Configuration for the cooperative relay simulator
"""

from enum import Enum


class Scheme(str, Enum):
    """Relaying schemes the engine can evaluate."""

    DF_MSC_OPT = "DF-MSC-opt"
    DF_MSC_RAND = "DF-MSC-rand"
    DF_SDIV = "DF-SDiv"
    AF_SDIV = "AF-SDiv"
    DDF = "DDF"
    DIRECT = "Direct"

    def __str__(self) -> str:
        return self.value


MSC_SCHEMES = (Scheme.DF_MSC_OPT, Scheme.DF_MSC_RAND)
BASELINE_SCHEMES = (Scheme.DF_MSC_RAND, Scheme.DF_SDIV, Scheme.AF_SDIV, Scheme.DDF)

# Scenario Defaults
DEFAULT_CODEWORD_LENGTH = 200  # N, channel uses per codeword
DEFAULT_TRIALS = 10_000
DEFAULT_MASTER_SEED = 20100101
DEFAULT_TARGET_POUT = 0.01
DEFAULT_DELTA_R = 2.0  # bits/channel-use, rate gap for TRT predictions
MAX_RELAYS = 64
MAX_GAMMA_ORDER = 64  # largest k accepted by the Gamma CDF series

# Selection Search
ENUMERATION_CAP = 1_000_000  # max |Omega| before optimal selection refuses to run

# Parallel Processing Configuration
DEFAULT_WORKERS = 1
TRIAL_CHUNK_SIZE = 2_000  # trials per work item; fixed so results never depend on worker count

# Estimation
CONFIDENCE_LEVEL = 0.95  # Wilson score interval
MONOTONICITY_SIGMAS = 3.0
MONOTONICITY_CHECK_POINTS = 8

# Outage Capacity Search
RATE_FLOOR = 2.0 ** -6  # bits/channel-use
RATE_CEILING = 64.0  # bracketing stops here
DEFAULT_RATE_TOLERANCE = 0.01

# SNR Shift Search
SNR_SEARCH_RANGE_DB = (-10.0, 50.0)
SNR_BISECTION_TOLERANCE_DB = 0.25  # log p_out is interpolated inside the final bracket

# Analytic Grids
ALPHA_GRID = tuple(round(0.01 * i, 2) for i in range(1, 100))  # sup of the relay-assisted term
DMT_GRID_STEP = 0.01

# Output Configuration
CSV_SIGNIFICANT_DIGITS = 10
FIGURE_OUTPUT_DIR = "generated_figures"
SCENARIO_DIR = "scenarios"

# Environment
SEED_ENV_VAR = "COOPNET_SEED"
TRACE_ENV_VAR = "COOPNET_TRACE"

# Session Configuration
APP_NAME = "coopnet"
