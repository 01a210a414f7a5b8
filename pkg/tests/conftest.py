"""
Pytest configuration and shared fixtures for all tests.

This file is automatically loaded by pytest and provides:
- Session-level tracing setup (opt-in through COOPNET_TRACE)
- Tolerances and trial budgets from test_config.json
- Shared system-parameter and realization fixtures
- Custom pytest hooks for the acceptance, integration and tracing markers
"""

import json
import os
import sys
from datetime import datetime
from pathlib import Path

import numpy as np
import pytest

# Load environment variables from .env file
try:
    from dotenv import load_dotenv
    # Look for .env in project root (parent of tests directory)
    env_path = Path(__file__).parent.parent / '.env'
    if env_path.exists():
        load_dotenv(env_path)
        print(f"[OK] Loaded environment variables from {env_path}")
except ImportError:
    print("[WARNING] python-dotenv not installed, environment variables must be set manually")

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from coopnet.simulator import SystemParams, draw_channel, SeedStream  # noqa: E402
from coopnet.simulator.config import SEED_ENV_VAR, TRACE_ENV_VAR  # noqa: E402

CONFIG_PATH = Path(__file__).parent / "test_config.json"


# ============================================================================
# Session-level Fixtures
# ============================================================================

@pytest.fixture(scope="session", autouse=True)
def setup_tracing_session():
    """
    Initialize tracing for the entire test session.

    Tracing is enabled only when COOPNET_TRACE is set; spans then go to the
    console exporter.

    Returns:
        dict: {"enabled": bool, "provider": TracerProvider or None}
    """
    print("\n" + "=" * 80)
    print("PYTEST TEST SESSION STARTING")
    print("=" * 80)
    print(f"Time: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print(f"Python: {sys.version.split()[0]}")
    print(f"NumPy: {np.__version__}")
    print(f"Seed override ({SEED_ENV_VAR}): {os.getenv(SEED_ENV_VAR, 'unset')}")

    try:
        from coopnet.tracing import setup_tracing

        provider = setup_tracing()
        result = {"enabled": provider is not None, "provider": provider}
        if provider is None:
            print(f"\n[INFO] Tracing disabled (set {TRACE_ENV_VAR}=1 to enable)")
    except Exception as e:
        print(f"\n[WARNING] Tracing setup failed: {e}")
        result = {"enabled": False, "provider": None}

    print("=" * 80 + "\n")

    yield result

    print("\n" + "=" * 80)
    print("PYTEST TEST SESSION COMPLETE")
    print("=" * 80)
    print(f"Time: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print("=" * 80 + "\n")


@pytest.fixture(scope="session")
def test_config():
    """
    Provide the tolerance and trial-budget dictionary from test_config.json.
    """
    with open(CONFIG_PATH, encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture(scope="session")
def tolerances(test_config):
    return test_config["tolerances"]


@pytest.fixture(scope="session")
def trial_budget(test_config):
    return test_config["trials"]


@pytest.fixture
def msc_params():
    """M=15, K=6, Nr=3, R=2 at 10 dB with a 30 dB source-relay variance."""
    return SystemParams(M=15, K=6, Nr=3, R=2.0, rho_s=10.0, sigma2_sr=1000.0)


@pytest.fixture
def small_params():
    """A small configuration that keeps exhaustive checks cheap."""
    return SystemParams(M=5, K=2, Nr=2, R=2.0, rho_s=10.0, N=100, sigma2_sr=10.0)


@pytest.fixture
def realizations(small_params, test_config):
    """A fixed batch of channel draws for per-instance checks."""
    seed = test_config["master_seed"]
    return [draw_channel(small_params, SeedStream(seed, i)) for i in range(200)]


# ============================================================================
# Pytest Hooks
# ============================================================================

def pytest_collection_modifyitems(config, items):
    """
    Add the asyncio marker to coroutine tests automatically.
    """
    for item in items:
        if "asyncio" in item.keywords:
            item.add_marker(pytest.mark.asyncio)


def pytest_configure(config):
    """
    Register custom markers so --strict-markers accepts them from any rootdir.
    """
    config.addinivalue_line(
        "markers",
        "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line(
        "markers",
        "integration: marks tests that run the Monte-Carlo engine end to end"
    )
    config.addinivalue_line(
        "markers",
        "acceptance: marks full-scale figure reproductions (set COOPNET_ACCEPTANCE=1)"
    )
    config.addinivalue_line(
        "markers",
        "tracing: marks tests related to OpenTelemetry tracing"
    )


def pytest_runtest_setup(item):
    """
    Skip marked tests whose environment is not configured.
    """
    if "acceptance" in item.keywords and not os.getenv("COOPNET_ACCEPTANCE"):
        pytest.skip("Skipping acceptance run (set COOPNET_ACCEPTANCE=1)")

    if "integration" in item.keywords and os.getenv("SKIP_INTEGRATION"):
        pytest.skip("Skipping integration tests (SKIP_INTEGRATION=1)")

    if "tracing" in item.keywords and not os.getenv(TRACE_ENV_VAR):
        pytest.skip(f"Skipping tracing test ({TRACE_ENV_VAR} not set)")
