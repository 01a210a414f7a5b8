"""
Tracing Configuration

Sets up OpenTelemetry tracing for simulation runs. The engine always opens
spans through the OpenTelemetry API; they are exported only after
setup_tracing() registers an SDK provider, which happens when COOPNET_TRACE
is set.
"""

import os
from typing import Optional

from opentelemetry import trace
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import ConsoleSpanExporter, SimpleSpanProcessor

from ..simulator.config import APP_NAME, TRACE_ENV_VAR

_provider: Optional[TracerProvider] = None


def setup_tracing() -> Optional[TracerProvider]:
    """
    Register a console-exporting tracer provider when COOPNET_TRACE is set.

    Spans cover outage estimates, SNR sweeps, capacity searches and SNR
    shift measurements. Calling this twice returns the first provider.

    Returns:
        The configured TracerProvider, or None when tracing is disabled
    """
    global _provider
    if _provider is not None:
        return _provider

    if not os.getenv(TRACE_ENV_VAR):
        return None

    print("\n" + "=" * 80)
    print("INITIALIZING OPENTELEMETRY TRACING")
    print("=" * 80)
    try:
        provider = TracerProvider(resource=Resource.create({"service.name": APP_NAME}))
        provider.add_span_processor(SimpleSpanProcessor(ConsoleSpanExporter()))
        trace.set_tracer_provider(provider)
    except Exception as e:
        print(f"⚠️  Failed to initialize tracing: {e}")
        print("   Simulation will continue without tracing")
        return None

    _provider = provider
    print("✅ Tracing initialized")
    print(f"   Service: {APP_NAME}")
    print("   Exporter: console")
    print("=" * 80 + "\n")
    return provider


def add_run_attributes(span, scheme=None, params=None, trials=None, master_seed=None) -> None:
    """Attach scenario attributes to a span (no-op spans ignore them)."""
    if span is None or not span.is_recording():
        return
    if scheme is not None:
        span.set_attribute("coopnet.scheme", str(scheme))
    if params is not None:
        span.set_attribute("coopnet.M", params.M)
        span.set_attribute("coopnet.K", params.K)
        span.set_attribute("coopnet.Nr", params.Nr)
        span.set_attribute("coopnet.N", params.N)
        span.set_attribute("coopnet.rate", params.R)
        span.set_attribute("coopnet.snr_db", params.snr_db)
    if trials is not None:
        span.set_attribute("coopnet.trials", int(trials))
    if master_seed is not None:
        span.set_attribute("coopnet.master_seed", str(master_seed))
