"""OpenTelemetry tracing for simulation runs."""

from .otel_config import add_run_attributes, setup_tracing

__all__ = ["setup_tracing", "add_run_attributes"]
