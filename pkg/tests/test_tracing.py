"""
Tests for span attributes and the opt-in tracing setup.

The setup test only runs with COOPNET_TRACE set:
    COOPNET_TRACE=1 pytest tests/test_tracing.py -v
"""

import pytest
from opentelemetry import trace
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import SimpleSpanProcessor
from opentelemetry.sdk.trace.export.in_memory_span_exporter import InMemorySpanExporter

from coopnet.simulator.config import Scheme
from coopnet.tracing.otel_config import add_run_attributes, setup_tracing


@pytest.fixture
def local_tracer():
    """A tracer on a private provider so spans can be inspected."""
    exporter = InMemorySpanExporter()
    provider = TracerProvider()
    provider.add_span_processor(SimpleSpanProcessor(exporter))
    yield provider.get_tracer("coopnet-tests"), exporter
    provider.shutdown()


class TestRunAttributes:

    def test_attributes_recorded(self, local_tracer, msc_params):
        tracer, exporter = local_tracer
        with tracer.start_as_current_span("estimate_outage") as span:
            add_run_attributes(span, scheme=Scheme.DF_MSC_OPT, params=msc_params, trials=500, master_seed=2 ** 63)

        (finished,) = exporter.get_finished_spans()
        attributes = dict(finished.attributes)
        assert attributes["coopnet.scheme"] == "DF-MSC-opt"
        assert attributes["coopnet.M"] == 15
        assert attributes["coopnet.K"] == 6
        assert attributes["coopnet.Nr"] == 3
        assert attributes["coopnet.rate"] == 2.0
        assert attributes["coopnet.snr_db"] == pytest.approx(10.0)
        assert attributes["coopnet.trials"] == 500
        # 64-bit seeds do not fit a signed attribute
        assert attributes["coopnet.master_seed"] == str(2 ** 63)

    def test_partial_attributes(self, local_tracer):
        tracer, exporter = local_tracer
        with tracer.start_as_current_span("snr_shift") as span:
            add_run_attributes(span, trials=10)
        (finished,) = exporter.get_finished_spans()
        assert dict(finished.attributes) == {"coopnet.trials": 10}

    def test_non_recording_span_ignored(self, msc_params):
        add_run_attributes(trace.INVALID_SPAN, scheme=Scheme.DDF, params=msc_params)
        add_run_attributes(None, trials=1)


@pytest.mark.tracing
class TestSetupTracing:

    def test_provider_is_registered_once(self):
        provider = setup_tracing()
        assert isinstance(provider, TracerProvider)
        assert setup_tracing() is provider
