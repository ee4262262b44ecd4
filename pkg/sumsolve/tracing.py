"""
Optional OpenTelemetry tracing. Without the tracing extra installed, or
without an endpoint configured, every span is a no-op.
"""

import logging
from contextlib import nullcontext

from sumsolve import __version__
from sumsolve.config import settings

logger = logging.getLogger(__name__)

tracer = None


def setup_tracing(endpoint=None, console=None):
    """Initialize the tracer provider; returns the tracer or None"""
    global tracer
    endpoint = endpoint if endpoint is not None else settings.OTLP_ENDPOINT
    console = settings.TRACE_CONSOLE if console is None else console
    if not endpoint and not console:
        return None
    try:
        from opentelemetry import trace
        from opentelemetry.sdk.resources import Resource
        from opentelemetry.sdk.trace import TracerProvider
        from opentelemetry.sdk.trace.export import BatchSpanProcessor, ConsoleSpanExporter, SimpleSpanProcessor

        resource = Resource.create({
            "service.name": settings.SERVICE_NAME,
            "service.version": __version__,
        })
        provider = TracerProvider(resource=resource)

        if endpoint:
            from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter
            provider.add_span_processor(BatchSpanProcessor(OTLPSpanExporter(endpoint=endpoint, insecure=True)))
        if console:
            provider.add_span_processor(SimpleSpanProcessor(ConsoleSpanExporter()))

        trace.set_tracer_provider(provider)
        tracer = trace.get_tracer("sumsolve")
        logger.info(f"Tracing initialized (endpoint={endpoint}, console={console})")
        return tracer
    except Exception as e:
        logger.error(f"Failed to initialize tracing: {e}")
        tracer = None
        return None


def span(name: str, **attributes):
    """Context manager for a span named `name`, or a null context"""
    if tracer is None:
        return nullcontext()
    return tracer.start_as_current_span(name, attributes=attributes or None)
