"""
Monitoring for circle-lab.

Provides per-operation timing, optional crash reporting through Sentry and
exception capture for the command-line front end.
"""
import logging
import time
from contextlib import contextmanager
from functools import wraps
from typing import Callable, Optional

import sentry_sdk
from sentry_sdk.integrations.logging import LoggingIntegration

from circle_lab.logger import logger
from circle_lab.settings import get_settings


class PerformanceTracker:
    """Track performance metrics for operations."""

    def __init__(self):
        self.metrics = {}

    def record(self, operation: str, duration_ms: float, **kwargs):
        """Record a performance metric."""
        if operation not in self.metrics:
            self.metrics[operation] = {
                "count": 0,
                "total_ms": 0.0,
                "min_ms": float("inf"),
                "max_ms": 0.0,
                "avg_ms": 0.0,
            }

        metric = self.metrics[operation]
        metric["count"] += 1
        metric["total_ms"] += duration_ms
        metric["min_ms"] = min(metric["min_ms"], duration_ms)
        metric["max_ms"] = max(metric["max_ms"], duration_ms)
        metric["avg_ms"] = metric["total_ms"] / metric["count"]

        logger.debug(
            f"Performance: {operation} took {duration_ms:.2f}ms",
            extra={"operation": operation, "duration_ms": duration_ms, **kwargs},
        )

    def get_stats(self) -> dict:
        """Get all performance statistics."""
        return {name: dict(metric) for name, metric in self.metrics.items()}

    def reset(self):
        """Reset all metrics."""
        self.metrics.clear()


# Global instance
performance_tracker = PerformanceTracker()


def initialize_sentry() -> bool:
    """Initialize Sentry SDK for crash reporting. Returns True when active."""
    sentry_config = get_settings().get_sentry_config()

    if not sentry_config:
        logger.debug("Sentry is disabled (flag off or no DSN configured)")
        return False

    try:
        logging_integration = LoggingIntegration(
            level=logging.INFO,  # breadcrumbs
            event_level=logging.ERROR,  # events
        )
        sentry_sdk.init(
            integrations=[logging_integration],
            before_send=before_send_event,
            **sentry_config,
        )
        logger.info(f"Sentry initialized (environment: {sentry_config['environment']})")
        return True
    except Exception as e:
        logger.error(f"Failed to initialize Sentry: {e}", exc_info=True)
        return False


def before_send_event(event, hint):
    """Tag events with the laboratory version and environment."""
    settings = get_settings()
    event.setdefault("tags", {})
    event["tags"]["app_version"] = settings.app_version
    event["tags"]["environment"] = settings.environment
    return event


@contextmanager
def track_performance(operation: str, **kwargs):
    """Context manager to track operation performance."""
    start_time = time.perf_counter()
    try:
        yield
    finally:
        duration_ms = (time.perf_counter() - start_time) * 1000
        if get_settings().enable_performance_tracking:
            performance_tracker.record(operation, duration_ms, **kwargs)


def track_performance_decorator(operation: str):
    """Decorator to track function performance."""

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            with track_performance(operation):
                return func(*args, **kwargs)

        return wrapper

    return decorator


def capture_exception(error: Exception, context: Optional[dict] = None):
    """Capture exception to Sentry (when enabled) and logs."""
    logger.error(f"Exception captured: {error}", exc_info=True, extra=context or {})

    if get_settings().enable_sentry:
        with sentry_sdk.push_scope() as scope:
            if context:
                for key, value in context.items():
                    scope.set_extra(key, value)
            sentry_sdk.capture_exception(error)


def get_monitoring_stats() -> dict:
    """Get all monitoring statistics."""
    settings = get_settings()
    return {
        "performance": performance_tracker.get_stats(),
        "sentry_enabled": settings.enable_sentry,
        "environment": settings.environment,
    }
