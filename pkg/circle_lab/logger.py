"""
Structured logging configuration for circle-lab.

Provides consistent logging across the laboratory with support for:
- JSON formatting for machine-read experiment logs
- Optional file rotation
- Contextual information on every record
"""
import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

from pythonjsonlogger import jsonlogger

from circle_lab.settings import get_settings

ROOT_LOGGER_NAME = "circle_lab"


class ContextFilter(logging.Filter):
    """Add contextual information to log records."""

    def __init__(self, app_name: str, version: str):
        super().__init__()
        self.app_name = app_name
        self.version = version

    def filter(self, record):
        record.app_name = self.app_name
        record.app_version = self.version
        return True


def setup_logging(name: Optional[str] = None, force: bool = False) -> logging.Logger:
    """
    Set up logging with optional JSON formatting and file rotation.

    Child loggers created with ``logging.getLogger(__name__)`` inside the
    package inherit these handlers.

    Args:
        name: Logger name (defaults to 'circle_lab')
        force: Drop existing handlers and rebuild from current settings

    Returns:
        Configured logger instance
    """
    settings = get_settings()
    logger = logging.getLogger(name or ROOT_LOGGER_NAME)

    if logger.handlers and not force:
        return logger
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    for existing in list(logger.filters):
        logger.removeFilter(existing)

    logger.setLevel(getattr(logging, settings.log_level.upper(), logging.INFO))

    # Diagnostics go to stderr so stdout stays clean for command summaries
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG)

    json_formatter = jsonlogger.JsonFormatter(
        "%(asctime)s %(levelname)s %(name)s %(message)s",
        rename_fields={
            "levelname": "level",
            "asctime": "timestamp",
        },
    )
    if settings.log_json_format:
        console_handler.setFormatter(json_formatter)
    else:
        console_handler.setFormatter(
            logging.Formatter(
                "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
        )
    logger.addHandler(console_handler)

    if settings.log_to_file:
        log_path = Path(settings.log_file_path)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = RotatingFileHandler(
            filename=str(log_path),
            maxBytes=settings.log_max_bytes,
            backupCount=settings.log_backup_count,
            encoding="utf-8",
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(json_formatter)
        logger.addHandler(file_handler)

    logger.addFilter(ContextFilter(settings.app_name, settings.app_version))
    logger.propagate = False

    return logger


# Global logger instance
logger = setup_logging()


def log_operation(operation: str, **params):
    """Log the start of a laboratory operation with its parameters."""
    logger.info(
        f"Operation: {operation}",
        extra={"event_type": "operation", "operation": operation, **params},
    )


def log_error(error: Exception, context: Optional[dict] = None):
    """Log error with context and stack trace."""
    logger.error(
        f"Error: {error}",
        exc_info=True,
        extra={
            "event_type": "error",
            "error_type": type(error).__name__,
            "error_message": str(error),
            **(context or {}),
        },
    )


def log_performance(operation: str, duration_ms: float, **kwargs):
    """Log performance metrics."""
    logger.info(
        f"Performance: {operation}",
        extra={
            "event_type": "performance",
            "operation": operation,
            "duration_ms": duration_ms,
            **kwargs,
        },
    )
