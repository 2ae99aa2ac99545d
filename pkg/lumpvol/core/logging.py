"""Structured logging setup."""

import logging
import sys
from typing import Any, Optional

import structlog

from lumpvol.core.config import get_settings

_configured = False


def _stderr_logger(*args: Any) -> structlog.PrintLogger:
    """A PrintLogger on whatever sys.stderr is at call time."""
    return structlog.PrintLogger(file=sys.stderr)


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """Configure structlog once for the process; later calls reconfigure."""
    global _configured
    settings = get_settings()
    level_name = (level or settings.LOG_LEVEL).upper()
    renderer: Any
    if (fmt or settings.LOG_FORMAT) == "json":
        renderer = structlog.processors.JSONRenderer(sort_keys=True)
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.getLevelName(level_name)
        ),
        logger_factory=_stderr_logger,
        cache_logger_on_first_use=False,
    )
    _configured = True


def get_logger(name: str) -> Any:
    """Return a bound structlog logger for a module."""
    if not _configured:
        configure_logging()
    return structlog.get_logger(name)
