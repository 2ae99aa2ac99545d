"""Core configuration, exceptions and logging."""

from lumpvol.core.config import Settings, get_settings
from lumpvol.core.exceptions import LumpVolException
from lumpvol.core.logging import configure_logging, get_logger

__all__ = [
    "LumpVolException",
    "Settings",
    "configure_logging",
    "get_logger",
    "get_settings",
]
