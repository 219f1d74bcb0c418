# app/utils/logging_config.py
"""
Logging setup for the simulator CLI and the sweep workers
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import List, Optional

from pythonjsonlogger.json import JsonFormatter

from app.config.settings import settings

# Third-party loggers that only add noise to a sweep
QUIET_LOGGERS = ("joblib", "numexpr", "matplotlib")


def _formatter(log_format: str, json_logs: bool) -> logging.Formatter:
    if json_logs:
        return JsonFormatter(log_format)
    return logging.Formatter(log_format)


def _handlers(log_file: Optional[str]) -> List[logging.Handler]:
    # stdout carries results only
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5
        ))
    return handlers


def setup_logging(
    log_level: Optional[str] = None,
    log_file: Optional[str] = None,
    log_format: Optional[str] = None,
    json_logs: Optional[bool] = None
) -> None:
    """
    Configure the root logger once per process.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Also write to this rotating file (optional)
        log_format: Record format (optional)
        json_logs: One JSON object per record instead of plain text
    """
    level = getattr(logging, (log_level or settings.LOG_LEVEL).upper())
    formatter = _formatter(
        log_format or settings.LOG_FORMAT,
        settings.LOG_JSON if json_logs is None else json_logs,
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()
    for handler in _handlers(log_file or settings.LOG_FILE):
        handler.setLevel(level)
        handler.setFormatter(formatter)
        root_logger.addHandler(handler)

    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(max(level, logging.WARNING))


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance with the specified name.

    Args:
        name: Logger name, e.g. ``__name__`` or ``scheduler.cs``

    Returns:
        Logger configured through the root handlers
    """
    return logging.getLogger(name)
