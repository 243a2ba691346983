"""
Structured JSON Logger for the Reeb network diagnostics toolkit

This module provides the structured logging used by every stage of the
pipeline. Records are rendered as JSON lines by python-json-logger and go
to standard error, so stage counts never mix with command output.
"""

import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional

try:
    from pythonjsonlogger.json import JsonFormatter
except ImportError:  # python-json-logger < 3.1
    from pythonjsonlogger.jsonlogger import JsonFormatter


LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s %(module)s %(funcName)s %(lineno)d"

RESERVED_ATTRS = frozenset(vars(logging.makeLogRecord({}))) | {"message", "asctime"}


def _build_formatter() -> logging.Formatter:
    """JSON formatter with the field names used across the toolkit"""
    return JsonFormatter(
        LOG_FORMAT,
        rename_fields={
            "asctime": "timestamp",
            "levelname": "level",
            "name": "logger",
            "funcName": "function",
            "lineno": "line",
        },
    )


class StructuredLogger:
    """
    Structured logger with JSON output

    Usage:
        logger = StructuredLogger("reebnet.splitter")
        logger.info("Splitting finished", extra={"finalized_sets": 247})
        logger.error("Stage failed", extra={"stage": "gtda_split"}, exc_info=True)
    """

    def __init__(
        self,
        name: str,
        log_level: str = "INFO",
        log_file: Optional[str] = None,
        console_output: bool = True
    ):
        """
        Initialize structured logger

        Args:
            name: Logger name (typically the module name)
            log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
            log_file: Path to log file (optional)
            console_output: Whether to write records to standard error
        """
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, log_level.upper(), logging.INFO))
        self.logger.handlers = []
        self.logger.propagate = False

        formatter = _build_formatter()

        if console_output:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setFormatter(formatter)
            self.logger.addHandler(console_handler)

        if log_file:
            log_path = Path(log_file)
            log_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_path)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

    def _log(self, level: int, message: str, extra: Optional[Dict[str, Any]] = None, exc_info: bool = False):
        # LogRecord attributes cannot be overwritten through extra
        fields = {(f"{key}_" if key in RESERVED_ATTRS else key): value for key, value in (extra or {}).items()}
        # stacklevel 3 points module/function/line at the caller of info()/error()
        self.logger.log(level, message, extra=fields, exc_info=exc_info, stacklevel=3)

    def debug(self, message: str, extra: Optional[Dict[str, Any]] = None):
        """Log debug message"""
        self._log(logging.DEBUG, message, extra)

    def info(self, message: str, extra: Optional[Dict[str, Any]] = None):
        """Log info message"""
        self._log(logging.INFO, message, extra)

    def warning(self, message: str, extra: Optional[Dict[str, Any]] = None):
        """Log warning message"""
        self._log(logging.WARNING, message, extra)

    def error(self, message: str, extra: Optional[Dict[str, Any]] = None, exc_info: bool = False):
        """Log error message"""
        self._log(logging.ERROR, message, extra, exc_info)

    def critical(self, message: str, extra: Optional[Dict[str, Any]] = None, exc_info: bool = False):
        """Log critical message"""
        self._log(logging.CRITICAL, message, extra, exc_info)

    def exception(self, message: str, extra: Optional[Dict[str, Any]] = None):
        """Log exception with traceback"""
        self._log(logging.ERROR, message, extra, exc_info=True)


def get_logger(
    name: str,
    log_level: Optional[str] = None,
    log_file: Optional[str] = None
) -> StructuredLogger:
    """
    Factory function to create a structured logger

    Args:
        name: Logger name
        log_level: Log level (defaults to LOG_LEVEL or INFO)
        log_file: Log file path (defaults to LOG_FILE; no file when unset)

    Returns:
        StructuredLogger instance
    """
    if log_level is None:
        log_level = os.getenv("LOG_LEVEL", "INFO")

    if log_file is None:
        log_file = os.getenv("LOG_FILE") or None

    return StructuredLogger(name, log_level, log_file)
