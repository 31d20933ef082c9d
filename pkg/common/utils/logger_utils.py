"""Logger utility following DRY principle."""

import logging
import os
from typing import Optional

from common.config.constants import AppConstants


class LoggerUtils:
    """Centralized logger creation and configuration."""

    @staticmethod
    def setup_logger(
        name: str,
        level: int = logging.INFO,
        log_format: Optional[str] = None,
        date_format: Optional[str] = None,
    ) -> logging.Logger:
        """
        Create and configure a logger.

        Args:
            name: Logger name
            level: Logging level
            log_format: Custom log format (optional)
            date_format: Custom date format (optional)

        Returns:
            Configured logger instance
        """
        logger = logging.getLogger(name)
        logger.setLevel(level)

        # Remove existing handlers to avoid duplicates
        for handler in logger.handlers[:]:
            logger.removeHandler(handler)

        # Diagnostics go to stderr; stdout is reserved for reports
        console_handler = logging.StreamHandler()
        console_handler.setLevel(level)

        formatter = logging.Formatter(
            log_format or AppConstants.LOG_FORMAT,
            datefmt=date_format or AppConstants.LOG_DATE_FORMAT,
        )
        console_handler.setFormatter(formatter)

        logger.addHandler(console_handler)

        return logger

    @staticmethod
    def level_from_env(default: str = "info") -> str:
        """
        Read the log level name from STLDEC_LOG.

        Args:
            default: Level name used when the variable is unset or unknown

        Returns:
            One of "error", "info", "debug"
        """
        value = os.getenv(AppConstants.ENV_LOG_LEVEL, default).strip().lower()
        if value not in AppConstants.LOG_LEVELS:
            return default
        return value

    @staticmethod
    def configure_package_loggers(level: int):
        """Route the layered packages' module loggers through one handler."""
        for package in ("service", "infrastructure", "presentation"):
            LoggerUtils.setup_logger(package, level)

    @staticmethod
    def suppress_noisy_loggers():
        """Suppress logging from noisy third-party libraries."""
        noisy_loggers = ["langgraph", "httpx", "httpcore", "asyncio"]
        for logger_name in noisy_loggers:
            logging.getLogger(logger_name).setLevel(logging.CRITICAL)
