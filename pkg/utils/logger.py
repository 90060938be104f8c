"""
Logging configuration and utilities.
"""

import logging
import sys
from typing import Optional
from config import config


def setup_logging(level: Optional[str] = None):
    """
    Setup logging configuration.

    Reports go to stdout, so the console handler writes to stderr.

    Args:
        level: Overrides the configured level (e.g. "INFO" for --verbose)
    """
    level_name = (level or config.logging.level).upper()
    log_level = getattr(logging, level_name, logging.WARNING)
    log_file = config.logging.log_file

    # Create formatter
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    # Console handler
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)

    # Root logger
    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
    root_logger.addHandler(console_handler)

    # File handler
    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(log_level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    # numpy and yaml are quiet already; asyncio is chatty at DEBUG
    logging.getLogger("asyncio").setLevel(logging.WARNING)

    logging.info("Logging initialized")
    logging.info(f"Log level: {level_name}")
    logging.info(f"Log file: {log_file or '(none)'}")


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance."""
    return logging.getLogger(name)
