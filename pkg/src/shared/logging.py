"""
Structured logging with run IDs across components.

Provides a consistent logging setup for every component so that
the log lines of one experiment run can be traced back to its artifacts.
"""

import logging
import uuid


def setup_logging(component: str, level: str = "INFO") -> logging.Logger:
    """
    Configure structured logging for a component.

    Args:
        component: Name of the component (used as logger prefix).
        level: Log level string (e.g. 'INFO', 'DEBUG').

    Returns:
        Configured logger instance.
    """
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s  %(name)-30s  %(levelname)-7s  %(message)s",
    )
    return logging.getLogger(component)


def set_log_level(level: str) -> None:
    """Apply ``level`` to the root logger, overriding the first ``setup_logging`` call."""
    logging.getLogger().setLevel(getattr(logging, level.upper(), logging.INFO))


def generate_run_id() -> str:
    """Generate a unique ID correlating one run's log lines and artifacts."""
    return uuid.uuid4().hex[:12]
