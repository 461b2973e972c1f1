import logging
import logging.config
import sys
from pathlib import Path
from typing import Optional

import structlog
import yaml


class TrialContextFilter(logging.Filter):
    """Filter to add the trial index to log records."""

    def filter(self, record: logging.LogRecord) -> bool:
        trial = getattr(record, "trial", None)
        record.trial = trial if trial is not None else "N/A"
        return True


def setup_logging(
    config_path: Optional[Path] = None,
    environment: str = "development",
    log_level: str = "INFO",
) -> None:
    """
    Configure structured logging for the library and the CLI.

    Everything is written to stderr: stdout carries reports and emitted
    identities only.

    Args:
        config_path: Path to logging configuration YAML file
        environment: Deployment environment
        log_level: Minimum log level
    """
    level = getattr(logging, log_level.upper())

    if config_path and config_path.exists():
        with open(config_path) as f:
            logging_config = yaml.safe_load(f)
        logging.config.dictConfig(logging_config)
    else:
        root_logger = logging.getLogger()
        root_logger.setLevel(level)
        root_logger.handlers.clear()

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(
            logging.Formatter("%(asctime)s [%(levelname)s] %(name)s:%(funcName)s:%(lineno)d - %(message)s")
        )
        root_logger.addHandler(console_handler)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            structlog.dev.ConsoleRenderer() if environment == "development"
                else structlog.processors.JSONRenderer(sort_keys=True)
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=_stderr_logger,
        cache_logger_on_first_use=False,
    )

    configure_library_loggers()


def _stderr_logger(*args: object) -> structlog.PrintLogger:
    # sys.stderr is looked up when a logger is bound, not at setup time
    return structlog.PrintLogger(file=sys.stderr)


def configure_library_loggers() -> None:
    """Configure logging levels for third-party libraries."""
    library_log_levels = {
        "sympy": "WARNING",
        "hypothesis": "WARNING",
    }

    for logger_name, level in library_log_levels.items():
        logging.getLogger(logger_name).setLevel(getattr(logging, level))


class LoggerMixin:
    """Mixin class to add logger to any class."""

    @property
    def logger(self) -> structlog.stdlib.BoundLogger:
        """Get logger for this class."""
        return structlog.get_logger(self.__class__.__name__)


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a named logger."""
    return structlog.get_logger(name)
