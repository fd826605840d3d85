"""
Logging for the library and the command line.

Console output goes to stderr so that stdout carries nothing but reports.
Library modules share one :class:`Logger` per name through :func:`get_logger`.
"""

import logging
import sys
from pathlib import Path
from typing import Dict, Optional

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class Logger:
    """
    Thin wrapper around a non-propagating :class:`logging.Logger` with a
    stderr handler and optional log files.
    """

    def __init__(
        self,
        name: str = "symplectic",
        level: int = logging.WARNING,
        log_file: Optional[str] = None,
    ):
        """
        Args:
            name: Logger name, ``symplectic.<module>`` by convention
            level: Initial level for the logger and its handlers
            log_file: Optional file receiving the same records
        """
        self.name = name
        self.level = level
        self.log_file = log_file
        self.formatter = logging.Formatter(LOG_FORMAT)

        self.logger = logging.getLogger(name)
        self.logger.setLevel(level)
        self.logger.propagate = False
        self.logger.handlers.clear()
        self._attach(logging.StreamHandler(sys.stderr))
        if log_file:
            self.add_file_handler(log_file)

    def _attach(self, handler: logging.Handler) -> None:
        handler.setLevel(self.level)
        handler.setFormatter(self.formatter)
        self.logger.addHandler(handler)

    def add_file_handler(self, log_file: str) -> None:
        """Also write records to ``log_file``, creating its directory."""
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.log_file = str(path)
        self._attach(logging.FileHandler(path, encoding="utf-8"))

    def debug(self, message: str) -> None:
        self.logger.debug(message)

    def info(self, message: str) -> None:
        self.logger.info(message)

    def warning(self, message: str) -> None:
        self.logger.warning(message)

    def error(self, message: str) -> None:
        self.logger.error(message)

    def set_level(self, level: int) -> None:
        self.level = level
        self.logger.setLevel(level)
        for handler in self.logger.handlers:
            handler.setLevel(level)

    def get_logger(self) -> logging.Logger:
        return self.logger


_LOGGERS: Dict[str, Logger] = {}


def get_logger(name: str) -> Logger:
    """Return the shared :class:`Logger` for ``name``, creating it on first use."""
    if name not in _LOGGERS:
        _LOGGERS[name] = Logger(name=name)
    return _LOGGERS[name]


def set_global_level(level: int) -> None:
    """Apply ``level`` to every logger handed out by :func:`get_logger`."""
    for logger in _LOGGERS.values():
        logger.set_level(level)


def add_global_file(log_file: str) -> None:
    """Send the records of every shared logger to ``log_file`` as well."""
    for logger in _LOGGERS.values():
        if logger.log_file is None:
            logger.add_file_handler(log_file)
