"""
Common base for configured, logging components (the application object
and the spec-file processor).
"""

from abc import ABC, abstractmethod
from typing import Any, Optional

from .config import Config
from .logger import Logger, get_logger


class BaseClass(ABC):
    """
    Owns a :class:`Config` and a shared :class:`Logger`; subclasses
    implement the ``initialize``/``cleanup`` lifecycle.
    """

    def __init__(
        self,
        config: Optional[Config] = None,
        logger: Optional[Logger] = None,
        name: Optional[str] = None,
    ):
        self.name = name or self.__class__.__name__
        self.config = config or Config()
        self.logger = logger or get_logger(f"symplectic.{self.name}")
        self.logger.debug(f"Initialized {self.name}")

    @abstractmethod
    def initialize(self) -> bool:
        """Prepare the component; True on success."""

    @abstractmethod
    def cleanup(self) -> None:
        """Release whatever ``initialize`` acquired."""

    def get_config(self, key: str, default: Any = None) -> Any:
        return self.config.get(key, default)

    def set_config(self, key: str, value: Any) -> None:
        self.config.set(key, value)

    @property
    def tolerance(self) -> float:
        """Tolerance taken from this instance's configuration."""
        return self.config.tolerance()

    def _tagged(self, message: str) -> str:
        return f"[{self.name}] {message}"

    def log_debug(self, message: str) -> None:
        self.logger.debug(self._tagged(message))

    def log_info(self, message: str) -> None:
        self.logger.info(self._tagged(message))

    def log_warning(self, message: str) -> None:
        self.logger.warning(self._tagged(message))

    def log_error(self, message: str) -> None:
        self.logger.error(self._tagged(message))

    def __repr__(self) -> str:
        name = self.__class__.__name__
        return f"{name}(name={self.name!r}, tol={self.tolerance:.1e})"
