"""
Settings shared by the library and the ``symplectic-ext`` command.

Values are read from an optional JSON file and then from ``SYMPL_EXT_*``
environment variables, which win. ``SYMPL_EXT_TOL=1e-8`` becomes the key
``tol``; ``SYMPL_EXT_LOG_FILE`` becomes ``log_file``.
"""

import json
import os
from typing import Any, Dict, Optional

from .exceptions import ConfigurationError

ENV_PREFIX = "SYMPL_EXT_"
DEFAULT_TOLERANCE = 1e-10


class Config:
    """Key/value settings with file and environment layers."""

    def __init__(self, source: Optional[str] = None):
        """
        Args:
            source: JSON file to read first; a missing path is ignored here
                and reported by the caller
        """
        self.values: Dict[str, Any] = {}
        self.source = source
        if source and os.path.exists(source):
            self.read_file(source)
        self.read_env()

    def read_file(self, path: str) -> None:
        """
        Merge the JSON object stored at ``path``.

        Raises:
            ConfigurationError: If the file is unreadable, not JSON or not an object
        """
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"Cannot read config file {path}: {exc}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config file {path} must hold a JSON object")
        self.values.update(data)

    def read_env(self) -> None:
        prefix_len = len(ENV_PREFIX)
        self.values.update(
            {
                name[prefix_len:].lower(): raw
                for name, raw in os.environ.items()
                if name.startswith(ENV_PREFIX)
            }
        )

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    def set(self, key: str, value: Any) -> None:
        self.values[key] = value

    def get_float(self, key: str, default: float) -> float:
        """
        ``key`` as a float.

        Raises:
            ConfigurationError: If the stored value is not a number
        """
        raw = self.values.get(key, default)
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ConfigurationError(f"Config value {key}={raw!r} is not a number")

    def tolerance(self) -> float:
        """Global absolute tolerance (``tol`` key, 1e-10 unless overridden)."""
        tol = self.get_float("tol", DEFAULT_TOLERANCE)
        if not tol > 0.0:
            raise ConfigurationError(f"Tolerance must be positive, got {tol}")
        return tol

    def write_file(self, path: Optional[str] = None) -> None:
        """Store the current values as JSON at ``path`` (default: the source file)."""
        target = path or self.source
        if not target:
            raise ConfigurationError("No config file path given")
        with open(target, "w", encoding="utf-8") as handle:
            json.dump(self.values, handle, indent=2, sort_keys=True)

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def __setitem__(self, key: str, value: Any) -> None:
        self.values[key] = value

    def __contains__(self, key: object) -> bool:
        return key in self.values


def default_tolerance() -> float:
    """Effective global tolerance, re-read from the environment on every call."""
    return Config().tolerance()


def resolve_tolerance(tol: Optional[float]) -> float:
    """Return ``tol`` unless it is None, in which case the global default."""
    return default_tolerance() if tol is None else float(tol)
