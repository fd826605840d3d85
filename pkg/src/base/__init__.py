"""
Base classes and utilities for the project.
"""

from .config import Config, default_tolerance, resolve_tolerance
from .logger import Logger, get_logger
from .base_class import BaseClass
from .data_processor import DataProcessor
from .exceptions import (
    SymplecticError,
    ConfigurationError,
    ShapeMismatchError,
    IndexOutOfRangeError,
    InvalidSystemError,
    PreconditionError,
    AtkinsonFailureError,
    DegenerateRelationError,
    ConvergenceError,
    SpecFileError,
)

__all__ = [
    "Config",
    "default_tolerance",
    "resolve_tolerance",
    "Logger",
    "get_logger",
    "BaseClass",
    "DataProcessor",
    "SymplecticError",
    "ConfigurationError",
    "ShapeMismatchError",
    "IndexOutOfRangeError",
    "InvalidSystemError",
    "PreconditionError",
    "AtkinsonFailureError",
    "DegenerateRelationError",
    "ConvergenceError",
    "SpecFileError",
]
