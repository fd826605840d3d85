"""
Utility functions and classes for the project.
"""

from .linalg_utils import LinalgUtils
from .series_utils import SeriesUtils, GrowthVerdict, HEURISTIC_LABEL

__all__ = [
    "LinalgUtils",
    "SeriesUtils",
    "GrowthVerdict",
    "HEURISTIC_LABEL",
]
