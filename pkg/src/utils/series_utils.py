"""
Window-doubling growth test for partial sums of infinite series.

Divergence cannot be decided from finitely many terms; every verdict
produced here is a heuristic and is labelled as such in reports.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

HEURISTIC_LABEL = "heuristic (window-doubling growth test)"
# Increment ratio at or below which a sequence of partial sums is taken as convergent.
CONVERGENT_RATIO = 0.75


@dataclass(frozen=True)
class GrowthVerdict:
    """Outcome of the doubling test on partial sums S(M/4), S(M/2), S(M)."""

    convergent: bool
    partial_sums: tuple
    increment_ratio: float

    @property
    def divergent(self) -> bool:
        return not self.convergent

    def to_dict(self) -> dict:
        return {
            "convergent": self.convergent,
            "partial_sums": list(self.partial_sums),
            "increment_ratio": self.increment_ratio,
            "method": HEURISTIC_LABEL,
        }


class SeriesUtils:
    """Utility class for judging growth of monotone partial-sum sequences."""

    @staticmethod
    def windows(truncation: int, count: int = 3) -> list:
        """
        Doubling checkpoints ending at ``truncation``.

        ``windows(1000)`` gives ``[250, 500, 1000]``; checkpoints never drop
        below zero and stay strictly increasing where possible.
        """
        points = [max(truncation >> shift, 0) for shift in range(count - 1, -1, -1)]
        return points

    @staticmethod
    def judge(
        partial_sums: Sequence[float], growth_threshold: float = 1e-6
    ) -> GrowthVerdict:
        """
        Judge three partial sums taken at doubling windows.

        The sums are taken as convergent when the last increment is at most
        ``growth_threshold`` times the last sum or when the increments shrink
        by the factor :data:`CONVERGENT_RATIO` or better.

        Args:
            partial_sums: ``S(M/4), S(M/2), S(M)``
            growth_threshold: Relative size of a negligible increment

        Returns:
            The verdict with the measured increment ratio
        """
        s1, s2, s3 = (float(s) for s in partial_sums)
        inc1 = s2 - s1
        inc2 = s3 - s2
        if inc1 > 0.0:
            ratio = inc2 / inc1
        else:
            ratio = 0.0 if inc2 <= 0.0 else float("inf")
        negligible = inc2 <= growth_threshold * abs(s3)
        convergent = bool(negligible or ratio <= CONVERGENT_RATIO)
        return GrowthVerdict(convergent, (s1, s2, s3), float(ratio))

    @staticmethod
    def judge_terms(terms: np.ndarray, growth_threshold: float = 1e-6) -> GrowthVerdict:
        """Judge the series whose terms are ``terms[0..M]``."""
        cumulative = np.cumsum(np.asarray(terms, dtype=float))
        last = cumulative.size - 1
        checkpoints = SeriesUtils.windows(last)
        return SeriesUtils.judge([cumulative[k] for k in checkpoints], growth_threshold)
