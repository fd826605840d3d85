"""
Shared fixtures for the test suite.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from src.symplectic.samples import (  # noqa: E402
    random_system,
    sl_inverse_square_weight,
    sl_unit,
)


@pytest.fixture
def rng():
    """Seeded generator so random instances are reproducible."""
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_sl():
    """p = -1, q = 0, w = 1 on [0, 4]."""
    return sl_unit(4)


@pytest.fixture
def inverse_square_sl():
    """p = -1, q = 0, w_k = 1/(k+1)^2 on an unbounded interval."""
    return sl_inverse_square_weight()


@pytest.fixture
def random_pair_system(rng):
    """A random complex system with n = 1 and N = 6."""
    return random_system(1, 6, rng, real=False)


@pytest.fixture(autouse=True)
def _default_tolerance(monkeypatch):
    monkeypatch.delenv("SYMPL_EXT_TOL", raising=False)
