"""Small shared helpers."""

from __future__ import annotations

import math

import numpy as np


class GridLookupError(ValueError):
    """A required event time is missing from the simulation grid."""


def grid_index(grid: np.ndarray, t: float, what: str = "time") -> int:
    """Index of t on an ascending grid, tolerant to float noise below 1e-10."""
    j = int(np.searchsorted(grid, t))
    for k in (j - 1, j):
        if 0 <= k < len(grid) and math.isclose(grid[k], t, rel_tol=0.0, abs_tol=1e-10):
            return k
    raise GridLookupError(f"{what} {t} is not on the simulation grid")
