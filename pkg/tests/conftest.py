"""Shared helpers for building random forecasts in tests."""

from __future__ import annotations

import numpy as np

from probeval import DiscreteForecast


def random_discrete(rng, max_support=50, scale=1.0) -> DiscreteForecast:
    """Random point-mass forecast with strictly ascending support."""
    size = int(rng.integers(1, max_support + 1))
    points = np.sort(rng.uniform(-1.0, 1.0, size=size)) * scale
    while points.size > 1 and np.any(np.diff(points) <= 0):
        points = np.sort(rng.uniform(-1.0, 1.0, size=size)) * scale
    weights = rng.exponential(size=size) + 1e-3
    return DiscreteForecast(points, weights / weights.sum())
