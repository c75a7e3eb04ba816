"""Batch-level calibration and concentration diagnostics.

Sharpness is the average predicted standard deviation, dispersion the
population standard deviation of the per-instance standard deviations,
and coverage the fraction of observations inside central prediction
intervals read off the forecast CDFs.  None of these is a proper scoring
rule; they complement the scores in :mod:`probeval.scoring`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyBatchError, InvalidLevelError
from .forecast import DiscreteForecast


@dataclass(frozen=True)
class CalibrationReport:
    """Sharpness and dispersion in target units, coverage per nominal level."""

    sharpness: float
    dispersion: float
    coverage: dict[float, float]


def _stds(forecasts: Iterable[DiscreteForecast]) -> np.ndarray:
    stds = np.array([f.std() for f in forecasts])
    if stds.size == 0:
        raise EmptyBatchError("diagnostics need at least one forecast")
    return stds


def sharpness(forecasts: Iterable[DiscreteForecast]) -> float:
    """Mean of the per-instance predictive standard deviations."""
    return float(np.mean(_stds(forecasts)))


def dispersion(forecasts: Iterable[DiscreteForecast]) -> float:
    """Population standard deviation of the per-instance standard deviations.

    The 1/N normalization makes a single-forecast batch well defined
    (dispersion zero).
    """
    return float(np.std(_stds(forecasts)))


def in_central_interval(f: DiscreteForecast, y: float, level: float) -> bool:
    """Whether y falls inside the central ``level`` interval, bounds inclusive."""
    if not 0.0 < level < 1.0:
        raise InvalidLevelError(f"coverage level must be in (0, 1), got {level}")
    alpha = 1.0 - level
    return f.quantile(alpha / 2.0) <= y <= f.quantile(1.0 - alpha / 2.0)


def coverage(batch: Sequence[tuple[DiscreteForecast, float]], level: float) -> float:
    """Empirical coverage of the central ``level`` prediction intervals.

    Interval bounds come from the generalized inverse CDF and are
    inclusive; atomic CDFs can therefore over-cover the nominal level,
    which is reported as observed rather than corrected.
    """
    if not 0.0 < level < 1.0:
        raise InvalidLevelError(f"coverage level must be in (0, 1), got {level}")
    batch = list(batch)
    if not batch:
        raise EmptyBatchError("coverage needs at least one (forecast, observation) pair")
    hits = sum(in_central_interval(f, y, level) for f, y in batch)
    return hits / len(batch)


def calibration_report(
    batch: Sequence[tuple[DiscreteForecast, float]],
    levels: Sequence[float] = (0.90, 0.95),
) -> CalibrationReport:
    """Sharpness, dispersion, and coverage at the requested levels."""
    batch = list(batch)
    forecasts = [f for f, _ in batch]
    return CalibrationReport(
        sharpness=sharpness(forecasts),
        dispersion=dispersion(forecasts),
        coverage={level: coverage(batch, level) for level in levels},
    )
