"""Predictive distributions for discretized regression targets.

Models in this domain emit one of three raw forms: a histogram PMF over a
bin grid, a dense set of quantiles, or an ensemble of samples.  Scoring
happens on a canonical point-mass form, :class:`DiscreteForecast`; the
conversions below collapse each raw form onto it.  Histograms collapse to
their bin centers, which makes CRPS and the beta=1 energy score coincide
exactly instead of approximately.

All forecast types are immutable after construction and every operation
here is pure, so instances are safe to share between workers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidLevelError, NotConvertibleError, QuantileCrossingWarning

# Tolerance on total probability mass for validation and conversions.
MASS_TOL = 1e-9


def _finite_1d(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty one-dimensional sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class HistogramForecast:
    """Bin-edge plus bin-mass predictive distribution.

    ``edges`` holds the K+1 strictly ascending bin boundaries in target
    units, ``probs`` the K nonnegative bin masses.  Masses are normalized
    to sum to one on construction.
    """

    edges: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        edges = _finite_1d(self.edges, "edges")
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a nonempty one-dimensional sequence")
        if edges.size != probs.size + 1:
            raise ValueError("len(edges) must equal len(probs) + 1")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("probs must be finite and nonnegative")
        total = float(probs.sum())
        if total <= 0:
            raise ValueError("probs must carry positive total mass")
        probs = probs / total
        probs.flags.writeable = False
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "probs", probs)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def bin_index(self, y: float) -> int:
        """Index of the bin containing ``y``.

        Bins are left-closed and right-open, except the last bin which is
        closed on both sides.  Returns -1 when ``y`` lies outside the grid.
        """
        edges = self.edges
        if y < edges[0] or y > edges[-1]:
            return -1
        k = int(np.searchsorted(edges, y, side="right")) - 1
        return min(k, self.probs.size - 1)


@dataclass(frozen=True, eq=False)
class QuantileForecast:
    """Quantile-function forecast: values at strictly ascending levels.

    Crossing (non-monotone) values are repaired by sorting them ascending
    before any use; the repair is recorded on ``repaired`` and surfaced as
    a :class:`QuantileCrossingWarning`.
    """

    levels: np.ndarray
    values: np.ndarray
    repaired: bool = field(init=False, default=False)

    def __post_init__(self):
        levels = _finite_1d(self.levels, "levels")
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must contain only finite values")
        if levels.size != values.size:
            raise ValueError("levels and values must have the same length")
        if np.any(np.diff(levels) <= 0):
            raise ValueError("levels must be strictly increasing")
        if levels[0] <= 0.0 or levels[-1] >= 1.0:
            raise InvalidLevelError("quantile levels must lie strictly inside (0, 1)")
        crossings = int(np.sum(np.diff(values) < 0))
        if crossings:
            warnings.warn(
                f"{crossings} quantile crossing(s) repaired by monotone rearrangement",
                QuantileCrossingWarning,
                stacklevel=2,
            )
            values = np.sort(values)
            object.__setattr__(self, "repaired", True)
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class SampleForecast:
    """Ensemble forecast: n >= 1 finite sample values."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _finite_1d(self.values, "values"))


@dataclass(frozen=True, eq=False)
class DiscreteForecast:
    """Point-mass distribution: strictly ascending support, positive masses.

    This is the canonical scoring form.  The CDF is the right-continuous
    step function P(X <= x); quantiles use the generalized inverse (the
    smallest support point at which the CDF reaches the requested level).
    """

    points: np.ndarray
    probs: np.ndarray
    _cum0: np.ndarray = field(init=False, repr=False, default=None)

    def __post_init__(self):
        points = _finite_1d(self.points, "points")
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1:
            raise ValueError("probs must be one-dimensional")
        if probs.size != points.size:
            raise ValueError("points and probs must have the same length")
        if np.any(np.diff(points) <= 0):
            raise ValueError("points must be strictly increasing")
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0):
            raise ValueError("probs must be finite and strictly positive")
        total = float(probs.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"probs must sum to 1 within {MASS_TOL}, got {total!r}")
        # Leading zero plus cumulative masses; the CDF is exactly 1 at and
        # beyond the last support point.
        cum0 = np.concatenate(([0.0], np.cumsum(probs)))
        cum0[-1] = 1.0
        probs = probs.copy()
        probs.flags.writeable = False
        cum0.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "_cum0", cum0)

    def cdf(self, x):
        """Right-continuous step CDF; accepts a scalar or an array."""
        x_arr = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.points, x_arr, side="right")
        out = self._cum0[idx]
        return float(out) if x_arr.ndim == 0 else out

    def quantile(self, tau: float) -> float:
        """Generalized inverse CDF: the smallest point with cdf >= tau."""
        if not 0.0 < tau < 1.0:
            raise InvalidLevelError(f"quantile level must be in (0, 1), got {tau}")
        idx = int(np.searchsorted(self._cum0[1:], tau, side="left"))
        return float(self.points[min(idx, self.points.size - 1)])

    def median(self) -> float:
        return self.quantile(0.5)

    def mean(self) -> float:
        return float(np.dot(self.probs, self.points))

    def variance(self) -> float:
        centered = self.points - self.mean()
        # Clamp against negative rounding for near-degenerate supports.
        return max(float(np.dot(self.probs, centered * centered)), 0.0)

    def std(self) -> float:
        return math.sqrt(self.variance())


Forecast = HistogramForecast | QuantileForecast | SampleForecast | DiscreteForecast


def histogram_to_discrete(h: HistogramForecast) -> DiscreteForecast:
    """Collapse a histogram to point masses at the centers of nonempty bins."""
    centers = 0.5 * (h.edges[:-1] + h.edges[1:])
    keep = h.probs > 0
    return DiscreteForecast(centers[keep], h.probs[keep])


def quantiles_to_discrete(q: QuantileForecast) -> DiscreteForecast:
    """Turn quantiles into point masses via the midpoint partition of (0, 1).

    Each value receives the probability mass between the midpoints of its
    neighboring levels (the outer values absorb the open tails), so all
    mass stays on observed values.  Equal values are merged.
    """
    levels, values = q.levels, q.values
    bounds = np.concatenate(([0.0], 0.5 * (levels[:-1] + levels[1:]), [1.0]))
    probs = np.diff(bounds)
    points, inverse = np.unique(values, return_inverse=True)
    merged = np.zeros(points.size)
    np.add.at(merged, inverse, probs)
    return DiscreteForecast(points, merged)


def _spread_equal_runs(values: np.ndarray) -> np.ndarray:
    """Strictly increasing copy of sorted ``values``.

    Runs of equal values are spread symmetrically around the shared value
    by eps_w = max(1e-9, 1e-9 * |value|) per step, keeping zero-width bins
    finite without shifting their location.
    """
    edges = np.asarray(values, dtype=float).copy()
    i = 0
    n = edges.size
    while i < n:
        j = i
        while j + 1 < n and edges[j + 1] == edges[i]:
            j += 1
        if j > i:
            v = edges[i]
            eps = max(1e-9, 1e-9 * abs(v))
            edges[i : j + 1] = v + eps * np.linspace(-(j - i) / 2, (j - i) / 2, j - i + 1)
        i = j + 1
    # Guard for pathological near-ties after spreading.
    for k in range(1, n):
        if edges[k] <= edges[k - 1]:
            edges[k] = np.nextafter(edges[k - 1], np.inf)
    return edges


def quantiles_to_histogram(q: QuantileForecast) -> HistogramForecast:
    """Use quantile values as bin edges and level gaps as bin masses.

    The mass in the two open tails is discarded and the remaining masses
    renormalized uniformly.  Needs at least two levels to form a bin.
    """
    if q.levels.size < 2:
        raise NotConvertibleError("at least two quantile levels are needed to form bins")
    edges = _spread_equal_runs(q.values)
    return HistogramForecast(edges, np.diff(q.levels))


def samples_to_discrete(s: SampleForecast) -> DiscreteForecast:
    """Empirical distribution of the samples: distinct values, frequencies."""
    points, counts = np.unique(s.values, return_counts=True)
    return DiscreteForecast(points, counts / s.values.size)


def to_discrete(forecast: Forecast) -> DiscreteForecast:
    """Convert any forecast form to the canonical point-mass form."""
    if isinstance(forecast, DiscreteForecast):
        return forecast
    if isinstance(forecast, HistogramForecast):
        return histogram_to_discrete(forecast)
    if isinstance(forecast, QuantileForecast):
        return quantiles_to_discrete(forecast)
    if isinstance(forecast, SampleForecast):
        return samples_to_discrete(forecast)
    raise TypeError(f"not a forecast: {type(forecast).__name__}")


def to_histogram(forecast: Forecast) -> HistogramForecast:
    """Convert to histogram form where a density exists.

    Sample and point-mass forecasts have no bin widths and therefore no
    density, so they are not convertible.
    """
    if isinstance(forecast, HistogramForecast):
        return forecast
    if isinstance(forecast, QuantileForecast):
        return quantiles_to_histogram(forecast)
    if isinstance(forecast, (SampleForecast, DiscreteForecast)):
        raise NotConvertibleError(
            f"{type(forecast).__name__} has no density; histogram scores are undefined"
        )
    raise TypeError(f"not a forecast: {type(forecast).__name__}")
