"""Scoring rules and point metrics for discretized predictive forecasts.

Scores on the point-mass form are exact closed-form sums or piecewise
integrals of the step CDF; no Monte Carlo is involved anywhere.  All
metrics are negatively oriented (lower is better) except ``r2``.

    crps(F, y)           integral of (F(x) - 1[x >= y])^2 dx
    crls(F, y)           -integral of log|F(x) + 1[y <= x] - 1| dx, clamped
    energy_score(F,y,b)  E|X - y|^b - 0.5 E|X - X'|^b, b in (0, 2]
    interval_score       (u - l) + (2/a)(l - y)1[y < l] + (2/a)(y - u)1[y > u]
    wcrps(F, y, w)       integral of w((x - loc)/scale) (F(x) - 1[x >= y])^2 dx
    log_score(H, y)      -log(p[k*] / width[k*]), k* the bin containing y
    brier_score(H, y)    sum_k (p[k] - 1[k = k*])^2

The step-CDF integrands are piecewise constant between support points, so
CRPS, CRLS, and wCRPS reduce to finite sums over segments; the wCRPS
weight factor is integrated per segment with the exact Gaussian
antiderivatives (the antiderivative of the normal CDF is z*cdf(z)+pdf(z)).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.special import ndtr

from . import diagnostics
from .errors import (
    ConversionWarning,
    EmptyBatchError,
    InvalidBetaError,
    InvalidLevelError,
    InvalidScaleError,
    NotConvertibleError,
    OutsideSupportError,
    UnknownMetricError,
)
from .forecast import (
    DiscreteForecast,
    HistogramForecast,
    QuantileForecast,
    quantiles_to_histogram,
    to_discrete,
)

if TYPE_CHECKING:  # pragma: no cover
    from .io import ForecastRecord

LOWER_BETTER = "lower_better"
HIGHER_BETTER = "higher_better"

# Clamps keeping the log-based scores finite when a forecast assigns
# (numerically) zero probability to the observed outcome.
EPS_LOG = 1e-12
EPS_DENSITY = 1e-12

ENERGY_BETAS = (0.2, 0.5, 1.0, 1.5, 2.0)
WEIGHT_KINDS = ("left", "right", "center", "unit")

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class MetricSpec:
    """Identity, orientation, and parameters of one metric.

    ``alpha`` is the mass outside a central prediction interval, ``beta``
    the energy-score exponent, ``weight_kind`` selects the wCRPS weight
    and ``weight_loc``/``weight_scale`` its climatological reference.
    """

    name: str
    orientation: str = LOWER_BETTER
    alpha: float | None = None
    beta: float | None = None
    weight_kind: str | None = None
    weight_loc: float | None = None
    weight_scale: float | None = None

    def __post_init__(self):
        if self.orientation not in (LOWER_BETTER, HIGHER_BETTER):
            raise ValueError(f"unknown orientation: {self.orientation!r}")
        if self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise InvalidLevelError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.beta is not None and not 0.0 < self.beta <= 2.0:
            raise InvalidBetaError(f"beta must be in (0, 2], got {self.beta}")
        if self.weight_kind is not None and self.weight_kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind: {self.weight_kind!r}")


def _builtin_specs() -> dict[str, MetricSpec]:
    specs: dict[str, MetricSpec] = {}
    for name in ("mae", "rmse", "crps", "crls", "log_score", "brier_score"):
        specs[name] = MetricSpec(name)
    specs["r2"] = MetricSpec("r2", orientation=HIGHER_BETTER)
    for beta in ENERGY_BETAS:
        specs[f"energy_score_beta_{beta}"] = MetricSpec(
            f"energy_score_beta_{beta}", beta=beta
        )
    for kind in ("left", "right", "center"):
        specs[f"wcrps_{kind}"] = MetricSpec(f"wcrps_{kind}", weight_kind=kind)
    specs["interval_score_90"] = MetricSpec("interval_score_90", alpha=0.10)
    specs["interval_score_95"] = MetricSpec("interval_score_95", alpha=0.05)
    # Calibration diagnostics share the identifier namespace so they can be
    # requested through the same batch interface.
    for name in ("sharpness", "dispersion", "coverage_90", "coverage_95"):
        specs[name] = MetricSpec(name)
    return specs


_REGISTRY = _builtin_specs()

METRIC_NAMES: tuple[str, ...] = tuple(_REGISTRY)


def resolve_metric(name: str) -> MetricSpec:
    """Look up a metric identifier, e.g. ``crps`` or ``wcrps_left``."""
    try:
        return _REGISTRY[name]
    except KeyError:
        valid = ", ".join(METRIC_NAMES)
        raise UnknownMetricError(f"unknown metric {name!r}; valid identifiers: {valid}") from None


def _segments(f: DiscreteForecast, y: float):
    """Breakpoints of the piecewise-constant integrands over support + {y}.

    Returns (left endpoints, widths); outside this window the integrands
    of CRPS/CRLS/wCRPS are identically zero.
    """
    xs = np.unique(np.append(f.points, y))
    return xs[:-1], np.diff(xs)


def crps(f: DiscreteForecast, y: float) -> float:
    """Continuous Ranked Probability Score, exact for point-mass forecasts."""
    left, widths = _segments(f, y)
    if widths.size == 0:
        return 0.0
    diff = f.cdf(left) - (left >= y)
    return float(np.dot(widths, diff * diff))


def crls(f: DiscreteForecast, y: float) -> float:
    """Continuous Ranked Logarithmic Score (exceedance-probability form).

    The integrand -log|F(x) + 1[y <= x] - 1| diverges where the forecast
    puts zero mass on the observed side; the argument is clamped at 1e-12,
    which turns impossible-event observations into large finite penalties
    that grow with the size of the violation.
    """
    left, widths = _segments(f, y)
    if widths.size == 0:
        return 0.0
    arg = np.abs(f.cdf(left) + (left >= y) - 1.0)
    return float(np.dot(widths, -np.log(np.maximum(arg, EPS_LOG))))


def energy_score(f: DiscreteForecast, y: float, beta: float) -> float:
    """beta-energy score via the exact double sum over point masses.

    beta=1 reproduces CRPS; beta=2 collapses to the squared error of the
    forecast mean.  O(J^2) in the support size.
    """
    if not 0.0 < beta <= 2.0:
        raise InvalidBetaError(f"beta must be in (0, 2], got {beta}")
    dist_y = np.abs(f.points - y) ** beta
    cross = np.abs(f.points[:, None] - f.points[None, :]) ** beta
    return float(f.probs @ dist_y - 0.5 * f.probs @ cross @ f.probs)


def interval_score(f: DiscreteForecast, y: float, alpha: float) -> float:
    """Interval score of the central (1 - alpha) prediction interval."""
    if not 0.0 < alpha < 1.0:
        raise InvalidLevelError(f"alpha must be in (0, 1), got {alpha}")
    lower = f.quantile(alpha / 2.0)
    upper = f.quantile(1.0 - alpha / 2.0)
    score = upper - lower
    if y < lower:
        score += (2.0 / alpha) * (lower - y)
    elif y > upper:
        score += (2.0 / alpha) * (y - upper)
    return float(score)


def _norm_pdf(z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * z * z) / _SQRT_2PI


def _weight_integral(kind: str, a: np.ndarray, b: np.ndarray, loc: float, scale: float) -> np.ndarray:
    """Integral of the weight function over target-axis intervals [a, b]."""
    if kind == "unit":
        return b - a
    za = (a - loc) / scale
    zb = (b - loc) / scale
    if kind == "center":
        return scale * (ndtr(zb) - ndtr(za))
    # antiderivative of the normal CDF: z*cdf(z) + pdf(z)
    prim_a = za * ndtr(za) + _norm_pdf(za)
    prim_b = zb * ndtr(zb) + _norm_pdf(zb)
    if kind == "right":
        return scale * (prim_b - prim_a)
    if kind == "left":
        return scale * ((zb - prim_b) - (za - prim_a))
    raise ValueError(f"unknown weight kind: {kind!r}")


def wcrps(f: DiscreteForecast, y: float, spec: MetricSpec) -> float:
    """Weighted CRPS with standard-normal climatological weights.

    ``spec.weight_kind`` selects w(z) = 1 - cdf(z) (left tail), cdf(z)
    (right tail), pdf(z) (center), or 1 (unit, recovering plain CRPS);
    z = (x - weight_loc) / weight_scale.  The squared CDF term is constant
    per segment, so only the weight needs integrating, which is done with
    the exact Gaussian antiderivatives.
    """
    kind = spec.weight_kind or "unit"
    loc = 0.0 if spec.weight_loc is None else float(spec.weight_loc)
    scale = 1.0 if spec.weight_scale is None else float(spec.weight_scale)
    if scale <= 0.0:
        raise InvalidScaleError(f"weight scale must be > 0, got {scale}")
    left, widths = _segments(f, y)
    if widths.size == 0:
        return 0.0
    diff = f.cdf(left) - (left >= y)
    w = _weight_integral(kind, left, left + widths, loc, scale)
    return float(np.dot(diff * diff, w))


def log_score(h: HistogramForecast, y: float) -> float:
    """Negative log of the histogram density at the observation.

    The density in bin k is p[k] / width[k].  Probabilities are clamped
    below at 1e-12; an observation outside the grid is scored with the
    clamp mass over the nearest bin's width.
    """
    k = h.bin_index(y)
    if k < 0:
        k = 0 if y < h.edges[0] else h.probs.size - 1
        p = EPS_DENSITY
    else:
        p = max(float(h.probs[k]), EPS_DENSITY)
    return float(-math.log(p / float(h.widths[k])))


def brier_score(h: HistogramForecast, y: float) -> float:
    """Squared distance between the bin PMF and the observed one-hot bin.

    Raises :class:`OutsideSupportError` when the observation lies outside
    the grid, where the one-hot target is undefined; a silent worst-case
    value would corrupt downstream leaderboards.
    """
    k = h.bin_index(y)
    if k < 0:
        raise OutsideSupportError(
            f"observation {y} outside histogram support [{h.edges[0]}, {h.edges[-1]}]"
        )
    total = float(np.dot(h.probs, h.probs))
    return float(total - 2.0 * h.probs[k] + 1.0)


@dataclass(frozen=True)
class PointMetrics:
    """MAE/RMSE/R-squared of point predictions extracted from forecasts."""

    mae: float
    rmse: float
    r2: float | None


def point_metrics(pred_mae, pred_sq, targets) -> PointMetrics:
    """Point metrics from separate functionals per loss.

    ``pred_mae`` should be the forecast medians (Bayes-optimal for MAE)
    and ``pred_sq`` the forecast means (optimal for squared error); both
    are overridable by passing any other point predictions.  R-squared is
    undefined (None) when the targets have zero variance.
    """
    pred_mae = np.asarray(pred_mae, dtype=float)
    pred_sq = np.asarray(pred_sq, dtype=float)
    y = np.asarray(targets, dtype=float)
    if y.size == 0:
        raise EmptyBatchError("point metrics need at least one observation")
    mae = float(np.mean(np.abs(y - pred_mae)))
    sq_err = (y - pred_sq) ** 2
    rmse = float(math.sqrt(np.mean(sq_err)))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = None if ss_tot == 0.0 else 1.0 - float(np.sum(sq_err)) / ss_tot
    return PointMetrics(mae=mae, rmse=rmse, r2=r2)


@dataclass(frozen=True, eq=False)
class ScoreResult:
    """Scores of one metric over a batch.

    ``values`` holds per-instance scores in record order (NaN where the
    metric is undefined for a record) or None for batch-level metrics
    (rmse, r2, dispersion).  ``mean`` is the batch score; for per-instance
    metrics it is the arithmetic mean of the defined values.
    """

    metric: str
    values: np.ndarray | None
    mean: float


def _histogram_forms(records) -> list[HistogramForecast | None]:
    hists: list[HistogramForecast | None] = []
    converted = 0
    for rec in records:
        f = rec.forecast
        if isinstance(f, HistogramForecast):
            hists.append(f)
        elif isinstance(f, QuantileForecast):
            try:
                hists.append(quantiles_to_histogram(f))
                converted += 1
            except NotConvertibleError:
                hists.append(None)
        else:
            hists.append(None)
    if converted:
        warnings.warn(
            f"{converted} quantile record(s) converted to histograms for density scores",
            ConversionWarning,
            stacklevel=3,
        )
    return hists


def score_batch(
    records: Sequence["ForecastRecord"],
    specs: Sequence[MetricSpec | str],
) -> dict[str, ScoreResult]:
    """Score every requested metric over a batch of forecast records.

    Records need ``target`` and ``forecast`` attributes (see
    :class:`probeval.io.ForecastRecord`).  Histogram-only metrics (log
    score, Brier) are computed through the quantile-to-histogram
    conversion for quantile records and are absent (NaN) for sample
    records.  wCRPS weight references default to the batch target mean
    and population standard deviation.
    """
    records = list(records)
    if not records:
        raise EmptyBatchError("no forecast records to score")
    resolved = [resolve_metric(s) if isinstance(s, str) else s for s in specs]

    targets = np.array([rec.target for rec in records], dtype=float)
    discretes = [to_discrete(rec.forecast) for rec in records]
    hists = None
    if any(spec.name in ("log_score", "brier_score") for spec in resolved):
        hists = _histogram_forms(records)

    results: dict[str, ScoreResult] = {}
    medians = means = stds = None

    def _per_instance(name: str, values: np.ndarray) -> None:
        defined = ~np.isnan(values)
        if not defined.any():
            warnings.warn(
                f"{name} is undefined for every record; omitted", ConversionWarning, stacklevel=3
            )
            return
        results[name] = ScoreResult(name, values, float(np.mean(values[defined])))

    for spec in resolved:
        name = spec.name
        if name == "crps":
            vals = np.array([crps(f, y) for f, y in zip(discretes, targets)])
            _per_instance(name, vals)
        elif name == "crls":
            vals = np.array([crls(f, y) for f, y in zip(discretes, targets)])
            _per_instance(name, vals)
        elif name.startswith("energy_score_beta_"):
            beta = spec.beta if spec.beta is not None else float(name.rsplit("_", 1)[1])
            vals = np.array([energy_score(f, y, beta) for f, y in zip(discretes, targets)])
            _per_instance(name, vals)
        elif name.startswith("wcrps"):
            wspec = spec
            if wspec.weight_loc is None or wspec.weight_scale is None:
                scale = float(np.std(targets))
                if scale <= 0.0:
                    raise InvalidScaleError(
                        "batch targets have zero spread; pass an explicit weight reference"
                    )
                wspec = replace(
                    spec, weight_loc=float(np.mean(targets)), weight_scale=scale
                )
            vals = np.array([wcrps(f, y, wspec) for f, y in zip(discretes, targets)])
            _per_instance(name, vals)
        elif name.startswith("interval_score"):
            vals = np.array(
                [interval_score(f, y, spec.alpha) for f, y in zip(discretes, targets)]
            )
            _per_instance(name, vals)
        elif name == "log_score":
            vals = np.array(
                [
                    log_score(h, y) if h is not None else math.nan
                    for h, y in zip(hists, targets)
                ]
            )
            _per_instance(name, vals)
        elif name == "brier_score":
            vals = np.full(len(records), math.nan)
            for i, (h, y) in enumerate(zip(hists, targets)):
                if h is None:
                    continue
                try:
                    vals[i] = brier_score(h, y)
                except OutsideSupportError as exc:
                    rec_id = getattr(records[i], "id", i)
                    raise OutsideSupportError(f"record {rec_id!r}: {exc}") from exc
            _per_instance(name, vals)
        elif name in ("mae", "rmse", "r2"):
            if medians is None:
                medians = np.array([f.median() for f in discretes])
                means = np.array([f.mean() for f in discretes])
            pm = point_metrics(medians, means, targets)
            if name == "mae":
                _per_instance(name, np.abs(targets - medians))
            elif name == "rmse":
                results[name] = ScoreResult(name, None, pm.rmse)
            elif pm.r2 is None:
                warnings.warn(
                    "r2 undefined: targets have zero variance; omitted",
                    ConversionWarning,
                    stacklevel=2,
                )
            else:
                results[name] = ScoreResult(name, None, pm.r2)
        elif name == "sharpness":
            if stds is None:
                stds = np.array([f.std() for f in discretes])
            _per_instance(name, stds)
        elif name == "dispersion":
            if stds is None:
                stds = np.array([f.std() for f in discretes])
            results[name] = ScoreResult(name, None, float(np.std(stds)))
        elif name.startswith("coverage_"):
            level = float(name.rsplit("_", 1)[1]) / 100.0
            pairs = list(zip(discretes, targets))
            vals = np.array(
                [float(diagnostics.in_central_interval(f, y, level)) for f, y in pairs]
            )
            _per_instance(name, vals)
        else:  # pragma: no cover - registry and dispatch are kept in sync
            raise UnknownMetricError(f"no dispatcher for metric {name!r}")
    return results
