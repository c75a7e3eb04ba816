"""Scoring rules, calibration diagnostics, and permutation-test
leaderboards for discretized probabilistic regression forecasts."""

from . import errors
from .diagnostics import (
    CalibrationReport,
    calibration_report,
    coverage,
    dispersion,
    sharpness,
)
from .forecast import (
    DiscreteForecast,
    Forecast,
    HistogramForecast,
    QuantileForecast,
    SampleForecast,
    histogram_to_discrete,
    quantiles_to_discrete,
    quantiles_to_histogram,
    samples_to_discrete,
    to_discrete,
    to_histogram,
)
from .io import (
    ForecastRecord,
    read_forecasts,
    read_runs,
    write_forecasts,
    write_leaderboard,
    write_runs,
    write_scores,
)
from .ranking import (
    LeaderboardRow,
    RunRecord,
    ScoreMatrix,
    aggregate_folds,
    build_leaderboard,
    drop_zero_variance,
    empirical_p,
    observed_statistics,
    permutation_null,
    rank_transform,
)
from .scoring import (
    HIGHER_BETTER,
    LOWER_BETTER,
    METRIC_NAMES,
    MetricSpec,
    PointMetrics,
    ScoreResult,
    brier_score,
    crls,
    crps,
    energy_score,
    interval_score,
    log_score,
    point_metrics,
    resolve_metric,
    score_batch,
    wcrps,
)
from .synth import (
    ScenarioSpec,
    generate_runs,
    generate_self_calibrated_batch,
    self_calibrated_records,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationReport",
    "DiscreteForecast",
    "Forecast",
    "ForecastRecord",
    "HIGHER_BETTER",
    "HistogramForecast",
    "LOWER_BETTER",
    "LeaderboardRow",
    "METRIC_NAMES",
    "MetricSpec",
    "PointMetrics",
    "QuantileForecast",
    "RunRecord",
    "SampleForecast",
    "ScenarioSpec",
    "ScoreMatrix",
    "ScoreResult",
    "aggregate_folds",
    "brier_score",
    "build_leaderboard",
    "calibration_report",
    "coverage",
    "crls",
    "crps",
    "dispersion",
    "drop_zero_variance",
    "empirical_p",
    "energy_score",
    "errors",
    "generate_runs",
    "generate_self_calibrated_batch",
    "histogram_to_discrete",
    "interval_score",
    "log_score",
    "observed_statistics",
    "permutation_null",
    "point_metrics",
    "quantiles_to_discrete",
    "quantiles_to_histogram",
    "rank_transform",
    "read_forecasts",
    "read_runs",
    "resolve_metric",
    "samples_to_discrete",
    "score_batch",
    "self_calibrated_records",
    "sharpness",
    "to_discrete",
    "to_histogram",
    "wcrps",
    "write_forecasts",
    "write_leaderboard",
    "write_runs",
    "write_scores",
]
