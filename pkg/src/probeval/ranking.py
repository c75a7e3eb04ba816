"""Permutation-test leaderboard over (model, dataset, fold) run records.

Cross-validation folds of one dataset are correlated measurements; using
them as independent samples (pseudoreplication) inflates significance.
The pipeline therefore blocks per dataset:

    1. average folds into one score per (model, dataset);
    2. drop zero-variance datasets and rank models within each dataset
       (ranks resolve the incommensurability of scales across datasets);
    3. take each model's observed average rank;
    4. build a null distribution by independently shuffling each
       dataset's rank vector (20,000 simulations by default);
    5. p = (counts + 1) / (nsim + 1), counting null means at least as
       good as observed;
    6. order models by p-value, breaking ties by observed raw means.

The shuffles are driven by counter-based substreams keyed on
(seed, simulation, dataset), so results are byte-identical regardless of
chunking or worker count.
"""

from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.stats import rankdata

from . import rng
from .errors import (
    DroppedDatasetWarning,
    NoInformativeDatasetsError,
    NotComparableError,
)
from .scoring import LOWER_BETTER, MetricSpec, resolve_metric

# Stream tag separating leaderboard shuffles from other consumers of the
# counter-based generator.
_SHUFFLE_STREAM = 0x7065726D

DEFAULT_NSIM = 20_000


@dataclass(frozen=True)
class RunRecord:
    """One observed metric value: (model, dataset, fold, metric, value)."""

    model: str
    dataset: str
    fold: int
    metric: str
    value: float


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """Fold-averaged scores, models by datasets, with metric orientation."""

    models: tuple[str, ...]
    datasets: tuple[str, ...]
    values: np.ndarray
    orientation: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.models), len(self.datasets)):
            raise ValueError("values must be shaped (models, datasets)")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class LeaderboardRow:
    """One leaderboard line: Rank, Model, p-value, Observed, AverageRank."""

    rank: int
    model: str
    p_value: float
    observed: float
    average_rank: float


def aggregate_folds(records: Iterable[RunRecord], metric: str) -> ScoreMatrix:
    """Average folds into one score per (model, dataset) for one metric.

    Datasets on which any model is missing are dropped (complete-case)
    with a :class:`DroppedDatasetWarning`.  Fold means use exact summation
    so that duplicated folds cannot perturb the result.
    """
    rows = [r for r in records if r.metric == metric]
    if not rows:
        raise NotComparableError(f"no run records for metric {metric!r}")
    models = sorted({r.model for r in rows})
    if len(models) < 2:
        raise NotComparableError(f"need at least 2 models for metric {metric!r}, found {len(models)}")
    folds: dict[tuple[str, str], list[float]] = defaultdict(list)
    for r in rows:
        folds[(r.model, r.dataset)].append(r.value)

    datasets = sorted({r.dataset for r in rows})
    complete = [d for d in datasets if all((m, d) in folds for m in models)]
    for d in datasets:
        if d not in complete:
            missing = [m for m in models if (m, d) not in folds]
            warnings.warn(
                f"dataset {d!r} dropped: no runs for {', '.join(missing)}",
                DroppedDatasetWarning,
                stacklevel=2,
            )
    if not complete:
        raise NotComparableError(f"no dataset has runs for every model on metric {metric!r}")

    values = np.array(
        [[math.fsum(folds[(m, d)]) / len(folds[(m, d)]) for d in complete] for m in models]
    )
    return ScoreMatrix(
        models=tuple(models),
        datasets=tuple(complete),
        values=values,
        orientation=resolve_metric(metric).orientation,
    )


def drop_zero_variance(matrix: ScoreMatrix) -> ScoreMatrix:
    """Remove datasets where all models score exactly the same."""
    values = matrix.values
    keep = [d for d in range(values.shape[1]) if not np.all(values[:, d] == values[0, d])]
    dropped = [matrix.datasets[d] for d in range(values.shape[1]) if d not in keep]
    for name in dropped:
        warnings.warn(
            f"dataset {name!r} dropped: all models scored identically",
            DroppedDatasetWarning,
            stacklevel=2,
        )
    if not keep:
        raise NoInformativeDatasetsError("every dataset has zero variance across models")
    return ScoreMatrix(
        models=matrix.models,
        datasets=tuple(matrix.datasets[d] for d in keep),
        values=values[:, keep],
        orientation=matrix.orientation,
    )


def rank_transform(matrix: ScoreMatrix) -> np.ndarray:
    """Within-dataset ranks, 1 = best under the metric orientation.

    Ties receive fractional (average) ranks, the standard nonparametric
    convention.
    """
    oriented = matrix.values if matrix.orientation == LOWER_BETTER else -matrix.values
    return np.column_stack(
        [rankdata(oriented[:, d], method="average") for d in range(oriented.shape[1])]
    )


def observed_statistics(ranks: np.ndarray, matrix: ScoreMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Per-model (average rank, mean raw score) across datasets."""
    if ranks.shape != matrix.values.shape:
        raise ValueError("ranks and matrix shapes differ")
    return ranks.mean(axis=1), matrix.values.mean(axis=1)


def permutation_null(
    ranks: np.ndarray,
    nsim: int,
    seed: int,
    chunk_size: int | None = None,
) -> np.ndarray:
    """Null distribution of per-model mean ranks under within-dataset shuffles.

    Each simulation independently permutes every dataset's rank vector;
    the permutation for (simulation s, dataset d) is drawn from its own
    counter-based substream of ``seed``, so the (nsim, models) result is
    the same for any ``chunk_size`` and any parallel split.
    """
    ranks = np.asarray(ranks, dtype=float)
    n_models, n_datasets = ranks.shape
    if nsim < 1:
        raise ValueError("nsim must be >= 1")
    chunk = nsim if chunk_size is None else max(1, int(chunk_size))
    slots = np.arange(n_models, dtype=np.uint64)[None, :]
    out = np.empty((nsim, n_models))
    for lo in range(0, nsim, chunk):
        hi = min(lo + chunk, nsim)
        sims = np.arange(lo, hi, dtype=np.uint64)[:, None]
        sums = np.zeros((hi - lo, n_models))
        for d in range(n_datasets):
            keys = rng.counter_hash(seed, _SHUFFLE_STREAM, d, sims, slots)
            perm = np.argsort(keys, axis=1, kind="stable")
            sums += ranks[perm, d]
        out[lo:hi] = sums / n_datasets
    return out


def empirical_p(observed_mean: float, null_means) -> float:
    """Pseudo-counted one-sided p-value, p = (counts + 1) / (nsim + 1).

    ``counts`` is the number of null means at least as extreme as the
    observed one; smaller average rank is better, so extreme means
    null <= observed.  The pseudo-count keeps p strictly positive.
    """
    null = np.asarray(null_means, dtype=float)
    if null.size == 0:
        raise ValueError("null sample must be nonempty")
    counts = int(np.count_nonzero(null <= observed_mean))
    return (counts + 1) / (null.size + 1)


def build_leaderboard(
    records: Iterable[RunRecord],
    metric: str | MetricSpec,
    nsim: int = DEFAULT_NSIM,
    seed: int = 0,
    chunk_size: int | None = None,
) -> list[LeaderboardRow]:
    """Full pipeline from run records to ordered leaderboard rows.

    Rows are sorted by p-value ascending with ties broken by the observed
    raw mean (better first under the metric orientation), then by average
    rank and model name for full determinism; ranks run 1..M.
    """
    spec = resolve_metric(metric) if isinstance(metric, str) else metric
    matrix = aggregate_folds(records, spec.name)
    matrix = drop_zero_variance(matrix)
    ranks = rank_transform(matrix)
    avg_ranks, observed = observed_statistics(ranks, matrix)
    null = permutation_null(ranks, nsim=nsim, seed=seed, chunk_size=chunk_size)
    p_values = [empirical_p(avg_ranks[m], null[:, m]) for m in range(len(matrix.models))]

    sign = 1.0 if spec.orientation == LOWER_BETTER else -1.0
    order = sorted(
        range(len(matrix.models)),
        key=lambda m: (p_values[m], sign * observed[m], avg_ranks[m], matrix.models[m]),
    )
    return [
        LeaderboardRow(
            rank=position + 1,
            model=matrix.models[m],
            p_value=p_values[m],
            observed=float(observed[m]),
            average_rank=float(avg_ranks[m]),
        )
        for position, m in enumerate(order)
    ]
