"""Support-recovery failure and NMSE scoring, aggregated over knowledge cases."""

from __future__ import annotations

import math
import typing as t
from dataclasses import dataclass

import numpy as np

from faultsbl.datagen import KnowledgeCase
from faultsbl.errors import AggregationError, DimensionError
from faultsbl.solver import top_k


@dataclass(frozen=True)
class TrialScore:
    failed: bool
    nmse: float
    converged: bool
    iterations: int
    # set when the solve aborted; the trial then counts as failed
    error: str | None = None

    def __post_init__(self):
        if not self.nmse >= 0:
            raise ValueError(f"nmse must be >= 0, got {self.nmse}.")

    @classmethod
    def aborted(cls, error: str) -> TrialScore:
        # a zero estimate has NMSE 1 by definition
        return cls(failed=True, nmse=1.0, converged=False, iterations=0, error=error)


@dataclass(frozen=True)
class CaseSummary:
    case: KnowledgeCase
    failure_rate: float
    mean_nmse: float
    trials: int


@dataclass(frozen=True)
class BoxStats:
    whisker_low: float
    q1: float
    median: float
    q3: float
    whisker_high: float
    mean: float
    outliers: tuple[float, ...]


@dataclass(frozen=True)
class MethodSummary:
    failure_rate: float
    mean_nmse: float
    cases: tuple[CaseSummary, ...]
    # the (0, 0) case, when it was run
    no_knowledge: CaseSummary | None

    def box_stats(self, measure: t.Literal["failure_rate", "mean_nmse"]) -> BoxStats:
        return box_stats([getattr(c, measure) for c in self.cases])


def score_failure(
    mean_deviations: np.ndarray, support_true: t.Collection[int], k: int
) -> bool:
    if len(support_true) != k:
        raise DimensionError(f"support has {len(support_true)} indices, expected k={k}.")
    return top_k(mean_deviations, k) != frozenset(support_true)


def score_nmse(mean_deviations: np.ndarray, x_bar_true: np.ndarray) -> float:
    estimate = np.asarray(mean_deviations, dtype=float)
    truth = np.asarray(x_bar_true, dtype=float)
    if estimate.shape != truth.shape:
        raise DimensionError(f"estimate {estimate.shape} vs truth {truth.shape}.")
    denominator = float(truth @ truth)
    if denominator == 0:
        raise DimensionError("NMSE is undefined for an all-zero truth.")
    diff = estimate - truth
    return float(diff @ diff) / denominator


def summarize_case(case: KnowledgeCase, scores: t.Sequence[TrialScore]) -> CaseSummary:
    if not scores:
        raise AggregationError(f"Case ({case.label}) has no trials.")
    failed = sum(1 for s in scores if s.failed)
    return CaseSummary(
        case=case,
        failure_rate=failed / len(scores),
        mean_nmse=math.fsum(s.nmse for s in scores) / len(scores),
        trials=len(scores),
    )


def aggregate(scores: t.Mapping[KnowledgeCase, t.Sequence[TrialScore]]) -> MethodSummary:
    """Unweighted mean over cases of the per-case trial means."""
    if not scores:
        raise AggregationError("Nothing to aggregate.")
    trial_counts = {len(v) for v in scores.values()}
    if len(trial_counts) != 1:
        raise AggregationError(f"Cases have different trial counts: {sorted(trial_counts)}.")

    cases = tuple(summarize_case(case, scores[case]) for case in sorted(scores))
    return MethodSummary(
        failure_rate=math.fsum(c.failure_rate for c in cases) / len(cases),
        mean_nmse=math.fsum(c.mean_nmse for c in cases) / len(cases),
        cases=cases,
        no_knowledge=next((c for c in cases if c.case.is_empty), None),
    )


def box_stats(values: t.Sequence[float]) -> BoxStats:
    """Five-number summary with 1.5 x IQR whiskers."""
    if not values:
        raise AggregationError("Cannot summarize an empty sample.")
    data = np.sort(np.asarray(values, dtype=float))
    q1, median, q3 = (float(q) for q in np.quantile(data, [0.25, 0.5, 0.75]))
    iqr = q3 - q1
    low_fence, high_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = data[(data >= low_fence) & (data <= high_fence)]
    return BoxStats(
        whisker_low=float(inside.min()),
        q1=q1,
        median=median,
        q3=q3,
        whisker_high=float(inside.max()),
        mean=math.fsum(data.tolist()) / len(data),
        outliers=tuple(float(v) for v in data if v < low_fence or v > high_fence),
    )


def is_outlier(value: float, stats: BoxStats) -> bool:
    iqr = stats.q3 - stats.q1
    return value < stats.q1 - 1.5 * iqr or value > stats.q3 + 1.5 * iqr
