"""Error metrics, benchmarks and non-parametric method comparison.

RMSE and flow-normalized RMSE score generated days against recorded
ones; a leave-one-out benchmark compares embedding-based source
selection with the geographic baseline; the Friedman test plus the
Nemenyi post-hoc procedure rank generation methods over many days.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import stats as sstats

from .embedding import RoadEmbedding
from .errors import ArgumentError, AvailabilityError, DomainError
from .generation import GeneratedDay
from .selection import SelectionResult, select_by_embedding, select_by_geography
from .traffic_data import TrafficProfile, TrafficSeries, slice_day

# critical values of the studentized-range-based Nemenyi statistic at
# alpha = 0.05, by number of compared methods; other (k, alpha) pairs
# must be supplied by the caller / config
NEMENYI_Q_05 = {2: 1.959964, 3: 2.343}


def rmse(observed: Sequence[float], predicted: Sequence[float]) -> float:
    """Root mean squared error between two equal-length vectors."""
    a = np.asarray(observed, dtype=float)
    b = np.asarray(predicted, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ArgumentError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ArgumentError("rmse of empty vectors is undefined")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def nrmse(observed, predicted, mean_flow: float) -> float:
    """RMSE normalized by the target's mean weekday flow."""
    if mean_flow <= 0:
        raise DomainError(f"mean flow must be positive to normalize, got {mean_flow}")
    return rmse(observed, predicted) / mean_flow


# ---------------------------------------------------------------------------
# non-parametric method comparison
# ---------------------------------------------------------------------------


def _error_matrix(errors) -> np.ndarray:
    e = np.asarray(errors, dtype=float)
    if e.ndim != 2:
        raise ArgumentError(f"error matrix must be 2-D, got shape {e.shape}")
    n, k = e.shape
    if n < 2 or k < 2:
        raise ArgumentError(f"need >= 2 rows and >= 2 columns, got {e.shape}")
    if np.isnan(e).any():
        raise ArgumentError("error matrix contains absent cells; exclude those rows first")
    return e


def friedman_test(errors) -> tuple[float, float]:
    """Friedman rank test over an (observations x methods) error matrix.

    Rows are ranked ascending with mean ranks on ties; the classic
    statistic (no tie-variance correction) is referred to the chi-square
    distribution with k-1 degrees of freedom.
    """
    e = _error_matrix(errors)
    n, k = e.shape
    ranks = sstats.rankdata(e, method="average", axis=1)
    mean_ranks = ranks.mean(axis=0)
    statistic = 12.0 * n / (k * (k + 1)) * float(np.sum(mean_ranks**2)) - 3.0 * n * (k + 1)
    statistic = max(statistic, 0.0)  # guards float dust on fully tied input
    p_value = float(sstats.chi2.sf(statistic, k - 1))
    return statistic, p_value


VERDICT_FIRST = "first_better"
VERDICT_SECOND = "second_better"
VERDICT_TIE = "tie"


@dataclass(frozen=True)
class NemenyiResult:
    mean_ranks: tuple[float, ...]
    critical_difference: float
    friedman_statistic: float
    friedman_p: float
    significant: bool
    verdicts: dict[tuple[int, int], str]


def nemenyi_posthoc(
    errors, alpha: float = 0.05, q_crit: float | None = None
) -> NemenyiResult:
    """Pairwise method comparison gated on a significant Friedman test.

    Two methods differ when their mean ranks differ by more than the
    critical difference ``q * sqrt(k (k + 1) / (6 n))``; the one with
    the lower mean rank (lower error) wins.  When the Friedman test is
    not significant at ``alpha`` every pair is a tie.
    """
    e = _error_matrix(errors)
    n, k = e.shape
    if not 0.0 < alpha < 1.0:
        raise ArgumentError(f"alpha must be in (0, 1), got {alpha}")
    if q_crit is None:
        if alpha == 0.05 and k in NEMENYI_Q_05:
            q_crit = NEMENYI_Q_05[k]
        else:
            raise ArgumentError(
                f"no built-in critical value for k={k}, alpha={alpha}; supply q_crit"
            )
    statistic, p = friedman_test(e)
    significant = p < alpha
    ranks = sstats.rankdata(e, method="average", axis=1)
    mean_ranks = tuple(float(x) for x in ranks.mean(axis=0))
    cd = q_crit * math.sqrt(k * (k + 1) / (6.0 * n))
    verdicts: dict[tuple[int, int], str] = {}
    for i in range(k):
        for j in range(i + 1, k):
            if not significant or abs(mean_ranks[i] - mean_ranks[j]) <= cd:
                verdicts[(i, j)] = VERDICT_TIE
            elif mean_ranks[i] < mean_ranks[j]:
                verdicts[(i, j)] = VERDICT_FIRST
            else:
                verdicts[(i, j)] = VERDICT_SECOND
    return NemenyiResult(
        mean_ranks=mean_ranks,
        critical_difference=cd,
        friedman_statistic=statistic,
        friedman_p=p,
        significant=significant,
        verdicts=verdicts,
    )


def best_methods(result: NemenyiResult, labels: Sequence[str]) -> list[str]:
    """Methods statistically indistinguishable from the top-ranked one."""
    if len(labels) != len(result.mean_ranks):
        raise ArgumentError("labels do not match the number of compared methods")
    top = min(result.mean_ranks)
    if not result.significant:
        return list(labels)
    return [
        lab
        for lab, r in zip(labels, result.mean_ranks)
        if r - top <= result.critical_difference
    ]


# ---------------------------------------------------------------------------
# leave-one-out selection benchmark
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SegmentRecord:
    """Everything the benchmarks need to know about one sensed segment."""

    sensor_id: str
    coords: tuple[float, float]
    embedding: RoadEmbedding
    profile: TrafficProfile
    mean_weekday_flow: float
    road_type: str = ""


@dataclass(frozen=True)
class SelectionOutcome:
    target_id: str
    embedding_result: SelectionResult
    geographic_result: SelectionResult
    embedding_rmse: float
    geographic_rmse: float
    best_id: str
    best_rmse: float
    mean_weekday_flow: float
    verdict: str  # "embedding" | "geographic" | "tie"


def selection_benchmark(
    segments: Sequence[SegmentRecord], metric: str = "l2"
) -> list[SelectionOutcome]:
    """Leave-one-out comparison of both selection methods.

    Each segment in turn plays the unsensed target; its daily profile is
    compared against the profile of the segment picked by embeddings and
    by geography, plus the best any candidate could have achieved.
    """
    if len(segments) < 3:
        raise ArgumentError(f"benchmark pool needs >= 3 segments, got {len(segments)}")
    ids = [s.sensor_id for s in segments]
    if len(set(ids)) != len(ids):
        raise ArgumentError("duplicate sensor ids in benchmark pool")
    by_id = {s.sensor_id: s for s in segments}
    outcomes: list[SelectionOutcome] = []
    for target in segments:
        others = [s for s in segments if s.sensor_id != target.sensor_id]
        emb_res = select_by_embedding(
            target.embedding, [s.embedding for s in others], metric=metric
        )
        geo_res = select_by_geography(
            target.sensor_id, target.coords, [(s.sensor_id, s.coords) for s in others]
        )
        emb_rmse = rmse(target.profile.values, by_id[emb_res.selected_id].profile.values)
        geo_rmse = rmse(target.profile.values, by_id[geo_res.selected_id].profile.values)
        candidate_rmse = sorted(
            (rmse(target.profile.values, s.profile.values), s.sensor_id) for s in others
        )
        best_rmse, best_id = candidate_rmse[0]
        if emb_rmse < geo_rmse:
            verdict = "embedding"
        elif geo_rmse < emb_rmse:
            verdict = "geographic"
        else:
            verdict = "tie"
        outcomes.append(
            SelectionOutcome(
                target_id=target.sensor_id,
                embedding_result=emb_res,
                geographic_result=geo_res,
                embedding_rmse=emb_rmse,
                geographic_rmse=geo_rmse,
                best_id=best_id,
                best_rmse=best_rmse,
                mean_weekday_flow=target.mean_weekday_flow,
                verdict=verdict,
            )
        )
    return outcomes


def tally_selection(outcomes: Sequence[SelectionOutcome]) -> dict[str, int]:
    return {
        "embedding": sum(1 for o in outcomes if o.verdict == "embedding"),
        "geographic": sum(1 for o in outcomes if o.verdict == "geographic"),
        "tie": sum(1 for o in outcomes if o.verdict == "tie"),
    }


# ---------------------------------------------------------------------------
# per-day generation benchmark
# ---------------------------------------------------------------------------


@dataclass
class GenerationErrorTable:
    """nRMSE of each method on each evaluated day; NaN marks absent cells."""

    target_id: str
    methods: list[str]
    dates: list[date]
    nrmse: np.ndarray

    def complete_mask(self) -> np.ndarray:
        return ~np.isnan(self.nrmse).any(axis=1)

    def complete_matrix(self) -> np.ndarray:
        return self.nrmse[self.complete_mask()]

    def method_mean_std(self) -> dict[str, tuple[float, float]]:
        """Per-method mean and sample stdev over that method's available days."""
        out: dict[str, tuple[float, float]] = {}
        for j, m in enumerate(self.methods):
            col = self.nrmse[:, j]
            col = col[~np.isnan(col)]
            if col.size == 0:
                out[m] = (math.nan, math.nan)
            else:
                std = float(col.std(ddof=1)) if col.size >= 2 else 0.0
                out[m] = (float(col.mean()), std)
        return out


def generation_benchmark(
    target: TrafficSeries,
    mean_flow: float,
    generators: Mapping[str, Callable[[date], GeneratedDay]],
    dates: Sequence[date] | None = None,
) -> GenerationErrorTable:
    """Score every generator on every complete day of the target.

    A generator raising ``AvailabilityError`` for a date leaves an
    absent (NaN) cell; such days are dropped from rank statistics by
    :meth:`GenerationErrorTable.complete_matrix`.
    """
    if not generators:
        raise ArgumentError("no generators to benchmark")
    if dates is None:
        dates = target.complete_days()
    dates = list(dates)
    if not dates:
        raise DomainError(f"target {target.sensor_id!r} has no complete days to score")
    methods = sorted(generators)  # column order independent of caller dict order
    table = np.full((len(dates), len(methods)), np.nan)
    for i, d in enumerate(dates):
        real = slice_day(target, d)
        for j, name in enumerate(methods):
            try:
                generated = generators[name](d)
            except AvailabilityError:
                continue
            table[i, j] = nrmse(real, generated.values, mean_flow)
    return GenerationErrorTable(
        target_id=target.sensor_id, methods=methods, dates=dates, nrmse=table
    )
