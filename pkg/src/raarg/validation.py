"""Agreement and sensitivity statistics for judge validation.

Krippendorff's alpha uses the coincidence-matrix formulation so it
handles missing ratings; the sensitivity machinery summarizes judge
scores against perturbation levels via Pearson correlation and a strict
monotonic-decrease check.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from .corpus import Qrels
from .judges import DEFAULT_PRECISION_THRESHOLD, JudgeVerdict, predicted_precision
from .perturbation import IrrelevantInjection, true_precision
from .seeds import derive_seed

MEASUREMENT_LEVELS = ("nominal", "ordinal", "interval")


class ValidationError(Exception):
    pass


class InsufficientData(ValidationError):
    pass


class ZeroVariance(ValidationError):
    pass


class AlignmentError(ValidationError):
    pass


@dataclass(frozen=True)
class RatingsMatrix:
    """Raters x items ratings with None for missing entries."""

    ratings: tuple[tuple[Optional[float], ...], ...]
    measurement_level: str = "nominal"

    def __post_init__(self):
        if self.measurement_level not in MEASUREMENT_LEVELS:
            raise ValueError(f"unknown measurement level {self.measurement_level!r}")
        if len(self.ratings) < 2:
            raise ValueError("need at least 2 raters")
        widths = {len(row) for row in self.ratings}
        if len(widths) != 1:
            raise ValueError("all raters must rate the same item slots")

    @property
    def item_count(self) -> int:
        return len(self.ratings[0])

    def item_values(self, item: int) -> list[float]:
        return [row[item] for row in self.ratings if row[item] is not None]


def krippendorff_alpha(matrix: RatingsMatrix) -> float:
    """Chance-corrected agreement via the coincidence matrix.

    Items with fewer than two ratings are excluded. Raises
    InsufficientData when no item is pairable or when only one category
    appears (expected disagreement zero).
    """
    values_by_item = [
        vals
        for item in range(matrix.item_count)
        if len(vals := matrix.item_values(item)) >= 2
    ]
    if not values_by_item:
        raise InsufficientData("no item carries two or more ratings")

    categories = sorted({v for vals in values_by_item for v in vals})
    if len(categories) < 2:
        raise InsufficientData("agreement undefined with a single category in use")
    index = {c: i for i, c in enumerate(categories)}
    k = len(categories)

    coincidence = [[0.0] * k for _ in range(k)]
    for vals in values_by_item:
        m = len(vals)
        for a in range(m):
            for b in range(m):
                if a != b:
                    coincidence[index[vals[a]]][index[vals[b]]] += 1.0 / (m - 1)

    totals = [sum(row) for row in coincidence]
    n = sum(totals)

    def delta_sq(ci: int, cj: int) -> float:
        if matrix.measurement_level == "nominal":
            return 0.0 if ci == cj else 1.0
        if matrix.measurement_level == "interval":
            return (categories[ci] - categories[cj]) ** 2
        # Ordinal: squared difference of cumulative category frequencies.
        lo, hi = min(ci, cj), max(ci, cj)
        if lo == hi:
            return 0.0
        span = sum(totals[g] for g in range(lo, hi + 1))
        return (span - (totals[lo] + totals[hi]) / 2.0) ** 2

    observed = sum(
        coincidence[ci][cj] * delta_sq(ci, cj)
        for ci in range(k)
        for cj in range(ci + 1, k)
    )
    expected = sum(
        totals[ci] * totals[cj] * delta_sq(ci, cj)
        for ci in range(k)
        for cj in range(ci + 1, k)
    )
    if expected == 0:
        raise InsufficientData("expected disagreement is zero")
    return 1.0 - (n - 1) * observed / expected


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation; ZeroVariance if either series is flat."""
    if len(xs) != len(ys):
        raise ValueError("series must have equal length")
    if len(xs) < 2:
        raise ValueError("need at least 2 points")
    mx = statistics.fmean(xs)
    my = statistics.fmean(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("correlation undefined for a constant series")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


def monotonic_decrease(ys: Sequence[float]) -> bool:
    """True iff the series strictly decreases at every step."""
    if len(ys) < 2:
        raise ValueError("need at least 2 points")
    return all(b < a for a, b in zip(ys, ys[1:]))


# ---------------------------------------------------------------------------
# sensitivity curves


@dataclass(frozen=True)
class SensitivityCurve:
    axis_levels: tuple[float, ...]
    values: tuple[float, ...]
    pearson_rho: Optional[float]
    strictly_monotonic_decreasing: bool
    zero_variance: bool = False

    def __post_init__(self):
        if len(self.values) != len(self.axis_levels):
            raise ValueError("one value per level required")
        if any(b <= a for a, b in zip(self.axis_levels, self.axis_levels[1:])):
            raise ValueError("levels must be strictly increasing")


def summarize_curve(levels: Sequence[float], values: Sequence[float]) -> SensitivityCurve:
    """Attach rho and the strict-decrease verdict to per-level means."""
    try:
        rho: Optional[float] = pearson(list(levels), list(values))
        flat = False
    except ZeroVariance:
        rho = None
        flat = True
    return SensitivityCurve(
        axis_levels=tuple(levels),
        values=tuple(values),
        pearson_rho=rho,
        strictly_monotonic_decreasing=monotonic_decrease(values),
        zero_variance=flat,
    )


def sensitivity_curve(
    runner: Callable[[float, int], Sequence[float]],
    levels: Sequence[float],
    trials_per_level: int = 1,
    seed: int = 0,
) -> SensitivityCurve:
    """Mean judge score per perturbation level.

    The runner receives (level, trial_seed) and returns one normalized
    score per evaluated topic; scores are averaged over topics and
    trials at each level.
    """
    if trials_per_level < 1:
        raise ValueError("trials_per_level must be >= 1")
    values = []
    for level in levels:
        scores: list[float] = []
        for trial in range(trials_per_level):
            trial_seed = derive_seed(seed, "sensitivity", f"{level}:{trial}")
            trial_scores = list(runner(level, trial_seed))
            if not trial_scores:
                raise ValidationError(f"runner returned no scores at level {level}")
            scores.extend(trial_scores)
        values.append(statistics.fmean(scores))
    return summarize_curve(levels, values)


# ---------------------------------------------------------------------------
# precision comparison


@dataclass(frozen=True)
class PrecisionRow:
    level_percent: float
    true_precision: float
    predicted_precision: float
    absolute_error: float


def precision_comparison(
    injections: Sequence[IrrelevantInjection],
    verdicts: Sequence[JudgeVerdict],
    qrels: Qrels,
    threshold: float = DEFAULT_PRECISION_THRESHOLD,
) -> list[PrecisionRow]:
    """Per-level mean true precision vs judge-predicted precision.

    injections[i] aligns with verdicts[i]; each verdict must carry
    per-document context relevance (the fine-grained listwise format).
    """
    if len(injections) != len(verdicts):
        raise AlignmentError(
            f"{len(injections)} injections but {len(verdicts)} verdicts"
        )
    by_level: dict[float, list[tuple[float, float]]] = {}
    for injection, verdict in zip(injections, verdicts):
        scores = verdict.context_relevance_per_doc
        if scores is None:
            raise AlignmentError(
                f"verdict for topic {injection.topic_id} carries no "
                "per-document context relevance"
            )
        if len(scores) != len(injection.resulting_docs):
            raise AlignmentError(
                f"topic {injection.topic_id}: {len(scores)} scores for "
                f"{len(injection.resulting_docs)} documents"
            )
        truth = true_precision(injection, qrels.relevant_docs(injection.topic_id))
        predicted = predicted_precision(scores, threshold)
        by_level.setdefault(injection.level_percent, []).append((truth, predicted))

    rows = []
    for level in sorted(by_level):
        pairs = by_level[level]
        truth = statistics.fmean(t for t, _ in pairs)
        predicted = statistics.fmean(p for _, p in pairs)
        rows.append(
            PrecisionRow(
                level_percent=level,
                true_precision=truth,
                predicted_precision=predicted,
                absolute_error=abs(predicted - truth),
            )
        )
    return rows


def precision_rows_from_columns(
    levels: Sequence[float],
    true_values: Sequence[float],
    predicted_values: Sequence[float],
) -> list[PrecisionRow]:
    """Build comparison rows from already-aggregated per-level columns."""
    if not len(levels) == len(true_values) == len(predicted_values):
        raise AlignmentError("levels, true, and predicted columns must align")
    return [
        PrecisionRow(
            level_percent=level,
            true_precision=t,
            predicted_precision=p,
            absolute_error=abs(p - t),
        )
        for level, t, p in zip(levels, true_values, predicted_values)
    ]


# ---------------------------------------------------------------------------
# two-axis consistency grid


@dataclass(frozen=True)
class GridCell:
    context_relevance: float
    groundedness: float
    overall_quality: float
    runs: int


@dataclass(frozen=True)
class ConsistencyGrid:
    irrelevance_levels: tuple[float, ...]
    hallucination_levels: tuple[int, ...]
    cells: dict[tuple[float, int], GridCell] = field(hash=False)

    def __post_init__(self):
        expected = {
            (i, h) for i in self.irrelevance_levels for h in self.hallucination_levels
        }
        if set(self.cells) != expected:
            raise ValueError("grid cells must cover the full Cartesian product")
        if any(cell.runs < 1 for cell in self.cells.values()):
            raise ValueError("every cell needs at least one run")


def consistency_grid(
    runner: Callable[[float, int, int], Sequence[tuple[float, float, float]]],
    irrelevance_levels: Sequence[float],
    hallucination_levels: Sequence[int],
    seed: int = 0,
) -> ConsistencyGrid:
    """Evaluate the full perturbation product.

    The runner receives (irrelevance level, hallucination level, seed)
    and returns (context_relevance, groundedness, overall_quality)
    triples, one per evaluated argument; each cell stores their means.
    """
    if not irrelevance_levels or not hallucination_levels:
        raise ValueError("both level axes must be non-empty")
    cells: dict[tuple[float, int], GridCell] = {}
    for irr in irrelevance_levels:
        for hall in hallucination_levels:
            cell_seed = derive_seed(seed, "grid", f"{irr}:{hall}")
            triples = list(runner(irr, hall, cell_seed))
            if not triples:
                raise ValidationError(f"runner returned no results for cell ({irr}, {hall})")
            cells[(irr, hall)] = GridCell(
                context_relevance=statistics.fmean(t[0] for t in triples),
                groundedness=statistics.fmean(t[1] for t in triples),
                overall_quality=statistics.fmean(t[2] for t in triples),
                runs=len(triples),
            )
    return ConsistencyGrid(
        irrelevance_levels=tuple(irrelevance_levels),
        hallucination_levels=tuple(hallucination_levels),
        cells=cells,
    )
