"""Agreement and sensitivity statistics."""

import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raarg.corpus import EvidenceDocument, Qrels
from raarg.judges import JudgeVerdict
from raarg.perturbation import IrrelevantInjection
from raarg.seeds import derive_seed
from raarg.validation import (
    AlignmentError,
    ConsistencyGrid,
    GridCell,
    InsufficientData,
    RatingsMatrix,
    SensitivityCurve,
    ValidationError,
    ZeroVariance,
    consistency_grid,
    krippendorff_alpha,
    monotonic_decrease,
    pearson,
    precision_comparison,
    precision_rows_from_columns,
    sensitivity_curve,
    summarize_curve,
)


# ---------------------------------------------------------------------------
# Krippendorff's alpha


def _alpha_oracle(rows, level):
    """Direct pairwise-disagreement computation, no coincidence matrix."""
    items = []
    for i in range(len(rows[0])):
        vals = [row[i] for row in rows if row[i] is not None]
        if len(vals) >= 2:
            items.append(vals)
    if not items:
        raise InsufficientData("no pairable item")
    pooled = [v for vals in items for v in vals]
    cats = sorted(set(pooled))
    if len(cats) < 2:
        raise InsufficientData("single category")
    counts = {c: pooled.count(c) for c in cats}
    n = len(pooled)

    def delta_sq(a, b):
        if a == b:
            return 0.0
        if level == "nominal":
            return 1.0
        if level == "interval":
            return float(a - b) ** 2
        lo, hi = sorted((a, b))
        span = sum(counts[c] for c in cats if lo <= c <= hi)
        return (span - (counts[lo] + counts[hi]) / 2.0) ** 2

    observed = sum(
        delta_sq(vals[a], vals[b]) / (len(vals) - 1)
        for vals in items
        for a in range(len(vals))
        for b in range(len(vals))
        if a != b
    )
    expected = sum(
        counts[a] * counts[b] * delta_sq(a, b) for a in cats for b in cats if a != b
    )
    if expected == 0:
        raise InsufficientData("expected disagreement zero")
    return 1.0 - (n - 1) * observed / expected


def test_alpha_perfect_agreement_is_exactly_one():
    matrix = RatingsMatrix(((1, 2, 1, 3), (1, 2, 1, 3), (1, 2, 1, 3)))
    assert krippendorff_alpha(matrix) == 1.0


def test_alpha_two_rater_nominal_fixture():
    matrix = RatingsMatrix(((1, 2, 1, 2), (1, 2, 2, 2)), "nominal")
    assert krippendorff_alpha(matrix) == pytest.approx(0.5333, abs=1e-4)
    assert krippendorff_alpha(matrix) == pytest.approx(8 / 15)


def test_alpha_interval_fixture():
    # Hand check: one disagreeing pair at distance 1, expected sum 63,
    # so alpha = 1 - 7/63 = 8/9.
    matrix = RatingsMatrix(((1, 2, 3, 3), (1, 2, 3, 4)), "interval")
    assert krippendorff_alpha(matrix) == pytest.approx(8 / 9)


def test_alpha_interval_scales_disagreement_by_distance():
    near = RatingsMatrix(((1, 2, 3, 3), (1, 2, 3, 4)), "interval")
    far = RatingsMatrix(((1, 2, 3, 1), (1, 2, 3, 4)), "interval")
    assert krippendorff_alpha(far) < krippendorff_alpha(near)


def test_alpha_excludes_items_with_single_rating():
    base = RatingsMatrix(((1, 2, 1, 2), (1, 2, 2, 2)))
    padded = RatingsMatrix(((1, 2, 1, 2, 3), (1, 2, 2, 2, None)))
    assert krippendorff_alpha(padded) == pytest.approx(krippendorff_alpha(base))


def test_alpha_insufficient_data_paths():
    with pytest.raises(InsufficientData, match="two or more"):
        krippendorff_alpha(RatingsMatrix(((1, None), (None, 2))))
    with pytest.raises(InsufficientData, match="single category"):
        krippendorff_alpha(RatingsMatrix(((1, 1), (1, 1))))


def test_ratings_matrix_validation():
    with pytest.raises(ValueError, match="2 raters"):
        RatingsMatrix(((1, 2),))
    with pytest.raises(ValueError, match="same item slots"):
        RatingsMatrix(((1, 2), (1,)))
    with pytest.raises(ValueError, match="measurement level"):
        RatingsMatrix(((1, 2), (1, 2)), "ratio")


def _assert_matches_oracle(rows, level):
    try:
        expected = _alpha_oracle(rows, level)
    except InsufficientData:
        with pytest.raises(InsufficientData):
            krippendorff_alpha(RatingsMatrix(rows, level))
        return
    actual = krippendorff_alpha(RatingsMatrix(rows, level))
    assert actual == pytest.approx(expected, abs=1e-12)


def test_alpha_matches_oracle_exhaustively_on_small_matrices():
    """Every 2x3 and 3x2 matrix over {1, 2, 3, missing}, all levels."""
    symbols = (1, 2, 3, None)
    for level in ("nominal", "ordinal", "interval"):
        for cells in itertools.product(symbols, repeat=6):
            _assert_matches_oracle((cells[:3], cells[3:]), level)
            _assert_matches_oracle((cells[:2], cells[2:4], cells[4:]), level)


_matrix_rows = st.integers(2, 4).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda i: st.lists(
            st.lists(st.sampled_from([1, 2, 3, None]), min_size=i, max_size=i).map(tuple),
            min_size=r,
            max_size=r,
        ).map(tuple)
    )
)


@settings(max_examples=250, deadline=None)
@given(rows=_matrix_rows, data=st.data())
def test_alpha_invariant_to_rater_relabeling_and_item_order(rows, data):
    level = data.draw(st.sampled_from(["nominal", "ordinal", "interval"]))
    row_order = data.draw(st.permutations(range(len(rows))))
    col_order = data.draw(st.permutations(range(len(rows[0]))))
    shuffled = tuple(
        tuple(rows[r][c] for c in col_order) for r in row_order
    )
    try:
        original = krippendorff_alpha(RatingsMatrix(rows, level))
    except InsufficientData:
        with pytest.raises(InsufficientData):
            krippendorff_alpha(RatingsMatrix(shuffled, level))
        return
    assert krippendorff_alpha(RatingsMatrix(shuffled, level)) == pytest.approx(
        original, abs=1e-9
    )


# ---------------------------------------------------------------------------
# Pearson and monotonicity


def test_pearson_known_values():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [6, 4, 2]) == pytest.approx(-1.0)
    assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)


def test_pearson_validation_and_zero_variance():
    with pytest.raises(ValueError, match="equal length"):
        pearson([1, 2], [1, 2, 3])
    with pytest.raises(ValueError, match="at least 2"):
        pearson([1], [2])
    with pytest.raises(ZeroVariance):
        pearson([1, 2, 3], [5, 5, 5])
    with pytest.raises(ZeroVariance):
        pearson([4, 4, 4], [1, 2, 3])


@settings(max_examples=150)
@given(
    xs=st.lists(st.integers(-50, 50), min_size=3, max_size=8, unique=True),
    a=st.sampled_from([-3.0, -0.5, 0.5, 2.0]),
    b=st.floats(-10, 10),
)
def test_pearson_affine_invariance(xs, a, b):
    ys = [float(x) ** 2 + x for x in xs]
    try:
        base = pearson(xs, ys)
    except ZeroVariance:
        return
    transformed = pearson([a * x + b for x in xs], ys)
    assert transformed == pytest.approx(math.copysign(1, a) * base, abs=1e-9)


def test_monotonic_decrease_is_strict():
    assert monotonic_decrease([0.9, 0.5, 0.1])
    assert not monotonic_decrease([0.9, 0.9, 0.1])
    assert not monotonic_decrease([0.1, 0.5])
    with pytest.raises(ValueError):
        monotonic_decrease([0.5])


@settings(max_examples=100)
@given(
    ys=st.lists(st.integers(0, 1000), min_size=2, max_size=7, unique=True).map(
        lambda v: [x / 1000 for x in sorted(v, reverse=True)]
    )
)
def test_strict_decrease_implies_negative_correlation(ys):
    levels = list(range(len(ys)))
    assert monotonic_decrease(ys)
    assert pearson(levels, ys) < 0


# ---------------------------------------------------------------------------
# curves


def test_summarize_curve_attaches_rho_and_verdict():
    curve = summarize_curve((0.0, 25.0, 50.0), (0.9, 0.5, 0.1))
    assert curve.pearson_rho == pytest.approx(-1.0)
    assert curve.strictly_monotonic_decreasing
    assert not curve.zero_variance


def test_summarize_curve_flat_values_flag_zero_variance():
    curve = summarize_curve((0.0, 25.0, 50.0), (0.5, 0.5, 0.5))
    assert curve.pearson_rho is None
    assert curve.zero_variance
    assert not curve.strictly_monotonic_decreasing


def test_sensitivity_curve_validates_level_axis():
    with pytest.raises(ValueError, match="strictly increasing"):
        SensitivityCurve((0.0, 0.0), (1.0, 0.5), None, False)
    with pytest.raises(ValueError, match="one value per level"):
        SensitivityCurve((0.0, 25.0), (1.0,), None, False)


def test_sensitivity_curve_derives_per_trial_seeds():
    seen = []

    def runner(level, trial_seed):
        seen.append((level, trial_seed))
        return [1.0 - level / 100, 1.0 - level / 100 - 0.02]

    curve = sensitivity_curve(runner, (0.0, 50.0), trials_per_level=2, seed=13)
    assert seen == [
        (0.0, derive_seed(13, "sensitivity", "0.0:0")),
        (0.0, derive_seed(13, "sensitivity", "0.0:1")),
        (50.0, derive_seed(13, "sensitivity", "50.0:0")),
        (50.0, derive_seed(13, "sensitivity", "50.0:1")),
    ]
    assert curve.values == (0.99, 0.49)
    assert curve.strictly_monotonic_decreasing


def test_sensitivity_curve_error_paths():
    with pytest.raises(ValueError, match="trials_per_level"):
        sensitivity_curve(lambda l, s: [1.0], (0.0,), trials_per_level=0)
    with pytest.raises(ValidationError, match="no scores"):
        sensitivity_curve(lambda l, s: [], (0.0, 10.0))


# ---------------------------------------------------------------------------
# precision comparison


def _injection(doc_ids, replaced, level, topic_id="t1"):
    docs = [EvidenceDocument(doc_id=i, text=f"text {i}") for i in doc_ids]
    pool = [
        EvidenceDocument(doc_id=f"x{j}", text=f"pool {j}") for j in range(len(replaced))
    ]
    resulting = list(docs)
    for pos, rep in zip(sorted(replaced), pool):
        resulting[pos] = rep
    return IrrelevantInjection(
        topic_id=topic_id,
        level_percent=level,
        replaced_positions=tuple(sorted(replaced)),
        injected_doc_ids=tuple(d.doc_id for d in pool),
        original_doc_ids=tuple(doc_ids),
        resulting_docs=tuple(resulting),
        truth_mask=tuple(i not in set(replaced) for i in range(len(doc_ids))),
    )


def _fg_verdict(per_doc):
    return JudgeVerdict(
        format="listwise_rag_fine_grained",
        context_relevance_overall=sum(per_doc) / len(per_doc),
        context_relevance_per_doc=tuple(per_doc),
    )


def _pass_through_verdict(injection, relevant):
    return _fg_verdict(
        [
            1.0 if kept and doc_id in relevant else 0.0
            for kept, doc_id in zip(injection.truth_mask, injection.original_doc_ids)
        ]
    )


def test_pass_through_verdicts_yield_zero_error():
    doc_ids = [f"d{i}" for i in range(4)]
    relevant = {"d0", "d1", "d3"}
    qrels = Qrels(entries={("t1", d): 1 for d in relevant})
    injections = [
        _injection(doc_ids, [], 0.0),
        _injection(doc_ids, [1], 25.0),
        _injection(doc_ids, [0, 2], 50.0),
        _injection(doc_ids, [0, 1, 2, 3], 100.0),
    ]
    verdicts = [_pass_through_verdict(inj, relevant) for inj in injections]
    rows = precision_comparison(injections, verdicts, qrels)
    assert [row.level_percent for row in rows] == [0.0, 25.0, 50.0, 100.0]
    for row in rows:
        assert row.absolute_error == 0.0
        assert row.predicted_precision == row.true_precision
    assert rows[0].true_precision == pytest.approx(0.75)
    assert rows[3].true_precision == 0.0


def test_precision_comparison_averages_within_level():
    doc_ids = [f"d{i}" for i in range(4)]
    qrels = Qrels(entries={("t1", d): 1 for d in doc_ids})
    injections = [
        _injection(doc_ids, [0], 25.0),
        _injection(doc_ids, [1], 25.0),
    ]
    verdicts = [_fg_verdict([1.0, 1.0, 1.0, 0.0]), _fg_verdict([0.0, 0.0, 1.0, 1.0])]
    (row,) = precision_comparison(injections, verdicts, qrels)
    assert row.true_precision == pytest.approx(0.75)
    assert row.predicted_precision == pytest.approx(0.625)
    assert row.absolute_error == pytest.approx(0.125)


def test_precision_comparison_alignment_errors():
    doc_ids = ["d0", "d1"]
    qrels = Qrels(entries={("t1", "d0"): 1})
    injection = _injection(doc_ids, [], 0.0)
    with pytest.raises(AlignmentError, match="injections but"):
        precision_comparison([injection], [], qrels)
    overall_only = JudgeVerdict(format="direct", context_relevance_overall=1.0)
    with pytest.raises(AlignmentError, match="no\\s+per-document"):
        precision_comparison([injection], [overall_only], qrels)
    with pytest.raises(AlignmentError, match="scores for"):
        precision_comparison([injection], [_fg_verdict([1.0])], qrels)


def test_precision_rows_from_columns():
    rows = precision_rows_from_columns((0.0, 10.0), (0.505, 0.344), (0.548, 0.467))
    assert rows[0].absolute_error == pytest.approx(0.043)
    assert rows[1].absolute_error == pytest.approx(0.123)
    with pytest.raises(AlignmentError):
        precision_rows_from_columns((0.0,), (0.5, 0.4), (0.5,))


# ---------------------------------------------------------------------------
# consistency grid


def test_consistency_grid_covers_product_with_derived_seeds():
    calls = []

    def runner(irr, hall, cell_seed):
        calls.append((irr, hall, cell_seed))
        value = 1.0 - irr / 100 - hall / 10
        return [(value, value / 2, value / 4), (value, value / 2, value / 4)]

    grid = consistency_grid(runner, (0.0, 50.0), (0, 2), seed=13)
    assert set(grid.cells) == {(0.0, 0), (0.0, 2), (50.0, 0), (50.0, 2)}
    assert calls == [
        (0.0, 0, derive_seed(13, "grid", "0.0:0")),
        (0.0, 2, derive_seed(13, "grid", "0.0:2")),
        (50.0, 0, derive_seed(13, "grid", "50.0:0")),
        (50.0, 2, derive_seed(13, "grid", "50.0:2")),
    ]
    cell = grid.cells[(50.0, 2)]
    assert cell.context_relevance == pytest.approx(0.3)
    assert cell.groundedness == pytest.approx(0.15)
    assert cell.overall_quality == pytest.approx(0.075)
    assert cell.runs == 2


def test_consistency_grid_error_paths():
    with pytest.raises(ValueError, match="non-empty"):
        consistency_grid(lambda i, h, s: [(1.0, 1.0, 1.0)], (), (0,))
    with pytest.raises(ValidationError, match="no results"):
        consistency_grid(lambda i, h, s: [], (0.0,), (0,))


def test_consistency_grid_requires_complete_cells():
    cell = GridCell(1.0, 1.0, 1.0, runs=1)
    with pytest.raises(ValueError, match="Cartesian product"):
        ConsistencyGrid((0.0, 50.0), (0,), {(0.0, 0): cell})
    with pytest.raises(ValueError, match="at least one run"):
        ConsistencyGrid((0.0,), (0,), {(0.0, 0): GridCell(1.0, 1.0, 1.0, runs=0)})
