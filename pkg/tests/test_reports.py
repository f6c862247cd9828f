"""Table rendering and JSON record emission."""

import json

import pytest

from raarg.reports import (
    HALLUCINATION_AXIS,
    IRRELEVANCE_AXIS,
    ReportError,
    agreement_records,
    correlation,
    fraction,
    grid_records,
    precision_error_strings,
    precision_records,
    render_agreement_table,
    render_grid,
    render_precision_table,
    render_sensitivity_table,
    sensitivity_records,
    signed_fraction,
    write_json_report,
    write_text_report,
)
from raarg.validation import (
    ConsistencyGrid,
    GridCell,
    precision_rows_from_columns,
    summarize_curve,
)


def test_fraction_drops_leading_zero():
    assert fraction(0.548) == ".548"
    assert fraction(1.0) == "1.000"
    assert fraction(0.0) == ".000"
    assert fraction(-0.82) == "-.820"
    assert fraction(0.5, digits=2) == ".50"


def test_signed_fraction_keeps_explicit_sign():
    assert signed_fraction(0.043) == "+.043"
    assert signed_fraction(-0.021) == "-.021"
    assert signed_fraction(0.0) == "+.000"
    # values past 1 keep their integer part untouched
    assert signed_fraction(1.5) == "+1.500"


def test_correlation_format():
    assert correlation(None) == "n/a"
    assert correlation(-0.82) == "-0.82"
    assert correlation(-1.0) == "-1.00"
    assert correlation(0.8) == "0.80"


def _two_curves():
    falling = summarize_curve((0.0, 25.0, 50.0), (1.0, 0.5, 0.0))
    flat = summarize_curve((0.0, 25.0, 50.0), (0.5, 0.5, 0.5))
    return [("direct", falling), ("static", flat)]


def test_sensitivity_table_layout():
    text = render_sensitivity_table(_two_curves())
    assert text == (
        "% Irrelevant Context  direct  static\n"
        "0                      1.000    .500\n"
        "25                      .500    .500\n"
        "50                      .000    .500\n"
        "rho                    -1.00     n/a\n"
        "Monotonic Decrease       yes      no\n"
    )


def test_sensitivity_table_rejects_mismatched_axes():
    short = summarize_curve((0.0, 25.0), (1.0, 0.5))
    with pytest.raises(ReportError, match="different level axis"):
        render_sensitivity_table([*_two_curves(), ("odd", short)])
    with pytest.raises(ReportError, match="no curves"):
        render_sensitivity_table([])


def test_sensitivity_records_carry_curve_fields():
    payload = sensitivity_records(_two_curves())
    assert payload["axis"] == IRRELEVANCE_AXIS
    direct, static = payload["curves"]
    assert direct["label"] == "direct"
    assert direct["levels"] == [0.0, 25.0, 50.0]
    assert direct["pearson_rho"] == pytest.approx(-1.0)
    assert direct["strictly_monotonic_decreasing"] is True
    assert static["pearson_rho"] is None
    assert static["zero_variance"] is True
    json.dumps(payload)  # must be serializable as-is


def _precision_rows():
    return precision_rows_from_columns((0.0, 10.0), (0.505, 0.344), (0.548, 0.467))


def test_precision_table_brackets_signed_errors():
    text = render_precision_table(_precision_rows())
    assert text == (
        "% Irrelevant Context  True Precision  Predicted Precision\n"
        "0                               .505         .548 (+.043)\n"
        "10                              .344         .467 (+.123)\n"
    )
    assert precision_error_strings(_precision_rows()) == ("+.043", "+.123")
    with pytest.raises(ReportError, match="no precision rows"):
        render_precision_table([])


def test_precision_records_include_error_string():
    records = precision_records(_precision_rows())
    assert records[0]["level_percent"] == 0.0
    assert records[0]["error_string"] == "+.043"
    assert records[1]["absolute_error"] == pytest.approx(0.123)


def _grid():
    cells = {
        (irr, hall): GridCell(0.9 - irr / 100, 0.8 - hall / 10, 0.7 - hall / 20, runs=2)
        for irr in (0.0, 50.0)
        for hall in (0, 2)
    }
    return ConsistencyGrid((0.0, 50.0), (0, 2), cells)


def test_grid_renders_one_block_per_metric():
    text = render_grid(_grid())
    blocks = text.split("\n\n")
    assert len(blocks) == 3
    assert blocks[0].startswith(
        f"context_relevance ({IRRELEVANCE_AXIS} \\ {HALLUCINATION_AXIS})"
    )
    # context_relevance varies down the irrelevance axis only
    assert "0                                                                  .900  .900" in blocks[0]
    assert "50                                                                 .400  .400" in blocks[0]
    # groundedness varies across the hallucination axis only
    assert blocks[1].splitlines()[1].endswith(".800  .600")
    assert blocks[2].startswith("overall_quality")


def test_grid_records_sorted_by_cell():
    payload = grid_records(_grid())
    assert payload["irrelevance_levels"] == [0.0, 50.0]
    keys = [
        (c["irrelevance_percent"], c["hallucinated_sentences"])
        for c in payload["cells"]
    ]
    assert keys == sorted(keys)
    assert payload["cells"][0]["runs"] == 2
    json.dumps(payload)


def test_agreement_table_handles_missing_values():
    text = render_agreement_table(
        [("argument_quality_human", 0.685, 0.843), ("flat", None, 0.5)]
    )
    assert text == (
        "Ratings                 Alpha (nominal)  Alpha (interval)\n"
        "argument_quality_human             .685              .843\n"
        "flat                                n/a              .500\n"
    )
    records = agreement_records([("flat", None, 0.5)])
    assert records == [{"label": "flat", "alpha_nominal": None, "alpha_interval": 0.5}]
    with pytest.raises(ReportError, match="no agreement rows"):
        render_agreement_table([])


def test_report_files_are_deterministic(tmp_path):
    text_path = tmp_path / "table.txt"
    json_path = tmp_path / "table.json"
    table = render_precision_table(_precision_rows())
    payload = {"b": 1, "a": [2, 3]}
    write_text_report(text_path, table)
    write_json_report(json_path, payload)
    first = (text_path.read_bytes(), json_path.read_bytes())
    write_text_report(text_path, table)
    write_json_report(json_path, payload)
    assert (text_path.read_bytes(), json_path.read_bytes()) == first
    assert json_path.read_text().startswith('{\n  "a"')  # keys sorted
    assert json_path.read_text().endswith("\n")
