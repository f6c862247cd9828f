"""Aligned plain-text tables and JSON records for run results.

Number formatting follows the conventions of the result tables this
package is meant to be eyeballed against: unit-interval values print as
three decimals without a leading zero (".505"), errors carry an
explicit sign ("+.043"), correlations keep the leading zero ("-0.82").
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Sequence

from .validation import ConsistencyGrid, PrecisionRow, SensitivityCurve

IRRELEVANCE_AXIS = "% Irrelevant Context"
HALLUCINATION_AXIS = "Sentences Hallucinated"

GRID_METRICS = ("context_relevance", "groundedness", "overall_quality")


class ReportError(Exception):
    pass


def fraction(value: float, digits: int = 3) -> str:
    """Three-decimal unit-interval rendering without the leading zero."""
    text = f"{value:.{digits}f}"
    if text.startswith("0."):
        return text[1:]
    if text.startswith("-0."):
        return "-" + text[2:]
    return text


def signed_fraction(value: float, digits: int = 3) -> str:
    """Signed error rendering: +.043 style."""
    text = f"{value:+.{digits}f}"
    return text.replace("+0.", "+.", 1).replace("-0.", "-.", 1)


def correlation(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def _level_label(level: float) -> str:
    if float(level) == int(level):
        return str(int(level))
    return f"{level:g}"


def _render_columns(rows: Sequence[Sequence[str]]) -> str:
    """Pad every column to its widest cell; first column left-aligned."""
    widths = [max(len(row[col]) for row in rows) for col in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])]
        cells.extend(cell.rjust(width) for cell, width in zip(row[1:], widths[1:]))
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# sensitivity (level x judge matrix with rho and monotonicity footer)


def render_sensitivity_table(
    curves: Sequence[tuple[str, SensitivityCurve]],
    axis_label: str = IRRELEVANCE_AXIS,
) -> str:
    if not curves:
        raise ReportError("no curves to render")
    levels = curves[0][1].axis_levels
    for label, curve in curves:
        if curve.axis_levels != levels:
            raise ReportError(f"curve {label!r} uses a different level axis")

    rows = [[axis_label, *(label for label, _ in curves)]]
    for i, level in enumerate(levels):
        rows.append(
            [_level_label(level), *(fraction(curve.values[i]) for _, curve in curves)]
        )
    rows.append(["rho", *(correlation(curve.pearson_rho) for _, curve in curves)])
    rows.append(
        [
            "Monotonic Decrease",
            *(
                ("yes" if curve.strictly_monotonic_decreasing else "no")
                for _, curve in curves
            ),
        ]
    )
    return _render_columns(rows)


def sensitivity_records(
    curves: Sequence[tuple[str, SensitivityCurve]],
    axis_label: str = IRRELEVANCE_AXIS,
) -> dict:
    return {
        "axis": axis_label,
        "curves": [
            {
                "label": label,
                "levels": list(curve.axis_levels),
                "values": list(curve.values),
                "pearson_rho": curve.pearson_rho,
                "strictly_monotonic_decreasing": curve.strictly_monotonic_decreasing,
                "zero_variance": curve.zero_variance,
            }
            for label, curve in curves
        ],
    }


# ---------------------------------------------------------------------------
# precision comparison (true vs predicted with bracketed signed errors)


def precision_error_strings(rows: Sequence[PrecisionRow]) -> tuple[str, ...]:
    """The emitted error column, one signed three-decimal string per row."""
    return tuple(signed_fraction(row.absolute_error) for row in rows)


def render_precision_table(
    rows: Sequence[PrecisionRow], axis_label: str = IRRELEVANCE_AXIS
) -> str:
    if not rows:
        raise ReportError("no precision rows to render")
    table = [[axis_label, "True Precision", "Predicted Precision"]]
    for row, error in zip(rows, precision_error_strings(rows)):
        table.append(
            [
                _level_label(row.level_percent),
                fraction(row.true_precision),
                f"{fraction(row.predicted_precision)} ({error})",
            ]
        )
    return _render_columns(table)


def precision_records(rows: Sequence[PrecisionRow]) -> list[dict]:
    return [
        {
            "level_percent": row.level_percent,
            "true_precision": row.true_precision,
            "predicted_precision": row.predicted_precision,
            "absolute_error": row.absolute_error,
            "error_string": error,
        }
        for row, error in zip(rows, precision_error_strings(rows))
    ]


# ---------------------------------------------------------------------------
# consistency grid (one block per metric)


def render_grid(grid: ConsistencyGrid) -> str:
    blocks = []
    for metric in GRID_METRICS:
        rows = [
            [
                f"{metric} ({IRRELEVANCE_AXIS} \\ {HALLUCINATION_AXIS})",
                *(_level_label(h) for h in grid.hallucination_levels),
            ]
        ]
        for irr in grid.irrelevance_levels:
            rows.append(
                [
                    _level_label(irr),
                    *(
                        fraction(getattr(grid.cells[(irr, hall)], metric))
                        for hall in grid.hallucination_levels
                    ),
                ]
            )
        blocks.append(_render_columns(rows))
    return "\n".join(blocks)


def grid_records(grid: ConsistencyGrid) -> dict:
    return {
        "irrelevance_levels": list(grid.irrelevance_levels),
        "hallucination_levels": list(grid.hallucination_levels),
        "cells": [
            {
                "irrelevance_percent": irr,
                "hallucinated_sentences": hall,
                "context_relevance": cell.context_relevance,
                "groundedness": cell.groundedness,
                "overall_quality": cell.overall_quality,
                "runs": cell.runs,
            }
            for (irr, hall), cell in sorted(grid.cells.items())
        ],
    }


# ---------------------------------------------------------------------------
# agreement (nominal and interval side by side)


def render_agreement_table(
    rows: Sequence[tuple[str, Optional[float], Optional[float]]]
) -> str:
    if not rows:
        raise ReportError("no agreement rows to render")
    table = [["Ratings", "Alpha (nominal)", "Alpha (interval)"]]
    for label, nominal, interval in rows:
        table.append(
            [
                label,
                "n/a" if nominal is None else fraction(nominal),
                "n/a" if interval is None else fraction(interval),
            ]
        )
    return _render_columns(table)


def agreement_records(
    rows: Sequence[tuple[str, Optional[float], Optional[float]]]
) -> list[dict]:
    return [
        {"label": label, "alpha_nominal": nominal, "alpha_interval": interval}
        for label, nominal, interval in rows
    ]


# ---------------------------------------------------------------------------
# file emission


def write_text_report(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def write_json_report(path: str | Path, payload) -> None:
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
