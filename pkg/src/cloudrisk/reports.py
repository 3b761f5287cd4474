"""Report rendering and display rounding.

All arithmetic upstream is full precision; this module owns the two
display modes:

* ``full`` -- every value printed with its full significant digits,
  aggregates computed from the full-precision values;
* ``paper-compat`` -- every displayed value rounded to 2 decimals
  (half-up) and displayed aggregates computed from those rounded values,
  reproducing the convention of classic worked examples where a summary
  row is the sum of the rounded entries above it.

The two modes may disagree on displayed digits and displayed aggregates,
never on classifications (those are always derived from full precision).
Reports carry no timestamps; output is a pure function of the inputs.
"""

from __future__ import annotations

import csv
import io
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from .errors import ValidationError
from .planner import PlanEvaluation
from .registry import AssessmentSnapshot, MonitoringReport

MODE_FULL = "full"
MODE_PAPER = "paper-compat"
MODES = (MODE_FULL, MODE_PAPER)

FORMAT_TEXT = "text"
FORMAT_CSV = "csv"
FORMATS = (FORMAT_TEXT, FORMAT_CSV)


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValidationError(f"unknown rounding mode {mode!r}; use one of {MODES}")
    return mode


def check_format(fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValidationError(f"unknown report format {fmt!r}; use one of {FORMATS}")
    return fmt


def round2(value: float) -> Decimal:
    """Half-up 2-decimal rounding on the decimal representation.

    Goes through the shortest decimal string so that e.g. 0.105 rounds up
    to 0.11 instead of tripping over its binary representation.
    """
    return Decimal(repr(float(value))).quantize(Decimal("0.01"), ROUND_HALF_UP)


def full_str(value: float) -> str:
    return repr(float(value))


def display(value: float, mode: str) -> str:
    if mode == MODE_PAPER:
        return str(round2(value))
    return full_str(value)


def display_sum(values: Iterable[float], mode: str) -> str:
    """Aggregate for display: sums rounded values in paper-compat mode."""
    values = list(values)
    if mode == MODE_PAPER:
        return str(sum((round2(v) for v in values), Decimal("0.00")))
    return full_str(sum(values))


def reduction_percent(grl_before: str, grl_after: str) -> str:
    """Whole-percent risk reduction from the displayed aggregates."""
    before = Decimal(grl_before)
    after = Decimal(grl_after)
    if before == 0:
        return "0%"
    ratio = (before - after) / before * 100
    return str(ratio.quantize(Decimal("1"), ROUND_HALF_UP)) + "%"


# ---------------------------------------------------------------------------
# table rendering
# ---------------------------------------------------------------------------


def _render_text(sections: Sequence[tuple[str, list[list[str]]]]) -> str:
    out = []
    for title, rows in sections:
        out.append(f"== {title} ==")
        if rows:
            widths = [
                max(len(row[i]) for row in rows) for i in range(len(rows[0]))
            ]
            for row in rows:
                out.append(
                    "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                )
        out.append("")
    return "\n".join(out).rstrip() + "\n"


def _render_csv(sections: Sequence[tuple[str, list[list[str]]]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for title, rows in sections:
        writer.writerow([f"# {title}"])
        writer.writerows(rows)
        writer.writerow([])
    return buf.getvalue()


def _render(sections, fmt: str) -> str:
    check_format(fmt)
    if fmt == FORMAT_CSV:
        return _render_csv(sections)
    return _render_text(sections)


def render_table(title: str, rows: list[list[str]], fmt: str = FORMAT_TEXT) -> str:
    """Render one titled table in the chosen format."""
    return _render([(title, rows)], fmt)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def levels_report(snapshot: AssessmentSnapshot, mode: str, fmt: str = FORMAT_TEXT) -> str:
    """Risk levels with the global level, plus the classification table."""
    check_mode(mode)
    level_rows = [["risk", "level"]]
    for risk in snapshot.risks:
        level_rows.append([risk.id, display(snapshot.levels[risk.id], mode)])
    level_rows.append(
        ["GRL", display_sum((snapshot.levels[r.id] for r in snapshot.risks), mode)]
    )
    class_rows = [["risk", "classification"]]
    for risk in snapshot.risks:
        class_rows.append([risk.id, snapshot.classifications[risk.id]])
    sections = [
        (
            f"risk levels (org {snapshot.org_id}, mode {mode})",
            level_rows,
        ),
        (
            f"classification (alpha {full_str(snapshot.alpha)})",
            class_rows,
        ),
    ]
    return _render(sections, fmt)


def treatment_report(
    evaluation: PlanEvaluation, fmt: str = FORMAT_TEXT,
    reductions=None,
) -> str:
    """Treatment outcome: reduction matrix, before/after levels, reduction line.

    ``reductions`` is the countermeasure -> risk -> reduction mapping used
    by the evaluation; when given, the matrix table (selected rows,
    treated-risk columns, combined-reduction footer) is included.
    """
    mode = check_mode(evaluation.rounding_mode)
    sections = []
    if reductions is not None and evaluation.plan:
        treated = list(evaluation.treated)
        matrix_rows = [["cm"] + treated]
        for cm in evaluation.plan:
            matrix_rows.append(
                [cm] + [display(reductions[cm][rid], mode) for rid in treated]
            )
        matrix_rows.append(
            ["CRR"] + [display(evaluation.crrs[rid], mode) for rid in treated]
        )
        sections.append(
            (f"reduction matrix (plan {','.join(evaluation.plan)})", matrix_rows)
        )
    before_after = [["risk", "before", "after"]]
    for rid in evaluation.levels:
        before_after.append(
            [
                rid,
                display(evaluation.levels[rid], mode),
                display(evaluation.residuals[rid], mode),
            ]
        )
    grl_before = display_sum(evaluation.levels.values(), mode)
    grl_after = display_sum(evaluation.residuals.values(), mode)
    before_after.append(["GRL", grl_before, grl_after])
    sections.append((f"risk levels before/after treatment (mode {mode})", before_after))
    summary = [
        ["GRR", display(evaluation.grr, mode)],
        ["total cost", full_str(evaluation.total_cost)],
        ["feasible", "yes" if evaluation.feasible else "no"],
        ["risk reduction", reduction_percent(grl_before, grl_after)],
    ]
    sections.append(("summary", summary))
    return _render(sections, fmt)


def monitoring_report(
    diff: MonitoringReport, mode: str, fmt: str = FORMAT_TEXT
) -> str:
    """Per-risk drift between two snapshots of the same organization."""
    check_mode(mode)
    rows = [["risk", "a", "b", "delta"]]
    for rid, (level_a, level_b, _) in diff.common.items():
        if mode == MODE_PAPER:
            delta = str(round2(level_b) - round2(level_a))
        else:
            delta = full_str(level_b - level_a)
        rows.append([rid, display(level_a, mode), display(level_b, mode), delta])
    if mode == MODE_PAPER:
        levels_a = [v[0] for v in diff.common.values()] + list(diff.retired.values())
        levels_b = [v[1] for v in diff.common.values()] + list(diff.added.values())
        grl_a = display_sum(levels_a, mode)
        grl_b = display_sum(levels_b, mode)
    else:
        grl_a = full_str(diff.grl_a)
        grl_b = full_str(diff.grl_b)
    sections = [
        (f"monitoring {diff.a_id} -> {diff.b_id} (org {diff.org_id}, mode {mode})", rows)
    ]
    changes = [["risk", "change"]]
    for rid, (class_a, class_b) in diff.flips.items():
        changes.append([rid, f"{class_a} -> {class_b}"])
    for rid in diff.added:
        changes.append([rid, "newly identified"])
    for rid in diff.retired:
        changes.append([rid, "retired"])
    if len(changes) == 1:
        changes.append(["(none)", ""])
    sections.append(("changes", changes))
    if mode == MODE_PAPER:
        grl_delta = str(Decimal(grl_b) - Decimal(grl_a))
    else:
        grl_delta = full_str(diff.grl_delta)
    sections.append(
        (
            "global level",
            [["a", grl_a], ["b", grl_b], ["delta", grl_delta]],
        )
    )
    return _render(sections, fmt)
