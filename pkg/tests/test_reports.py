"""Tests for display rounding and report rendering."""

import random
from decimal import Decimal

import pytest

from cloudrisk import reports
from cloudrisk.errors import ValidationError
from cloudrisk.planner import evaluate_plan, with_mode
from cloudrisk.reports import (
    display_sum,
    levels_report,
    monitoring_report,
    reduction_percent,
    round2,
    treatment_report,
)
from cloudrisk.registry import diff_snapshots

import at_fixture as at
from test_registry import at_snapshot, treated_outcome


class TestRounding:
    def test_half_up_on_decimal_representation(self):
        # 0.105 stored as a binary float is slightly below 0.105, but the
        # displayed value must still round up
        assert round2(0.105) == Decimal("0.11")
        assert round2(0.459) == Decimal("0.46")
        assert round2(0.504) == Decimal("0.50")
        assert round2(0.1225) == Decimal("0.12")
        assert round2(0.107) == Decimal("0.11")
        assert round2(0.00918) == Decimal("0.01")
        assert round2(0.0504) == Decimal("0.05")

    def test_paper_mode_aggregates_from_rounded_values(self):
        levels = list(at.EXPECTED_LEVELS.values())
        assert display_sum(levels, "paper-compat") == "1.30"
        residuals = [0.459 * 0.02, 0.107, 0.1225, 0.504 * 0.1, 0.105]
        assert display_sum(residuals, "paper-compat") == "0.40"

    def test_full_mode_aggregates_from_full_precision(self):
        levels = list(at.EXPECTED_LEVELS.values())
        assert display_sum(levels, "full") == repr(sum(levels))

    def test_reduction_percent(self):
        assert reduction_percent("1.30", "0.40") == "69%"
        assert reduction_percent("1.0", "1.0") == "0%"
        assert reduction_percent("0", "0") == "0%"

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValidationError):
            reports.check_mode("banker")


class TestLevelsReport:
    def test_paper_compat_table_tokens(self):
        text = levels_report(at_snapshot(), "paper-compat")
        rows = [line.split() for line in text.splitlines() if line]
        assert ["r1", "0.46"] in rows
        assert ["r2", "0.11"] in rows
        assert ["r3", "0.12"] in rows
        assert ["r4", "0.50"] in rows
        assert ["r5", "0.11"] in rows
        assert ["GRL", "1.30"] in rows
        assert ["r1", "unacceptable"] in rows
        assert ["r4", "unacceptable"] in rows

    def test_full_mode_values(self):
        snap = at_snapshot()
        text = levels_report(snap, "full")
        assert repr(snap.levels["r1"]) in text  # full digits, no re-rounding
        assert repr(snap.grl) in text
        assert snap.grl == pytest.approx(1.2975, abs=1e-12)

    def test_csv_format(self):
        text = levels_report(at_snapshot(), "paper-compat", "csv")
        assert "r1,0.46" in text
        assert "GRL,1.30" in text

    def test_modes_never_disagree_on_classification(self):
        rng = random.Random(501)
        from test_registry import random_profile, random_snapshot

        for _ in range(200):
            snap = random_snapshot(rng, random_profile(rng))
            paper = levels_report(snap, "paper-compat")
            full = levels_report(snap, "full")
            # classification sections must be identical
            assert paper.split("== classification")[1] == \
                full.split("== classification")[1]


class TestTreatmentReport:
    def evaluation(self, mode):
        ev = evaluate_plan(
            at.EXPECTED_LEVELS, at.REDUCTIONS, ["c1", "c2", "c3"], at.ALPHA
        )
        return with_mode(ev, mode)

    def test_paper_compat_before_after(self):
        text = treatment_report(self.evaluation("paper-compat"),
                                reductions=at.REDUCTIONS)
        rows = [line.split() for line in text.splitlines() if line]
        assert ["r1", "0.46", "0.01"] in rows
        assert ["r4", "0.50", "0.05"] in rows
        assert ["GRL", "1.30", "0.40"] in rows
        assert ["GRR", "1.88"] in rows
        assert ["risk", "reduction", "69%"] in rows

    def test_reduction_matrix_section(self):
        text = treatment_report(self.evaluation("paper-compat"),
                                reductions=at.REDUCTIONS)
        rows = [line.split() for line in text.splitlines() if line]
        assert ["cm", "r1", "r4"] in rows
        assert ["c1", "0.80", "0.00"] in rows
        assert ["CRR", "0.98", "0.90"] in rows

    def test_full_mode_grl_after(self):
        text = treatment_report(self.evaluation("full"), reductions=at.REDUCTIONS)
        expected = repr(0.459 * 0.02 + 0.107 + 0.1225 + 0.504 * 0.1 + 0.105)
        assert expected in text

    def test_infeasible_flagged(self):
        ev = with_mode(
            evaluate_plan(at.EXPECTED_LEVELS, at.REDUCTIONS, ["c3"], at.ALPHA),
            "paper-compat",
        )
        text = treatment_report(ev, reductions=at.REDUCTIONS)
        assert "feasible" in text and "no" in text.split("feasible", 1)[1]


class TestMonitoringReport:
    def test_paper_compat_diff(self):
        diff = diff_snapshots(
            at_snapshot("before"), at_snapshot("after", treatment=treated_outcome())
        )
        text = monitoring_report(diff, "paper-compat")
        rows = [line.split() for line in text.splitlines() if line]
        assert ["r1", "0.46", "0.01", "-0.45"] in rows
        assert ["a", "1.30"] in rows
        assert ["b", "0.40"] in rows
        assert ["delta", "-0.90"] in rows
        assert any(row[:1] == ["r1"] and "unacceptable" in row for row in rows)

    def test_full_mode_diff(self):
        diff = diff_snapshots(
            at_snapshot("before"), at_snapshot("after", treatment=treated_outcome())
        )
        text = monitoring_report(diff, "full")
        assert repr(diff.grl_delta) in text
