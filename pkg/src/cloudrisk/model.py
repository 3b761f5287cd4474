"""Core risk arithmetic.

Pure, side-effect-free functions; every other module delegates its
arithmetic here. All values are kept at full floating-point precision --
rounding is strictly a reporting concern (see :mod:`cloudrisk.reports`).

The quantities involved:

* objective weights ``w`` in [0, 1], summing to 1 across a profile
* risk likelihoods ``L`` in [0, 1]
* impacts ``I(risk, objective)`` in [0, 1] (0 = no loss of satisfaction,
  1 = total loss)
* a risk's level = ``L * sum_j(w_j * I_j)``, in [0, 1]
* the global risk level = plain sum of levels
* a countermeasure's reduction in [0, 1] (0 = no reduction, 1 = elimination)
* combined reduction of several countermeasures = ``1 - prod(1 - red_k)``
* residual level after treatment = ``level * (1 - combined_reduction)``
* global risk reduction = sum of combined reductions over treated risks
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import StructuralError, ValidationError

# Tolerance for the sum-to-one weight constraint. Wide enough for
# decimal-entry rounding, tight enough to catch real normalization errors.
WEIGHT_SUM_TOLERANCE = 1e-9


class Classification(str, Enum):
    ACCEPTABLE = "acceptable"
    UNACCEPTABLE = "unacceptable"


@dataclass(frozen=True)
class Objective:
    """A business objective with its dimensionless importance weight."""

    id: str
    name: str
    weight: float


@dataclass(frozen=True)
class RiskRecord:
    """An identified risk with its probability of occurrence."""

    id: str
    name: str
    likelihood: float


@dataclass(frozen=True)
class RiskLevelResult:
    risk_id: str
    level: float
    classification: Classification


@dataclass(frozen=True)
class WeightReport:
    """Outcome of weight validation; names offenders instead of raising."""

    ok: bool
    total: float
    out_of_range: tuple[str, ...]

    @property
    def message(self) -> str:
        if self.ok:
            return "weights valid"
        parts = []
        if self.out_of_range:
            parts.append("weights out of [0,1]: " + ", ".join(self.out_of_range))
        if abs(self.total - 1.0) > WEIGHT_SUM_TOLERANCE:
            parts.append(f"weights sum to {self.total!r}, expected 1")
        return "; ".join(parts)


def validate_weights(objectives: Sequence[Objective]) -> WeightReport:
    """Check that all weights lie in [0, 1] and sum to 1 (within tolerance).

    An empty objective set is a distinct error, not a violation report.
    """
    if not objectives:
        raise ValidationError("objective set is empty")
    offenders = tuple(o.id for o in objectives if not 0.0 <= o.weight <= 1.0)
    total = sum(o.weight for o in objectives)
    ok = not offenders and abs(total - 1.0) <= WEIGHT_SUM_TOLERANCE
    return WeightReport(ok=ok, total=total, out_of_range=offenders)


def risk_level(
    risk: RiskRecord,
    objectives: Sequence[Objective],
    impact_row: Mapping[str, float],
) -> float:
    """Severity of one risk: likelihood times the weighted impact sum.

    ``impact_row`` must cover every objective exactly once; a missing or
    extra entry is a structural error, never an implicit zero.
    """
    objective_ids = {o.id for o in objectives}
    missing = sorted(objective_ids - impact_row.keys())
    extra = sorted(impact_row.keys() - objective_ids)
    if missing or extra:
        details = [f"missing impact for objective {m!r}" for m in missing]
        details += [f"impact for unknown objective {e!r}" for e in extra]
        raise StructuralError(
            f"impact row for risk {risk.id!r} does not match objective set",
            details,
        )
    return risk.likelihood * sum(o.weight * impact_row[o.id] for o in objectives)


def global_risk_level(levels: Iterable[float]) -> float:
    """Plain sum of risk levels; empty input sums to 0."""
    return sum(levels)


def classify(level: float, alpha: float) -> Classification:
    """Acceptable iff level is strictly below the tolerance threshold.

    A level exactly equal to the threshold is unacceptable.
    """
    if level < alpha:
        return Classification.ACCEPTABLE
    return Classification.UNACCEPTABLE


def evaluate(
    objectives: Sequence[Objective],
    risks: Sequence[RiskRecord],
    impacts: Mapping[str, Mapping[str, float]],
    alpha: float,
) -> list[RiskLevelResult]:
    """Level and classification for every risk, in register order.

    ``impacts`` maps risk id -> objective id -> impact. Weights must have
    been validated by the caller; the impact rows are checked here.
    """
    results = []
    for risk in risks:
        if risk.id not in impacts:
            raise StructuralError(
                "impact matrix incomplete",
                [f"missing impact row for risk {risk.id!r}"],
            )
        level = risk_level(risk, objectives, impacts[risk.id])
        results.append(RiskLevelResult(risk.id, level, classify(level, alpha)))
    return results


def combined_risk_reduction(reductions: Iterable[float]) -> float:
    """Joint mitigation of one risk under several countermeasures.

    ``1 - prod(1 - red_k)``: order-independent, 0 for the empty set, and
    exactly 1 as soon as any single countermeasure eliminates the risk.
    """
    remaining = 1.0
    for red in reductions:
        remaining *= 1.0 - red
    return 1.0 - remaining


def residual_level(level: float, crr: float) -> float:
    """Risk level left after applying a combined reduction."""
    return level * (1.0 - crr)


def global_risk_reduction(crrs: Iterable[float]) -> float:
    """Sum of combined reductions over the treated risks; empty sums to 0."""
    return sum(crrs)
