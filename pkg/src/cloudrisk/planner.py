"""Treatment planning: plan evaluation, portfolio selection, what-if.

A plan is a set of countermeasure ids. Evaluating it applies each
selected countermeasure's reduction to every risk (reductions combine
multiplicatively), yielding per-risk residual levels. A plan is feasible
when every residual is strictly below the tolerance threshold.

"Cost effective" is operationalized as: minimize total plan cost subject
to feasibility. Costs default to 1.0, which reduces the objective to
fewest-countermeasures. Ties break deterministically: lower cost, then
fewer countermeasures, then lexicographically smallest id set.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from . import model
from .errors import StructuralError, UnknownIdError, ValidationError

DEFAULT_EXACT_CAP = 20


@dataclass(frozen=True)
class TreatmentPlan:
    countermeasures: tuple[str, ...]
    total_cost: float


@dataclass(frozen=True)
class PlanEvaluation:
    plan: tuple[str, ...]
    total_cost: float
    alpha: float
    levels: Mapping[str, float]
    crrs: Mapping[str, float]
    residuals: Mapping[str, float]
    # risks with at least one selected applicable countermeasure
    treated: tuple[str, ...]
    grl_before: float
    grl_after: float
    grr: float
    feasible: bool
    rounding_mode: str = "full"


def _check_matrix(
    levels: Mapping[str, float], matrix: Mapping[str, Mapping[str, float]]
) -> None:
    missing = [
        f"countermeasure {cm!r} has no entry for risk {rid!r}"
        for cm, row in matrix.items()
        for rid in levels
        if rid not in row
    ]
    if missing:
        raise StructuralError("reduction matrix does not cover all risks", missing)


def evaluate_plan(
    levels: Mapping[str, float],
    matrix: Mapping[str, Mapping[str, float]],
    plan: Iterable[str],
    alpha: float,
    costs: Mapping[str, float] | None = None,
) -> PlanEvaluation:
    """Apply a plan to the assessed levels and measure the outcome.

    A countermeasure is applicable to a risk when its reduction there is
    positive; the global risk reduction sums combined reductions over the
    risks that received at least one applicable countermeasure.
    """
    plan_ids = list(plan)
    if len(set(plan_ids)) != len(plan_ids):
        raise ValidationError("plan contains duplicate countermeasure ids")
    unknown = sorted(set(plan_ids) - matrix.keys())
    if unknown:
        raise UnknownIdError(
            "plan references unknown countermeasures: " + ", ".join(unknown)
        )
    _check_matrix(levels, matrix)
    selected = sorted(plan_ids)
    crrs = {}
    residuals = {}
    treated = []
    for rid, level in levels.items():
        reductions = [matrix[cm][rid] for cm in selected if matrix[cm][rid] > 0.0]
        crr = model.combined_risk_reduction(reductions)
        crrs[rid] = crr
        residuals[rid] = model.residual_level(level, crr)
        if reductions:
            treated.append(rid)
    total_cost = sum((costs or {}).get(cm, 1.0) for cm in selected)
    return PlanEvaluation(
        plan=tuple(selected),
        total_cost=total_cost,
        alpha=alpha,
        levels=dict(levels),
        crrs=crrs,
        residuals=residuals,
        treated=tuple(treated),
        grl_before=model.global_risk_level(levels.values()),
        grl_after=model.global_risk_level(residuals.values()),
        grr=model.global_risk_reduction(crrs[rid] for rid in treated),
        feasible=all(r < alpha for r in residuals.values()),
    )


def what_if(
    levels: Mapping[str, float],
    matrix: Mapping[str, Mapping[str, float]],
    plan: Iterable[str],
    toggle: str,
    alpha: float,
    costs: Mapping[str, float] | None = None,
) -> PlanEvaluation:
    """Evaluate the plan with one countermeasure toggled in or out.

    Pure recomputation: toggling the same id twice returns the original
    evaluation.
    """
    if toggle not in matrix:
        raise UnknownIdError(f"unknown countermeasure {toggle!r}")
    current = set(plan)
    toggled = current ^ {toggle}
    return evaluate_plan(levels, matrix, toggled, alpha, costs)


def _applicable_ids(matrix: Mapping[str, Mapping[str, float]]) -> list[str]:
    return sorted(
        cm for cm, row in matrix.items() if any(v > 0.0 for v in row.values())
    )


def optimize_plan(
    levels: Mapping[str, float],
    matrix: Mapping[str, Mapping[str, float]],
    costs: Mapping[str, float] | None = None,
    alpha: float = 0.25,
    mode: str = "exact",
    exact_cap: int = DEFAULT_EXACT_CAP,
) -> tuple[TreatmentPlan, PlanEvaluation]:
    """Select a feasible plan driving every residual below the threshold.

    exact: provably minimum-cost plan by enumerating countermeasure
    subsets (branch-and-bound on cost); refuses instances above
    ``exact_cap`` countermeasures. greedy: repeatedly add the
    countermeasure with the best global-level reduction per unit cost.

    When no plan can reach feasibility, the plan of all applicable
    countermeasures is returned, flagged infeasible, with its
    best-achievable residuals.
    """
    _check_matrix(levels, matrix)
    if mode not in ("exact", "greedy"):
        raise ValidationError(f"unknown optimizer mode {mode!r}")
    candidates = _applicable_ids(matrix)
    all_plan = evaluate_plan(levels, matrix, candidates, alpha, costs)
    if not all_plan.feasible:
        # not even everything helps; report best achievable
        plan = TreatmentPlan(all_plan.plan, all_plan.total_cost)
        return plan, all_plan

    if mode == "exact":
        chosen = _exact_search(levels, matrix, candidates, costs, alpha, exact_cap)
    else:
        chosen = _greedy_search(levels, matrix, candidates, costs, alpha)
    evaluation = evaluate_plan(levels, matrix, chosen, alpha, costs)
    return TreatmentPlan(evaluation.plan, evaluation.total_cost), evaluation


def _plan_key(ids: tuple[str, ...], cost: float):
    return (cost, len(ids), ids)


def _exact_search(levels, matrix, candidates, costs, alpha, exact_cap):
    if len(candidates) > exact_cap:
        raise ValidationError(
            f"exact mode capped at {exact_cap} countermeasures "
            f"({len(candidates)} applicable); use greedy"
        )
    risk_ids = list(levels)
    cost_of = {cm: (costs or {}).get(cm, 1.0) for cm in candidates}
    # factors[i] = running product of (1 - reduction) for risk i
    best_key = None
    best_ids = None

    def feasible(factors):
        return all(
            levels[rid] * factors[i] < alpha for i, rid in enumerate(risk_ids)
        )

    def recurse(idx, chosen, cost, factors):
        nonlocal best_key, best_ids
        if best_key is not None and cost > best_key[0]:
            return  # costs are non-negative; no extension can win
        if feasible(factors):
            key = _plan_key(tuple(chosen), cost)
            if best_key is None or key < best_key:
                best_key, best_ids = key, tuple(chosen)
            # supersets only add cost/cardinality; no need to extend
            return
        if idx == len(candidates):
            return
        cm = candidates[idx]
        # include candidate idx
        row = matrix[cm]
        new_factors = [
            f * (1.0 - row[rid]) if row[rid] > 0.0 else f
            for f, rid in zip(factors, risk_ids)
        ]
        chosen.append(cm)
        recurse(idx + 1, chosen, cost + cost_of[cm], new_factors)
        chosen.pop()
        # exclude candidate idx
        recurse(idx + 1, chosen, cost, factors)

    recurse(0, [], 0.0, [1.0] * len(risk_ids))
    assert best_ids is not None  # all-candidates plan was verified feasible
    return best_ids


def _greedy_search(levels, matrix, candidates, costs, alpha):
    cost_of = {cm: (costs or {}).get(cm, 1.0) for cm in candidates}
    chosen: set[str] = set()
    current = evaluate_plan(levels, matrix, chosen, alpha, costs)
    while not current.feasible:
        best = None
        for cm in candidates:
            if cm in chosen:
                continue
            trial = evaluate_plan(levels, matrix, chosen | {cm}, alpha, costs)
            gain = current.grl_after - trial.grl_after
            if gain <= 0.0:
                continue
            cost = cost_of[cm]
            rate = gain / cost if cost > 0 else float("inf")
            if best is None or rate > best[0] or (rate == best[0] and cm < best[1]):
                best = (rate, cm, trial)
        if best is None:
            break  # no progress possible
        chosen.add(best[1])
        current = best[2]
    return tuple(sorted(chosen))


def restrict_matrix(
    matrix: Mapping[str, Mapping[str, float]], plan: Sequence[str]
) -> dict[str, dict[str, float]]:
    """Rows of the reduction matrix for the selected countermeasures only."""
    return {cm: dict(matrix[cm]) for cm in plan}


def with_mode(evaluation: PlanEvaluation, mode: str) -> PlanEvaluation:
    """Tag an evaluation with the rounding mode a report will use."""
    return replace(evaluation, rounding_mode=mode)
