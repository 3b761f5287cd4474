"""Document schemas, ingestion and persistence.

Profiles, risk registers, impact matrices, the countermeasure catalog,
estimation-session files and assessment snapshots all live in versioned,
human-readable documents: JSON with a ``format`` tag, with matrices
additionally accepted as comma-separated tables. Unknown format versions
are rejected.

Real numbers are serialized as decimal strings carrying full significant
digits (``repr`` of the float), never as binary, so a snapshot reloaded
on any platform recomputes bit-for-bit.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import model
from .delphi import DelphiSession, QuantityRef, Round, ConsensusReport, QuantityStats
from .errors import (
    ConflictError,
    StructuralError,
    UnknownIdError,
    ValidationError,
)
from .model import Objective, RiskRecord
from .store import Store

PROFILE_FORMAT = "profile/1"
REGISTER_FORMAT = "risk-register/1"
MATRIX_FORMAT = "impact-matrix/1"
CATALOG_FORMAT = "catalog/1"
REDUCTION_FORMAT = "reduction-matrix/1"
SESSION_FORMAT = "delphi-session/1"
SESSION_STATE_FORMAT = "delphi-session-state/1"
ROUND_FORMAT = "delphi-round/1"
SNAPSHOT_FORMAT = "snapshot/1"

KNOWN_FORMATS = {
    PROFILE_FORMAT,
    REGISTER_FORMAT,
    MATRIX_FORMAT,
    CATALOG_FORMAT,
    REDUCTION_FORMAT,
    SESSION_FORMAT,
    SESSION_STATE_FORMAT,
    ROUND_FORMAT,
    SNAPSHOT_FORMAT,
}

REQUIREMENT_LEVELS = ("low", "medium", "high")


def fmt_real(value: float) -> str:
    """Decimal string with full significant digits; round-trips exactly."""
    return repr(float(value))


def parse_real(raw, where: str, lo: float = 0.0, hi: float = 1.0) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: {raw!r} is not a number") from None
    if not lo <= value <= hi:
        raise ValidationError(f"{where}: {value!r} out of [{lo}, {hi}]")
    return value


def _check_format(doc: dict, expected: str, where: str) -> None:
    fmt = doc.get("format")
    if fmt != expected:
        if fmt in KNOWN_FORMATS:
            raise ValidationError(f"{where}: document is {fmt!r}, expected {expected!r}")
        raise ValidationError(f"{where}: unknown format {fmt!r}")


def _read_source(source: str | Path) -> str:
    """Paths are read; strings containing newlines are taken as inline text."""
    if isinstance(source, Path):
        return source.read_text()
    if "\n" in source or source.lstrip().startswith("{"):
        return source
    return Path(source).read_text()


def _read_json(path: str | Path, where: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"{where}: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{where}: {path} is not valid JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# Organization profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SecurityRequirement:
    attribute: str
    level: str


@dataclass(frozen=True)
class OrganizationProfile:
    org_id: str
    name: str
    objectives: tuple[Objective, ...]
    security_requirements: tuple[SecurityRequirement, ...]
    tolerance: float


def profile_from_doc(doc: dict) -> OrganizationProfile:
    _check_format(doc, PROFILE_FORMAT, "profile")
    details: list[str] = []
    raw_objectives = doc.get("objectives") or []
    if not raw_objectives:
        raise ValidationError("profile: objectives must be a non-empty list")
    objectives = []
    for idx, entry in enumerate(raw_objectives):
        where = f"objectives[{idx}]"
        obj_id = entry.get("id")
        if not obj_id:
            details.append(f"{where}: missing id")
            continue
        try:
            weight = parse_real(entry.get("weight"), f"{where}.weight")
        except ValidationError as exc:
            details.append(str(exc))
            continue
        objectives.append(Objective(obj_id, entry.get("name", ""), weight))
    if details:
        raise ValidationError("profile: invalid objectives", details)
    if len({o.id for o in objectives}) != len(objectives):
        raise ValidationError("profile: duplicate objective ids")
    report = model.validate_weights(objectives)
    if not report.ok:
        raise ValidationError(f"profile: {report.message}")
    requirements = []
    for idx, entry in enumerate(doc.get("security_requirements", [])):
        level = str(entry.get("level", "")).lower()
        if level not in REQUIREMENT_LEVELS:
            details.append(
                f"security_requirements[{idx}].level: {entry.get('level')!r} "
                f"not one of {REQUIREMENT_LEVELS}"
            )
        requirements.append(SecurityRequirement(entry.get("attribute", ""), level))
    if details:
        raise ValidationError("profile: invalid security requirements", details)
    tolerance = parse_real(doc.get("tolerance"), "profile.tolerance")
    if not doc.get("org_id"):
        raise ValidationError("profile: missing org_id")
    return OrganizationProfile(
        org_id=doc["org_id"],
        name=doc.get("name", ""),
        objectives=tuple(objectives),
        security_requirements=tuple(requirements),
        tolerance=tolerance,
    )


def profile_to_doc(profile: OrganizationProfile) -> dict:
    return {
        "format": PROFILE_FORMAT,
        "org_id": profile.org_id,
        "name": profile.name,
        "objectives": [
            {"id": o.id, "name": o.name, "weight": fmt_real(o.weight)}
            for o in profile.objectives
        ],
        "security_requirements": [
            {"attribute": r.attribute, "level": r.level}
            for r in profile.security_requirements
        ],
        "tolerance": fmt_real(profile.tolerance),
    }


def load_profile(path: str | Path) -> OrganizationProfile:
    return profile_from_doc(_read_json(path, "profile"))


def save_profile(profile: OrganizationProfile, path: str | Path) -> None:
    Path(path).write_text(json.dumps(profile_to_doc(profile), indent=1))


def profile_fingerprint(profile: OrganizationProfile) -> str:
    canonical = json.dumps(profile_to_doc(profile), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def renormalize_objectives(objectives: Sequence[Objective]) -> list[Objective]:
    """Proportionally rescale weights to sum exactly to 1 (explicit fix)."""
    if not objectives:
        raise ValidationError("objective set is empty")
    total = sum(o.weight for o in objectives)
    if total <= 0:
        raise ValidationError("weights sum to zero; cannot renormalize")
    return [replace(o, weight=o.weight / total) for o in objectives]


# ---------------------------------------------------------------------------
# Risk register
# ---------------------------------------------------------------------------


def risks_from_doc(doc: dict) -> list[RiskRecord]:
    _check_format(doc, REGISTER_FORMAT, "risk register")
    risks = []
    for idx, entry in enumerate(doc.get("risks", [])):
        where = f"risks[{idx}]"
        if not entry.get("id"):
            raise ValidationError(f"risk register: {where} missing id")
        likelihood = parse_real(entry.get("likelihood"), f"{where}.likelihood")
        risks.append(RiskRecord(entry["id"], entry.get("name", ""), likelihood))
    if not risks:
        raise ValidationError("risk register: no risks")
    if len({r.id for r in risks}) != len(risks):
        raise ValidationError("risk register: duplicate risk ids")
    return risks


def risks_to_doc(org_id: str, risks: Sequence[RiskRecord]) -> dict:
    return {
        "format": REGISTER_FORMAT,
        "org_id": org_id,
        "risks": [
            {"id": r.id, "name": r.name, "likelihood": fmt_real(r.likelihood)}
            for r in risks
        ],
    }


def load_risks(path: str | Path) -> list[RiskRecord]:
    return risks_from_doc(_read_json(path, "risk register"))


# ---------------------------------------------------------------------------
# Impact matrix (dense; missing cells are errors, never implicit zeros)
# ---------------------------------------------------------------------------


def _parse_table(text: str, corner: str, where: str) -> tuple[list[str], dict]:
    """Parse a comma-separated table into (column ids, row dict)."""
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValidationError(f"{where}: empty table")
    header = [cell.strip() for cell in rows[0]]
    if not header or header[0] != corner:
        raise ValidationError(
            f"{where}: first header cell must be {corner!r}, got {header[:1]!r}"
        )
    columns = header[1:]
    table = {}
    for row in rows[1:]:
        cells = [cell.strip() for cell in row]
        row_id = cells[0]
        if row_id in table:
            raise ValidationError(f"{where}: duplicate row {row_id!r}")
        if len(cells) - 1 != len(columns):
            raise StructuralError(
                f"{where}: row {row_id!r} has {len(cells) - 1} cells, "
                f"expected {len(columns)}"
            )
        table[row_id] = dict(zip(columns, cells[1:]))
    return columns, table


def _matrix_from_cells(
    columns: list[str],
    table: dict,
    row_ids: list[str],
    column_ids: list[str],
    where: str,
    row_kind: str,
    column_kind: str,
) -> dict[str, dict[str, float]]:
    details = []
    for col in columns:
        if col not in column_ids:
            details.append(f"unknown {column_kind} column {col!r}")
    for col in column_ids:
        if col not in columns:
            details.append(f"missing {column_kind} column {col!r}")
    for row_id in table:
        if row_id not in row_ids:
            details.append(f"unknown {row_kind} row {row_id!r}")
    for row_id in row_ids:
        if row_id not in table:
            details.append(f"missing {row_kind} row {row_id!r}")
    if details:
        raise StructuralError(f"{where}: structure does not match register", details)
    matrix: dict[str, dict[str, float]] = {}
    for row_id in row_ids:
        matrix[row_id] = {}
        for col in column_ids:
            raw = table[row_id].get(col, "")
            if raw == "":
                raise StructuralError(f"{where}: missing cell ({row_id}, {col})")
            matrix[row_id][col] = parse_real(raw, f"{where}: cell ({row_id}, {col})")
    return matrix


def import_impact_matrix(
    source: str | Path,
    profile: OrganizationProfile,
    risks: Sequence[RiskRecord],
) -> dict[str, dict[str, float]]:
    """Load a dense risk x objective impact matrix from CSV or JSON.

    Every (risk, objective) cell must be present and in [0, 1]; errors
    name the offending (row, column).
    """
    text = _read_source(source)
    objective_ids = [o.id for o in profile.objectives]
    risk_ids = [r.id for r in risks]
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(stripped)
        _check_format(doc, MATRIX_FORMAT, "impact matrix")
        table = {
            row_id: {col: str(v) for col, v in cells.items()}
            for row_id, cells in doc.get("rows", {}).items()
        }
        columns = sorted({col for cells in table.values() for col in cells})
    else:
        columns, table = _parse_table(text, "risk_id", "impact matrix")
    return _matrix_from_cells(
        columns, table, risk_ids, objective_ids, "impact matrix", "risk", "objective"
    )


def impact_matrix_to_doc(
    org_id: str, matrix: Mapping[str, Mapping[str, float]]
) -> dict:
    return {
        "format": MATRIX_FORMAT,
        "org_id": org_id,
        "rows": {
            risk_id: {obj_id: fmt_real(v) for obj_id, v in sorted(row.items())}
            for risk_id, row in sorted(matrix.items())
        },
    }


def impact_matrix_from_doc(doc: dict) -> dict[str, dict[str, float]]:
    _check_format(doc, MATRIX_FORMAT, "impact matrix")
    return {
        risk_id: {
            obj_id: parse_real(raw, f"impact matrix: cell ({risk_id}, {obj_id})")
            for obj_id, raw in row.items()
        }
        for risk_id, row in doc.get("rows", {}).items()
    }


# ---------------------------------------------------------------------------
# Countermeasure catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CountermeasureRecord:
    id: str
    name: str
    tags: tuple[str, ...] = ()
    cost: float = 1.0
    provenance: str = ""


def catalog_from_doc(doc: dict) -> list[CountermeasureRecord]:
    _check_format(doc, CATALOG_FORMAT, "catalog")
    records = []
    for idx, entry in enumerate(doc.get("countermeasures", [])):
        where = f"countermeasures[{idx}]"
        if not entry.get("id"):
            raise ValidationError(f"catalog: {where} missing id")
        cost = parse_real(entry.get("cost", "1.0"), f"{where}.cost", hi=float("inf"))
        records.append(
            CountermeasureRecord(
                id=entry["id"],
                name=entry.get("name", ""),
                tags=tuple(str(t).lower() for t in entry.get("tags", [])),
                cost=cost,
                provenance=entry.get("provenance", ""),
            )
        )
    if len({r.id for r in records}) != len(records):
        raise ValidationError("catalog: duplicate countermeasure ids")
    return records


def catalog_to_doc(records: Sequence[CountermeasureRecord]) -> dict:
    return {
        "format": CATALOG_FORMAT,
        "countermeasures": [
            {
                "id": r.id,
                "name": r.name,
                "tags": list(r.tags),
                "cost": fmt_real(r.cost),
                "provenance": r.provenance,
            }
            for r in records
        ],
    }


def load_catalog(path: str | Path) -> list[CountermeasureRecord]:
    return catalog_from_doc(_read_json(path, "catalog"))


def catalog_lookup(
    records: Iterable[CountermeasureRecord], tags: Iterable[str]
) -> list[CountermeasureRecord]:
    """All records whose tags intersect the query, ordered by id."""
    wanted = {str(t).lower() for t in tags}
    hits = [r for r in records if wanted & set(r.tags)]
    return sorted(hits, key=lambda r: r.id)


# ---------------------------------------------------------------------------
# Reduction matrix (rows = countermeasures, columns = risks)
# ---------------------------------------------------------------------------


def import_reduction_matrix(
    source: str | Path,
    risks: Sequence[RiskRecord],
    countermeasures: Sequence[CountermeasureRecord] | None = None,
) -> dict[str, dict[str, float]]:
    """Load the countermeasure x risk reduction matrix (0 = inapplicable)."""
    text = _read_source(source)
    risk_ids = [r.id for r in risks]
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(stripped)
        _check_format(doc, REDUCTION_FORMAT, "reduction matrix")
        table = {
            cm_id: {col: str(v) for col, v in cells.items()}
            for cm_id, cells in doc.get("rows", {}).items()
        }
        columns = sorted({col for cells in table.values() for col in cells})
    else:
        columns, table = _parse_table(text, "cm_id", "reduction matrix")
    cm_ids = list(table)
    if countermeasures is not None:
        known = {c.id for c in countermeasures}
        unknown = sorted(set(cm_ids) - known)
        if unknown:
            raise UnknownIdError(
                "reduction matrix: countermeasures not in catalog: "
                + ", ".join(unknown)
            )
    return _matrix_from_cells(
        columns, table, cm_ids, risk_ids, "reduction matrix", "countermeasure", "risk"
    )


def reduction_matrix_to_doc(matrix: Mapping[str, Mapping[str, float]]) -> dict:
    return {
        "format": REDUCTION_FORMAT,
        "rows": {
            cm_id: {risk_id: fmt_real(v) for risk_id, v in sorted(row.items())}
            for cm_id, row in sorted(matrix.items())
        },
    }


def reduction_matrix_from_doc(doc: dict) -> dict[str, dict[str, float]]:
    _check_format(doc, REDUCTION_FORMAT, "reduction matrix")
    return {
        cm_id: {
            risk_id: parse_real(raw, f"reduction matrix: cell ({cm_id}, {risk_id})")
            for risk_id, raw in row.items()
        }
        for cm_id, row in doc.get("rows", {}).items()
    }


# ---------------------------------------------------------------------------
# Estimation sessions: config file, state persistence, batch round tables
# ---------------------------------------------------------------------------


def session_from_config_doc(doc: dict) -> DelphiSession:
    _check_format(doc, SESSION_FORMAT, "session")
    if not doc.get("session_id"):
        raise ValidationError("session: missing session_id")
    quantities = [QuantityRef.parse(k) for k in doc.get("quantities", [])]
    return DelphiSession(
        session_id=doc["session_id"],
        quantities=quantities,
        roster=list(doc.get("participants", [])),
        moderator=doc.get("moderator", ""),
        theta=parse_real(doc.get("theta", "0.85"), "session.theta"),
        delta=parse_real(doc.get("delta", "0.05"), "session.delta"),
        max_rounds=int(doc.get("max_rounds", 10)),
    )


def session_to_config_doc(session: DelphiSession) -> dict:
    return {
        "format": SESSION_FORMAT,
        "session_id": session.session_id,
        "moderator": session.moderator,
        "participants": list(session.roster),
        "theta": fmt_real(session.theta),
        "delta": fmt_real(session.delta),
        "max_rounds": session.max_rounds,
        "quantities": [q.key for q in session.quantities],
    }


def load_session(path: str | Path) -> DelphiSession:
    return session_from_config_doc(_read_json(path, "session"))


def report_to_doc(report: ConsensusReport) -> dict:
    return {
        "round_number": report.round_number,
        "theta": fmt_real(report.theta),
        "delta": fmt_real(report.delta),
        "overall_reached": report.overall_reached,
        "per_quantity": {
            key: {
                "median": fmt_real(s.median),
                "mean": fmt_real(s.mean),
                "min": fmt_real(s.min),
                "max": fmt_real(s.max),
                "ratio": fmt_real(s.ratio),
                "reached": s.reached,
            }
            for key, s in report.per_quantity.items()
        },
    }


def report_from_doc(doc: dict) -> ConsensusReport:
    return ConsensusReport(
        round_number=doc["round_number"],
        theta=float(doc["theta"]),
        delta=float(doc["delta"]),
        overall_reached=doc["overall_reached"],
        per_quantity={
            key: QuantityStats(
                median=float(s["median"]),
                mean=float(s["mean"]),
                min=float(s["min"]),
                max=float(s["max"]),
                ratio=float(s["ratio"]),
                reached=s["reached"],
            )
            for key, s in doc["per_quantity"].items()
        },
    )


def session_to_state_doc(session: DelphiSession) -> dict:
    """Full session state, raw estimates included, for write-through persistence."""
    return {
        "format": SESSION_STATE_FORMAT,
        "config": session_to_config_doc(session),
        "state": session.state,
        "rounds": [
            {
                "number": r.number,
                "status": r.status,
                "estimates": {
                    key: {p: fmt_real(v) for p, v in per.items()}
                    for key, per in r.estimates.items()
                },
                "report": report_to_doc(r.report) if r.report else None,
            }
            for r in session.rounds
        ],
        "final_estimates": (
            {k: fmt_real(v) for k, v in session.final_estimates.items()}
            if session.final_estimates is not None
            else None
        ),
        "audit": session.audit,
    }


def session_from_state_doc(doc: dict) -> DelphiSession:
    _check_format(doc, SESSION_STATE_FORMAT, "session state")
    session = session_from_config_doc(doc["config"])
    session.state = doc["state"]
    session.rounds = [
        Round(
            number=r["number"],
            status=r["status"],
            estimates={
                key: {p: float(v) for p, v in per.items()}
                for key, per in r["estimates"].items()
            },
            report=report_from_doc(r["report"]) if r.get("report") else None,
        )
        for r in doc.get("rounds", [])
    ]
    finals = doc.get("final_estimates")
    session.final_estimates = (
        {k: float(v) for k, v in finals.items()} if finals is not None else None
    )
    session.audit = list(doc.get("audit", []))
    return session


def parse_round_table(
    source: str | Path, session: DelphiSession
) -> dict[str, dict[str, float]]:
    """Batch round ingestion: one row per participant, one column per quantity.

    Returns participant -> quantity key -> value, checked for complete
    coverage of the session's roster and quantities.
    """
    text = _read_source(source)
    columns, table = _parse_table(text, "participant", "round table")
    expected = [q.key for q in session.quantities]
    missing_cols = [k for k in expected if k not in columns]
    extra_cols = [k for k in columns if k not in expected]
    if missing_cols or extra_cols:
        details = [f"missing quantity column {k!r}" for k in missing_cols]
        details += [f"unexpected column {k!r}" for k in extra_cols]
        raise StructuralError("round table: columns do not match session", details)
    missing_rows = [p for p in session.roster if p not in table]
    if missing_rows:
        raise ValidationError(
            "round table: incomplete round, missing participants: "
            + ", ".join(missing_rows)
        )
    extra_rows = [p for p in table if p not in session.roster]
    if extra_rows:
        raise UnknownIdError(
            "round table: unknown participants: " + ", ".join(extra_rows)
        )
    out: dict[str, dict[str, float]] = {}
    for participant in session.roster:
        out[participant] = {
            key: parse_real(
                table[participant][key], f"round table: ({participant}, {key})"
            )
            for key in expected
        }
    return out


# ---------------------------------------------------------------------------
# Assessment snapshots and monitoring diffs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreatmentOutcome:
    plan: tuple[str, ...]
    total_cost: float
    reductions: Mapping[str, Mapping[str, float]]
    crrs: Mapping[str, float]
    residuals: Mapping[str, float]
    residual_classifications: Mapping[str, str]
    grl_after: float
    grr: float
    feasible: bool


@dataclass(frozen=True)
class AssessmentSnapshot:
    """A frozen evaluation; immutable once recorded.

    Inputs are stored alongside outputs so any snapshot can be recomputed
    and must reproduce its stored outputs exactly.
    """

    snapshot_id: str
    created_at: str
    org_id: str
    profile_fingerprint: str
    objectives: tuple[Objective, ...]
    risks: tuple[RiskRecord, ...]
    impacts: Mapping[str, Mapping[str, float]]
    alpha: float
    levels: Mapping[str, float]
    classifications: Mapping[str, str]
    grl: float
    treatment: TreatmentOutcome | None = None

    def effective_levels(self) -> dict[str, float]:
        if self.treatment is not None:
            return dict(self.treatment.residuals)
        return dict(self.levels)

    def effective_classifications(self) -> dict[str, str]:
        if self.treatment is not None:
            return dict(self.treatment.residual_classifications)
        return dict(self.classifications)

    def effective_grl(self) -> float:
        if self.treatment is not None:
            return self.treatment.grl_after
        return self.grl


def new_snapshot(
    snapshot_id: str,
    profile: OrganizationProfile,
    risks: Sequence[RiskRecord],
    impacts: Mapping[str, Mapping[str, float]],
    alpha_override: float | None = None,
    treatment: TreatmentOutcome | None = None,
    created_at: str | None = None,
) -> AssessmentSnapshot:
    """Evaluate the register and freeze the result."""
    alpha = profile.tolerance if alpha_override is None else alpha_override
    results = model.evaluate(profile.objectives, risks, impacts, alpha)
    levels = {r.risk_id: r.level for r in results}
    return AssessmentSnapshot(
        snapshot_id=snapshot_id,
        created_at=created_at or datetime.now(timezone.utc).isoformat(),
        org_id=profile.org_id,
        profile_fingerprint=profile_fingerprint(profile),
        objectives=tuple(profile.objectives),
        risks=tuple(risks),
        impacts={k: dict(v) for k, v in impacts.items()},
        alpha=alpha,
        levels=levels,
        classifications={r.risk_id: r.classification.value for r in results},
        grl=model.global_risk_level(levels.values()),
        treatment=treatment,
    )


def recompute_snapshot(snapshot: AssessmentSnapshot) -> dict:
    """Re-derive all stored outputs from the snapshot's stored inputs.

    Used to verify snapshot integrity: the result must equal the stored
    outputs bit-for-bit.
    """
    results = model.evaluate(
        snapshot.objectives, snapshot.risks, snapshot.impacts, snapshot.alpha
    )
    levels = {r.risk_id: r.level for r in results}
    out = {
        "levels": levels,
        "classifications": {r.risk_id: r.classification.value for r in results},
        "grl": model.global_risk_level(levels.values()),
    }
    if snapshot.treatment is not None:
        t = snapshot.treatment
        crrs = {}
        residuals = {}
        for risk in snapshot.risks:
            reds = [
                t.reductions[cm][risk.id]
                for cm in t.plan
                if t.reductions.get(cm, {}).get(risk.id, 0.0) > 0.0
            ]
            crrs[risk.id] = model.combined_risk_reduction(reds)
            residuals[risk.id] = model.residual_level(
                levels[risk.id], crrs[risk.id]
            )
        treated = [r.id for r in snapshot.risks if crrs[r.id] > 0.0]
        out["crrs"] = crrs
        out["residuals"] = residuals
        out["residual_classifications"] = {
            rid: model.classify(residuals[rid], snapshot.alpha).value
            for rid in residuals
        }
        out["grl_after"] = model.global_risk_level(residuals.values())
        out["grr"] = model.global_risk_reduction(crrs[rid] for rid in treated)
    return out


def snapshot_to_doc(snapshot: AssessmentSnapshot) -> dict:
    doc = {
        "format": SNAPSHOT_FORMAT,
        "snapshot_id": snapshot.snapshot_id,
        "created_at": snapshot.created_at,
        "org_id": snapshot.org_id,
        "profile_fingerprint": snapshot.profile_fingerprint,
        "alpha": fmt_real(snapshot.alpha),
        "objectives": [
            {"id": o.id, "name": o.name, "weight": fmt_real(o.weight)}
            for o in snapshot.objectives
        ],
        "risks": [
            {"id": r.id, "name": r.name, "likelihood": fmt_real(r.likelihood)}
            for r in snapshot.risks
        ],
        "impacts": {
            rid: {oid: fmt_real(v) for oid, v in sorted(row.items())}
            for rid, row in sorted(snapshot.impacts.items())
        },
        "levels": {k: fmt_real(v) for k, v in snapshot.levels.items()},
        "classifications": dict(snapshot.classifications),
        "grl": fmt_real(snapshot.grl),
    }
    if snapshot.treatment is not None:
        t = snapshot.treatment
        doc["treatment"] = {
            "plan": list(t.plan),
            "total_cost": fmt_real(t.total_cost),
            "reductions": {
                cm: {rid: fmt_real(v) for rid, v in sorted(row.items())}
                for cm, row in sorted(t.reductions.items())
            },
            "crrs": {k: fmt_real(v) for k, v in t.crrs.items()},
            "residuals": {k: fmt_real(v) for k, v in t.residuals.items()},
            "residual_classifications": dict(t.residual_classifications),
            "grl_after": fmt_real(t.grl_after),
            "grr": fmt_real(t.grr),
            "feasible": t.feasible,
        }
    return doc


def snapshot_from_doc(doc: dict) -> AssessmentSnapshot:
    _check_format(doc, SNAPSHOT_FORMAT, "snapshot")
    treatment = None
    if doc.get("treatment"):
        t = doc["treatment"]
        treatment = TreatmentOutcome(
            plan=tuple(t["plan"]),
            total_cost=float(t["total_cost"]),
            reductions={
                cm: {rid: float(v) for rid, v in row.items()}
                for cm, row in t["reductions"].items()
            },
            crrs={k: float(v) for k, v in t["crrs"].items()},
            residuals={k: float(v) for k, v in t["residuals"].items()},
            residual_classifications=dict(t["residual_classifications"]),
            grl_after=float(t["grl_after"]),
            grr=float(t["grr"]),
            feasible=t["feasible"],
        )
    return AssessmentSnapshot(
        snapshot_id=doc["snapshot_id"],
        created_at=doc["created_at"],
        org_id=doc["org_id"],
        profile_fingerprint=doc["profile_fingerprint"],
        objectives=tuple(
            Objective(o["id"], o.get("name", ""), float(o["weight"]))
            for o in doc["objectives"]
        ),
        risks=tuple(
            RiskRecord(r["id"], r.get("name", ""), float(r["likelihood"]))
            for r in doc["risks"]
        ),
        impacts={
            rid: {oid: float(v) for oid, v in row.items()}
            for rid, row in doc["impacts"].items()
        },
        alpha=float(doc["alpha"]),
        levels={k: float(v) for k, v in doc["levels"].items()},
        classifications=dict(doc["classifications"]),
        grl=float(doc["grl"]),
        treatment=treatment,
    )


def record_snapshot(store: Store, snapshot: AssessmentSnapshot) -> str:
    """Persist a snapshot, write-once: re-recording an id is a conflict."""
    key = f"snapshots/{snapshot.snapshot_id}"
    if store.exists(key):
        raise ConflictError(f"snapshot {snapshot.snapshot_id!r} already recorded")
    store.put(key, snapshot_to_doc(snapshot))
    return snapshot.snapshot_id


def load_snapshot(store: Store, snapshot_id: str) -> AssessmentSnapshot:
    doc, _ = store.get(f"snapshots/{snapshot_id}")
    return snapshot_from_doc(doc)


@dataclass(frozen=True)
class MonitoringReport:
    a_id: str
    b_id: str
    org_id: str
    # risk id -> (level in a, level in b, delta b-a), effective levels
    common: Mapping[str, tuple[float, float, float]]
    added: Mapping[str, float]
    retired: Mapping[str, float]
    # risk id -> (classification in a, classification in b)
    flips: Mapping[str, tuple[str, str]]
    grl_a: float
    grl_b: float
    grl_delta: float


def diff_snapshots(
    a: AssessmentSnapshot, b: AssessmentSnapshot
) -> MonitoringReport:
    """Compare two frozen assessments of the same organization.

    Uses effective (post-treatment, where a plan was applied) levels and
    classifications.
    """
    if a.org_id != b.org_id:
        raise ValidationError(
            f"cannot diff snapshots of different organizations "
            f"({a.org_id!r} vs {b.org_id!r})"
        )
    levels_a = a.effective_levels()
    levels_b = b.effective_levels()
    class_a = a.effective_classifications()
    class_b = b.effective_classifications()
    common_ids = sorted(levels_a.keys() & levels_b.keys())
    common = {
        rid: (levels_a[rid], levels_b[rid], levels_b[rid] - levels_a[rid])
        for rid in common_ids
    }
    flips = {
        rid: (class_a[rid], class_b[rid])
        for rid in common_ids
        if class_a[rid] != class_b[rid]
    }
    grl_a = a.effective_grl()
    grl_b = b.effective_grl()
    return MonitoringReport(
        a_id=a.snapshot_id,
        b_id=b.snapshot_id,
        org_id=a.org_id,
        common=common,
        added={rid: levels_b[rid] for rid in sorted(levels_b.keys() - levels_a.keys())},
        retired={
            rid: levels_a[rid] for rid in sorted(levels_a.keys() - levels_b.keys())
        },
        flips=flips,
        grl_a=grl_a,
        grl_b=grl_b,
        grl_delta=grl_b - grl_a,
    )
