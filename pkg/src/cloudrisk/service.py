"""JSON-over-HTTP facade for the live, multi-client workflows.

Every endpoint delegates 1:1 to a library operation; no risk arithmetic
happens in this layer. Responses are pure projections of module results,
wrapped in an envelope carrying the originating request id.

Identity is static-token based (``Authorization: Bearer <token>``) with
three roles: viewer (read aggregates, run what-if), participant (viewer
plus submitting their own estimates), moderator (everything, including
round control and the anonymous raw-estimate listing). Participants can
never read another participant's raw estimates.

All mutations of one session or store key are serialized behind a
per-key lock; round-status long-polling lets clients follow open/close
transitions without busy-waiting.
"""

from __future__ import annotations

import json
import threading
import uuid
from collections import defaultdict
from contextlib import asynccontextmanager
from pathlib import Path
from time import monotonic

from fastapi import Depends, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import model, planner, registry, reports
from .delphi import DelphiSession, QuantityRef
from .errors import CloudRiskError, UnknownIdError, ValidationError
from .schemas import (
    AssessmentRun,
    EstimateSubmit,
    FinalizeRequest,
    OptimizeRequest,
    PlanRequest,
    SessionCreate,
    WhatIfRequest,
)
from .store import Store

API_PREFIX = "/api/v1"

ROLE_RANK = {"viewer": 0, "participant": 1, "moderator": 2}

STATUS_BY_CODE = {
    "validation_error": 400,
    "structural_error": 400,
    "unknown_id": 404,
    "state_error": 409,
    "conflict": 409,
    "deadlock": 409,
    "store_error": 503,
    "unauthorized": 401,
    "forbidden": 403,
}

AUTH_FORMAT = "auth/1"


class ApiError(CloudRiskError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class Identity:
    def __init__(self, principal: str, role: str):
        self.principal = principal
        self.role = role


def load_tokens(path: str | Path) -> dict[str, tuple[str, str]]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != AUTH_FORMAT:
        raise ValidationError(f"auth file: unknown format {doc.get('format')!r}")
    tokens = {}
    for entry in doc.get("tokens", []):
        role = entry.get("role")
        if role not in ROLE_RANK:
            raise ValidationError(f"auth file: unknown role {role!r}")
        tokens[entry["token"]] = (entry["principal"], role)
    return tokens


class ServiceState:
    """Shared mutable state: the store, identities, live sessions, locks."""

    def __init__(self, store: Store, tokens: dict[str, tuple[str, str]]):
        self.store = store
        self.tokens = tokens
        self.sessions: dict[str, DelphiSession] = {}
        self.locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self.session_versions: dict[str, int] = defaultdict(int)
        self.conditions: dict[str, threading.Condition] = defaultdict(
            threading.Condition
        )
        self.idempotency: dict[tuple, dict] = {}

    def lock(self, key: str) -> threading.Lock:
        return self.locks[key]

    # -- sessions ------------------------------------------------------------

    def session(self, session_id: str) -> DelphiSession:
        if session_id not in self.sessions:
            doc, _ = self.store.get(f"sessions/{session_id}")
            self.sessions[session_id] = registry.session_from_state_doc(doc)
        return self.sessions[session_id]

    def persist_session(self, session: DelphiSession) -> None:
        self.store.put(
            f"sessions/{session.session_id}",
            registry.session_to_state_doc(session),
        )
        self.bump(session.session_id)

    def bump(self, session_id: str) -> None:
        self.session_versions[session_id] += 1
        with self.conditions[session_id]:
            self.conditions[session_id].notify_all()

    def flush_sessions(self) -> None:
        for session in self.sessions.values():
            self.store.put(
                f"sessions/{session.session_id}",
                registry.session_to_state_doc(session),
            )


def create_app(
    store: Store,
    tokens: dict[str, tuple[str, str]] | None = None,
    auth_path: str | Path | None = None,
    ui_dir: str | Path | None = None,
    on_shutdown=(),
) -> FastAPI:
    if tokens is None and auth_path is not None:
        tokens = load_tokens(auth_path)
    if tokens is None:
        # development fallback; real deployments pass an auth file
        tokens = {
            "dev-moderator": ("mod", "moderator"),
            "dev-viewer": ("observer", "viewer"),
        }
    state = ServiceState(store, tokens)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        # runs inside the server's graceful shutdown, which a re-raised
        # termination signal would otherwise bypass in the caller
        state.flush_sessions()
        for callback in on_shutdown:
            callback()

    app = FastAPI(
        title="cloudrisk service",
        version="1",
        lifespan=lifespan,
        docs_url=f"{API_PREFIX}/docs",
        openapi_url=f"{API_PREFIX}/openapi.json",
    )
    app.state.service = state

    # -- envelopes and errors ------------------------------------------------

    def request_id_of(request: Request) -> str:
        rid = getattr(request.state, "request_id", None)
        if rid is None:
            rid = request.headers.get("x-request-id") or uuid.uuid4().hex
            request.state.request_id = rid
        return rid

    def ok(request: Request, payload, status_code: int = 200) -> JSONResponse:
        return JSONResponse(
            status_code=status_code,
            content={
                "request_id": request_id_of(request),
                "payload": payload,
                "error": None,
            },
        )

    def fail(request: Request, code: str, message: str) -> JSONResponse:
        return JSONResponse(
            status_code=STATUS_BY_CODE.get(code, 400),
            content={
                "request_id": request_id_of(request),
                "payload": None,
                "error": {"code": code, "message": message},
            },
        )

    @app.exception_handler(CloudRiskError)
    async def on_tool_error(request: Request, exc: CloudRiskError):
        return fail(request, exc.code, str(exc))

    @app.exception_handler(RequestValidationError)
    async def on_request_error(request: Request, exc: RequestValidationError):
        return fail(request, "validation_error", str(exc.errors()))

    # -- identity ------------------------------------------------------------

    def identity(request: Request) -> Identity:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise ApiError("unauthorized", "missing bearer token")
        token = header[7:].strip()
        if token not in state.tokens:
            raise ApiError("unauthorized", "unknown token")
        principal, role = state.tokens[token]
        return Identity(principal, role)

    def require(ident: Identity, minimum: str) -> None:
        if ROLE_RANK[ident.role] < ROLE_RANK[minimum]:
            raise ApiError(
                "forbidden", f"requires {minimum} role (you are {ident.role})"
            )

    # -- meta ------------------------------------------------------------------

    @app.get(f"{API_PREFIX}/health")
    def health(request: Request):
        return ok(request, {"status": "ok", "service": "cloudrisk", "api": "v1"})

    @app.get(f"{API_PREFIX}/schemas")
    def schemas(request: Request):
        return ok(
            request,
            {
                "document_formats": sorted(registry.KNOWN_FORMATS),
                "auth_format": AUTH_FORMAT,
                "rounding_modes": list(reports.MODES),
                "roles": list(ROLE_RANK),
                "base_path": API_PREFIX,
            },
        )

    # -- profiles / registers / matrices / catalog -----------------------------

    def org_lock(org_id: str) -> threading.Lock:
        return state.lock(f"org:{org_id}")

    @app.put(f"{API_PREFIX}/profiles/{{org_id}}")
    def put_profile(org_id: str, body: dict, request: Request,
                    ident: Identity = Depends(identity)):
        require(ident, "moderator")
        profile = registry.profile_from_doc(body)
        if profile.org_id != org_id:
            raise ValidationError(
                f"org_id mismatch: path {org_id!r}, document {profile.org_id!r}"
            )
        with org_lock(org_id):
            version = state.store.put(
                f"profiles/{org_id}", registry.profile_to_doc(profile)
            )
        return ok(request, {"org_id": org_id, "version": version})

    @app.get(f"{API_PREFIX}/profiles/{{org_id}}")
    def get_profile(org_id: str, request: Request,
                    ident: Identity = Depends(identity)):
        require(ident, "viewer")
        doc, version = state.store.get(f"profiles/{org_id}")
        return ok(request, {"document": doc, "version": version})

    @app.get(f"{API_PREFIX}/profiles")
    def list_profiles(request: Request, ident: Identity = Depends(identity)):
        require(ident, "viewer")
        return ok(request, {"org_ids": state.store.list("profiles")})

    @app.delete(f"{API_PREFIX}/profiles/{{org_id}}")
    def delete_profile(org_id: str, request: Request,
                       ident: Identity = Depends(identity)):
        require(ident, "moderator")
        with org_lock(org_id):
            state.store.delete(f"profiles/{org_id}")
        return ok(request, {"org_id": org_id, "deleted": True})

    def load_org(org_id: str):
        profile = registry.profile_from_doc(state.store.get(f"profiles/{org_id}")[0])
        risks = registry.risks_from_doc(state.store.get(f"registers/{org_id}")[0])
        return profile, risks

    @app.put(f"{API_PREFIX}/registers/{{org_id}}")
    def put_register(org_id: str, body: dict, request: Request,
                     ident: Identity = Depends(identity)):
        require(ident, "moderator")
        risks = registry.risks_from_doc(body)
        with org_lock(org_id):
            version = state.store.put(
                f"registers/{org_id}", registry.risks_to_doc(org_id, risks)
            )
        return ok(request, {"org_id": org_id, "version": version,
                            "risk_count": len(risks)})

    @app.get(f"{API_PREFIX}/registers/{{org_id}}")
    def get_register(org_id: str, request: Request,
                     ident: Identity = Depends(identity)):
        require(ident, "viewer")
        doc, version = state.store.get(f"registers/{org_id}")
        return ok(request, {"document": doc, "version": version})

    @app.delete(f"{API_PREFIX}/registers/{{org_id}}")
    def delete_register(org_id: str, request: Request,
                        ident: Identity = Depends(identity)):
        require(ident, "moderator")
        with org_lock(org_id):
            state.store.delete(f"registers/{org_id}")
        return ok(request, {"org_id": org_id, "deleted": True})

    @app.put(f"{API_PREFIX}/registers/{{org_id}}/matrix")
    def put_matrix(org_id: str, body: dict, request: Request,
                   ident: Identity = Depends(identity)):
        require(ident, "moderator")
        profile, risks = load_org(org_id)
        matrix = registry.import_impact_matrix(json.dumps(body), profile, risks)
        with org_lock(org_id):
            version = state.store.put(
                f"matrices/{org_id}", registry.impact_matrix_to_doc(org_id, matrix)
            )
        return ok(request, {"org_id": org_id, "version": version})

    @app.get(f"{API_PREFIX}/registers/{{org_id}}/matrix")
    def get_matrix(org_id: str, request: Request,
                   ident: Identity = Depends(identity)):
        require(ident, "viewer")
        doc, version = state.store.get(f"matrices/{org_id}")
        return ok(request, {"document": doc, "version": version})

    @app.put(f"{API_PREFIX}/reductions/{{org_id}}")
    def put_reductions(org_id: str, body: dict, request: Request,
                       ident: Identity = Depends(identity)):
        require(ident, "moderator")
        _, risks = load_org(org_id)
        matrix = registry.import_reduction_matrix(json.dumps(body), risks)
        with org_lock(org_id):
            version = state.store.put(
                f"reductions/{org_id}", registry.reduction_matrix_to_doc(matrix)
            )
        return ok(request, {"org_id": org_id, "version": version})

    @app.get(f"{API_PREFIX}/reductions/{{org_id}}")
    def get_reductions(org_id: str, request: Request,
                       ident: Identity = Depends(identity)):
        require(ident, "viewer")
        doc, version = state.store.get(f"reductions/{org_id}")
        return ok(request, {"document": doc, "version": version})

    @app.put(f"{API_PREFIX}/catalog")
    def put_catalog(body: dict, request: Request,
                    ident: Identity = Depends(identity)):
        require(ident, "moderator")
        records = registry.catalog_from_doc(body)
        with state.lock("catalog"):
            version = state.store.put("catalog", registry.catalog_to_doc(records))
        return ok(request, {"version": version, "count": len(records)})

    @app.get(f"{API_PREFIX}/catalog")
    def get_catalog(request: Request, ident: Identity = Depends(identity),
                    tag: list[str] = Query(default=[])):
        require(ident, "viewer")
        doc, version = state.store.get("catalog")
        records = registry.catalog_from_doc(doc)
        if tag:
            records = registry.catalog_lookup(records, tag)
        return ok(
            request,
            {"document": registry.catalog_to_doc(records), "version": version},
        )

    # -- estimation sessions ---------------------------------------------------

    @app.post(f"{API_PREFIX}/sessions")
    def create_session(body: SessionCreate, request: Request,
                       ident: Identity = Depends(identity)):
        require(ident, "moderator")
        known_ids = None
        if body.org_id:
            profile, risks = load_org(body.org_id)
            catalog = []
            if state.store.exists("catalog"):
                catalog = registry.catalog_from_doc(state.store.get("catalog")[0])
            known_ids = {
                "objectives": [o.id for o in profile.objectives],
                "risks": [r.id for r in risks],
                "countermeasures": [c.id for c in catalog],
            }
        session = DelphiSession(
            session_id=body.session_id,
            quantities=[QuantityRef.parse(k) for k in body.quantities],
            roster=body.participants,
            moderator=body.moderator,
            theta=body.theta,
            delta=body.delta,
            max_rounds=body.max_rounds,
            known_ids=known_ids,
        )
        with state.lock(f"session:{session.session_id}"):
            if state.store.exists(f"sessions/{session.session_id}"):
                raise ApiError(
                    "conflict", f"session {session.session_id!r} already exists"
                )
            state.sessions[session.session_id] = session
            state.persist_session(session)
        return ok(request, session.status_view(), status_code=201)

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}")
    def session_state(session_id: str, request: Request,
                      ident: Identity = Depends(identity)):
        require(ident, "viewer")
        session = state.session(session_id)
        view = session.status_view()
        view["version"] = state.session_versions[session_id]
        report = session.last_report()
        view["last_report"] = registry.report_to_doc(report) if report else None
        if session.final_estimates is not None:
            view["final_estimates"] = {
                k: registry.fmt_real(v) for k, v in session.final_estimates.items()
            }
        return ok(request, view)

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/rounds")
    def open_round(session_id: str, request: Request,
                   ident: Identity = Depends(identity)):
        require(ident, "moderator")
        with state.lock(f"session:{session_id}"):
            session = state.session(session_id)
            rnd = session.open_round()
            state.persist_session(session)
        return ok(request, {"round": rnd.number, "status": rnd.status},
                  status_code=201)

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/estimates")
    def submit_estimate(session_id: str, body: EstimateSubmit, request: Request,
                        ident: Identity = Depends(identity)):
        require(ident, "participant")
        idem_key = request.headers.get("idempotency-key")
        cache_key = (session_id, ident.principal, idem_key)
        if idem_key is not None and cache_key in state.idempotency:
            return ok(request, state.idempotency[cache_key])
        with state.lock(f"session:{session_id}"):
            session = state.session(session_id)
            # participants submit for themselves; the moderator may proxy
            # a submission for a named participant via quantity spec only
            session.submit(ident.principal, body.quantity, body.value)
            state.persist_session(session)
            payload = {
                "recorded": True,
                "round": session.rounds[-1].number,
                "quantity": body.quantity,
            }
        if idem_key is not None:
            state.idempotency[cache_key] = payload
        return ok(request, payload, status_code=201)

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/my-estimates")
    def my_estimates(session_id: str, request: Request,
                     ident: Identity = Depends(identity)):
        require(ident, "participant")
        session = state.session(session_id)
        current = {}
        if session.state == "round-active":
            rnd = session.rounds[-1]
            current = {
                key: registry.fmt_real(per[ident.principal])
                for key, per in rnd.estimates.items()
                if ident.principal in per
            }
        carried = {
            k: registry.fmt_real(v)
            for k, v in session.carried_defaults(ident.principal).items()
        }
        return ok(request, {"current_round": current, "carried_defaults": carried})

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/rounds/current/close")
    def close_round(session_id: str, request: Request,
                    ident: Identity = Depends(identity)):
        require(ident, "moderator")
        with state.lock(f"session:{session_id}"):
            session = state.session(session_id)
            report = session.close_round()  # not retry-able: second -> 409
            state.persist_session(session)
        return ok(request, registry.report_to_doc(report))

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/rounds/current")
    def current_round(session_id: str, request: Request,
                      ident: Identity = Depends(identity)):
        require(ident, "moderator")
        session = state.session(session_id)
        missing = session.missing_cells()
        return ok(
            request,
            {
                "state": session.state,
                "round": session.rounds[-1].number if session.rounds else None,
                "missing_count": len(missing),
                "missing_participants": sorted({p for p, _ in missing}),
            },
        )

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/rounds/{{number}}/estimates")
    def round_estimates(session_id: str, number: int, request: Request,
                        ident: Identity = Depends(identity)):
        # anonymity contract: raw values are moderator-only, and even the
        # moderator sees them without participant attribution
        require(ident, "moderator")
        session = state.session(session_id)
        match = [r for r in session.rounds if r.number == number]
        if not match:
            raise UnknownIdError(f"no round {number} in session {session_id!r}")
        values = {
            key: sorted(registry.fmt_real(v) for v in per.values())
            for key, per in match[0].estimates.items()
        }
        return ok(request, {"round": number, "estimates": values})

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/report")
    def last_report(session_id: str, request: Request,
                    ident: Identity = Depends(identity)):
        require(ident, "viewer")
        session = state.session(session_id)
        report = session.last_report()
        if report is None:
            raise UnknownIdError(f"session {session_id!r} has no closed round yet")
        return ok(request, registry.report_to_doc(report))

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/finalize")
    def finalize(session_id: str, body: FinalizeRequest, request: Request,
                 ident: Identity = Depends(identity)):
        require(ident, "moderator")
        with state.lock(f"session:{session_id}"):
            session = state.session(session_id)
            finals = session.finalize(ident.principal, force=body.force)
            state.persist_session(session)
        return ok(
            request,
            {"final_estimates": {k: registry.fmt_real(v) for k, v in finals.items()}},
        )

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/events")
    def events(session_id: str, request: Request,
               ident: Identity = Depends(identity),
               since: int = 0, timeout: float = 25.0):
        """Long-poll: returns when the session version exceeds ``since``."""
        require(ident, "viewer")
        state.session(session_id)  # 404 on unknown id
        deadline = monotonic() + min(timeout, 60.0)
        condition = state.conditions[session_id]
        with condition:
            while state.session_versions[session_id] <= since:
                remaining = deadline - monotonic()
                if remaining <= 0:
                    break
                condition.wait(remaining)
        session = state.session(session_id)
        view = session.status_view()
        view["version"] = state.session_versions[session_id]
        return ok(request, view)

    # -- assessments -------------------------------------------------------------

    @app.post(f"{API_PREFIX}/assessments/run")
    def run_assessment(body: AssessmentRun, request: Request,
                       ident: Identity = Depends(identity)):
        require(ident, "moderator")
        profile, risks = load_org(body.org_id)
        matrix_doc, _ = state.store.get(f"matrices/{body.org_id}")
        impacts = registry.impact_matrix_from_doc(matrix_doc)
        snapshot = registry.new_snapshot(
            body.snapshot_id or f"assess-{uuid.uuid4().hex[:10]}",
            profile,
            risks,
            impacts,
            alpha_override=body.alpha_override,
        )
        with org_lock(body.org_id):
            registry.record_snapshot(state.store, snapshot)
        return ok(request, registry.snapshot_to_doc(snapshot), status_code=201)

    @app.get(f"{API_PREFIX}/assessments/{{snapshot_id}}")
    def get_snapshot(snapshot_id: str, request: Request,
                     ident: Identity = Depends(identity)):
        require(ident, "viewer")
        doc, _ = state.store.get(f"snapshots/{snapshot_id}")
        return ok(request, doc)

    @app.get(f"{API_PREFIX}/assessments")
    def list_snapshots(request: Request, ident: Identity = Depends(identity)):
        require(ident, "viewer")
        return ok(request, {"snapshot_ids": state.store.list("snapshots")})

    # -- treatment ----------------------------------------------------------------

    def treatment_inputs(org_id: str, snapshot_id: str):
        snapshot = registry.load_snapshot(state.store, snapshot_id)
        if snapshot.org_id != org_id:
            raise ValidationError(
                f"snapshot {snapshot_id!r} belongs to {snapshot.org_id!r}"
            )
        matrix = registry.reduction_matrix_from_doc(
            state.store.get(f"reductions/{org_id}")[0]
        )
        costs = {}
        if state.store.exists("catalog"):
            catalog = registry.catalog_from_doc(state.store.get("catalog")[0])
            costs = {c.id: c.cost for c in catalog}
        return snapshot, matrix, costs

    def evaluation_payload(evaluation, mode: str) -> dict:
        reports.check_mode(mode)
        risk_ids = list(evaluation.levels)
        values = {
            "levels": {r: registry.fmt_real(evaluation.levels[r]) for r in risk_ids},
            "crrs": {r: registry.fmt_real(evaluation.crrs[r]) for r in risk_ids},
            "residuals": {
                r: registry.fmt_real(evaluation.residuals[r]) for r in risk_ids
            },
            "grl_before": registry.fmt_real(evaluation.grl_before),
            "grl_after": registry.fmt_real(evaluation.grl_after),
            "grr": registry.fmt_real(evaluation.grr),
        }
        grl_before = reports.display_sum(evaluation.levels.values(), mode)
        grl_after = reports.display_sum(evaluation.residuals.values(), mode)
        display = {
            "mode": mode,
            "levels": {r: reports.display(evaluation.levels[r], mode) for r in risk_ids},
            "crrs": {r: reports.display(evaluation.crrs[r], mode) for r in risk_ids},
            "residuals": {
                r: reports.display(evaluation.residuals[r], mode) for r in risk_ids
            },
            "grl_before": grl_before,
            "grl_after": grl_after,
            "grr": reports.display(evaluation.grr, mode),
            "reduction_percent": reports.reduction_percent(grl_before, grl_after),
        }
        return {
            "plan": list(evaluation.plan),
            "total_cost": registry.fmt_real(evaluation.total_cost),
            "alpha": registry.fmt_real(evaluation.alpha),
            "treated": list(evaluation.treated),
            "feasible": evaluation.feasible,
            "classifications": {
                r: model.classify(evaluation.residuals[r], evaluation.alpha).value
                for r in risk_ids
            },
            "values": values,
            "display": display,
        }

    @app.post(f"{API_PREFIX}/treatment/evaluate")
    def treatment_evaluate(body: PlanRequest, request: Request,
                           ident: Identity = Depends(identity)):
        require(ident, "viewer")
        snapshot, matrix, costs = treatment_inputs(body.org_id, body.snapshot_id)
        evaluation = planner.evaluate_plan(
            snapshot.levels, matrix, body.plan, snapshot.alpha, costs
        )
        return ok(request, evaluation_payload(evaluation, body.rounding_mode))

    @app.post(f"{API_PREFIX}/treatment/optimize")
    def treatment_optimize(body: OptimizeRequest, request: Request,
                           ident: Identity = Depends(identity)):
        require(ident, "viewer")
        snapshot, matrix, costs = treatment_inputs(body.org_id, body.snapshot_id)
        plan, evaluation = planner.optimize_plan(
            snapshot.levels, matrix, costs, snapshot.alpha, mode=body.mode
        )
        return ok(request, evaluation_payload(evaluation, body.rounding_mode))

    @app.post(f"{API_PREFIX}/treatment/what-if")
    def treatment_what_if(body: WhatIfRequest, request: Request,
                          ident: Identity = Depends(identity)):
        require(ident, "viewer")
        snapshot, matrix, costs = treatment_inputs(body.org_id, body.snapshot_id)
        evaluation = planner.what_if(
            snapshot.levels, matrix, body.plan, body.toggle, snapshot.alpha, costs
        )
        return ok(request, evaluation_payload(evaluation, body.rounding_mode))

    # -- monitoring -----------------------------------------------------------------

    @app.get(f"{API_PREFIX}/monitoring/diff")
    def monitoring_diff(request: Request, a: str, b: str,
                        ident: Identity = Depends(identity)):
        require(ident, "viewer")
        diff = registry.diff_snapshots(
            registry.load_snapshot(state.store, a),
            registry.load_snapshot(state.store, b),
        )
        payload = {
            "a": diff.a_id,
            "b": diff.b_id,
            "org_id": diff.org_id,
            "common": {
                rid: {
                    "a": registry.fmt_real(va),
                    "b": registry.fmt_real(vb),
                    "delta": registry.fmt_real(delta),
                }
                for rid, (va, vb, delta) in diff.common.items()
            },
            "added": {r: registry.fmt_real(v) for r, v in diff.added.items()},
            "retired": {r: registry.fmt_real(v) for r, v in diff.retired.items()},
            "flips": {r: {"a": fa, "b": fb} for r, (fa, fb) in diff.flips.items()},
            "grl_a": registry.fmt_real(diff.grl_a),
            "grl_b": registry.fmt_real(diff.grl_b),
            "grl_delta": registry.fmt_real(diff.grl_delta),
        }
        return ok(request, payload)

    # -- static UI -------------------------------------------------------------------

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
