"""Command-line workflow: assess, delphi, treat, monitor, serve.

Batch commands bind the core library in-process and are deterministic
given their input files; reports go to stdout (or --out), operational
notes to stderr. ``serve`` starts the HTTP service for the live,
multi-participant workflows.

Exit codes:
    0  success
    1  unexpected error
    2  validation failure (bad documents, bad flags, unknown ids)
    3  estimation deadlock / no consensus in the supplied rounds
    4  treatment infeasible (report still produced)
    5  store conflict, held serve lock, busy port, unwritable store
"""

from __future__ import annotations

import argparse
import os
import socket
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import model, planner, registry, reports
from .errors import (
    CloudRiskError,
    ConflictError,
    DeadlockError,
    StoreError,
    ValidationError,
)
from .store import Store

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_VALIDATION = 2
EXIT_DEADLOCK = 3
EXIT_INFEASIBLE = 4
EXIT_STORE = 5

STORE_ENV = "CLOUDRISK_STORE"
DEFAULT_STORE = "./cloudrisk-store"


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(report: str, out: str | None) -> None:
    if out:
        Path(out).write_text(report)
    else:
        sys.stdout.write(report)


def _store_from(args) -> Store:
    root = args.store or os.environ.get(STORE_ENV) or DEFAULT_STORE
    return Store(root)


def _auto_id(prefix: str) -> str:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%f")
    return f"{prefix}-{stamp}"


def _add_report_flags(sub, with_out=True):
    sub.add_argument(
        "--mode",
        choices=list(reports.MODES),
        default=reports.MODE_FULL,
        help="display rounding mode (default: full)",
    )
    sub.add_argument(
        "--format",
        choices=list(reports.FORMATS),
        default=reports.FORMAT_TEXT,
        help="report rendering (default: text)",
    )
    if with_out:
        sub.add_argument("--out", help="write the report to this file instead of stdout")


def _add_store_flag(sub):
    sub.add_argument(
        "--store",
        help=f"store root (default: ${STORE_ENV} or {DEFAULT_STORE})",
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_assess(args) -> int:
    profile = registry.load_profile(args.profile)
    risks = registry.load_risks(args.risks)
    impacts = registry.import_impact_matrix(args.matrix, profile, risks)
    snapshot = registry.new_snapshot(
        args.snapshot_id or _auto_id("assess"),
        profile,
        risks,
        impacts,
        alpha_override=args.alpha_override,
    )
    store = _store_from(args)
    registry.record_snapshot(store, snapshot)
    _note(f"snapshot recorded: {snapshot.snapshot_id}")
    _emit(reports.levels_report(snapshot, args.mode, args.format), args.out)
    return EXIT_OK


def cmd_delphi(args) -> int:
    session = registry.load_session(args.session)
    store = _store_from(args) if args.store or os.environ.get(STORE_ENV) else None

    def persist():
        if store is not None:
            store.put(
                f"sessions/{session.session_id}",
                registry.session_to_state_doc(session),
            )

    report = None
    for path in args.rounds:
        table = registry.parse_round_table(path, session)
        session.open_round()
        for participant, estimates in table.items():
            for key, value in estimates.items():
                session.submit(participant, key, value)
        report = session.close_round()
        persist()
        reached = sum(1 for s in report.per_quantity.values() if s.reached)
        _note(
            f"round {report.round_number}: {reached}/{len(report.per_quantity)} "
            f"quantities reached consensus"
        )
        if report.overall_reached:
            break

    if report is None:
        raise ValidationError("no round files supplied")
    if not report.overall_reached:
        if session.state == "deadlocked":
            _note(
                f"deadlock: round cap {session.max_rounds} hit without consensus"
            )
        else:
            _note(
                f"no consensus after {len(session.rounds)} supplied round(s)"
            )
        return EXIT_DEADLOCK

    finals = session.finalize(session.moderator)
    persist()
    rows = [["quantity", "estimate"]]
    rows += [[key, reports.display(finals[key], args.mode)]
             for key in sorted(finals)]
    rendered = reports.render_table(
        f"final estimates (session {session.session_id})", rows, args.format
    )
    _emit(rendered, args.out)
    return EXIT_OK


def cmd_treat(args) -> int:
    store = _store_from(args)
    snapshot = registry.load_snapshot(store, args.snapshot)
    catalog = registry.load_catalog(args.catalog) if args.catalog else None
    matrix = registry.import_reduction_matrix(
        args.reductions, snapshot.risks, catalog
    )
    costs = {c.id: c.cost for c in catalog} if catalog else {}
    alpha = args.alpha_override if args.alpha_override is not None else snapshot.alpha

    if args.plan:
        plan_ids = [p.strip() for p in args.plan.split(",") if p.strip()]
        evaluation = planner.evaluate_plan(
            snapshot.levels, matrix, plan_ids, alpha, costs
        )
    else:
        _, evaluation = planner.optimize_plan(
            snapshot.levels, matrix, costs, alpha, mode=args.optimize
        )
        _note(f"selected plan: {','.join(evaluation.plan) or '(empty)'}")

    evaluation = planner.with_mode(evaluation, args.mode)
    outcome = registry.TreatmentOutcome(
        plan=evaluation.plan,
        total_cost=evaluation.total_cost,
        reductions=matrix,
        crrs=evaluation.crrs,
        residuals=evaluation.residuals,
        residual_classifications={
            rid: model.classify(v, alpha).value
            for rid, v in evaluation.residuals.items()
        },
        grl_after=evaluation.grl_after,
        grr=evaluation.grr,
        feasible=evaluation.feasible,
    )
    treated = registry.new_snapshot(
        args.record_as or _auto_id("treat"),
        _profile_of(snapshot),
        list(snapshot.risks),
        snapshot.impacts,
        alpha_override=alpha,
        treatment=outcome,
    )
    registry.record_snapshot(store, treated)
    _note(f"snapshot recorded: {treated.snapshot_id}")
    _emit(reports.treatment_report(evaluation, args.format, reductions=matrix), args.out)
    return EXIT_OK if evaluation.feasible else EXIT_INFEASIBLE


def _profile_of(snapshot) -> registry.OrganizationProfile:
    """Rebuild the profile view embedded in a snapshot for re-evaluation."""
    return registry.OrganizationProfile(
        org_id=snapshot.org_id,
        name=snapshot.org_id,
        objectives=tuple(snapshot.objectives),
        security_requirements=(),
        tolerance=snapshot.alpha,
    )


def cmd_monitor(args) -> int:
    store = _store_from(args)
    a = registry.load_snapshot(store, args.a)
    b = registry.load_snapshot(store, args.b)
    diff = registry.diff_snapshots(a, b)
    _emit(reports.monitoring_report(diff, args.mode, args.format), args.out)
    return EXIT_OK


def _port_free(host: str, port: int) -> bool:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((host, port))
        except OSError:
            return False
    return True


def cmd_serve(args) -> int:
    store = _store_from(args)
    store.probe_writable()
    if not _port_free(args.host, args.port):
        raise StoreError(f"port {args.port} on {args.host} is busy")
    store.acquire_serve_lock()
    try:
        import uvicorn

        from .service import create_app

        app = create_app(
            store,
            auth_path=args.auth,
            ui_dir=args.ui_dir,
            on_shutdown=[store.release_serve_lock],
        )
        _note(f"serving on http://{args.host}:{args.port} (store: {store.root})")
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        # covers failures before/around the server; the lifespan hook covers
        # signal-driven shutdown, where uvicorn re-raises before we return
        store.release_serve_lock()
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cloudrisk",
        description=(
            "Objective-weighted security risk management: evaluate risk "
            "levels against business objectives, run consensus estimation, "
            "plan cost-effective treatment, and monitor drift."
        ),
        epilog=(
            "exit codes: 0 ok, 1 unexpected, 2 validation, 3 deadlock, "
            "4 infeasible, 5 store/lock/port"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    assess = sub.add_parser(
        "assess", help="evaluate risk levels and record a snapshot"
    )
    assess.add_argument("--profile", required=True, help="organization profile JSON")
    assess.add_argument("--risks", required=True, help="risk register JSON")
    assess.add_argument("--matrix", required=True, help="impact matrix CSV or JSON")
    assess.add_argument(
        "--alpha-override", type=float, help="tolerance threshold override"
    )
    assess.add_argument("--snapshot-id", help="id for the recorded snapshot")
    _add_report_flags(assess)
    _add_store_flag(assess)
    assess.set_defaults(func=cmd_assess)

    delphi = sub.add_parser(
        "delphi", help="replay estimation rounds from tabular files"
    )
    delphi.add_argument("--session", required=True, help="session definition JSON")
    delphi.add_argument(
        "--round",
        dest="rounds",
        action="append",
        required=True,
        help="round table CSV (repeatable, applied in order)",
    )
    _add_report_flags(delphi)
    _add_store_flag(delphi)
    delphi.set_defaults(func=cmd_delphi)

    treat = sub.add_parser(
        "treat", help="evaluate or optimize a treatment plan for a snapshot"
    )
    treat.add_argument("--snapshot", required=True, help="snapshot id in the store")
    treat.add_argument(
        "--reductions", required=True, help="reduction matrix CSV or JSON"
    )
    treat.add_argument("--catalog", help="countermeasure catalog JSON (costs)")
    group = treat.add_mutually_exclusive_group(required=True)
    group.add_argument("--plan", help="comma-separated countermeasure ids")
    group.add_argument(
        "--optimize", choices=["exact", "greedy"], help="select a plan automatically"
    )
    treat.add_argument(
        "--alpha-override", type=float, help="tolerance threshold override"
    )
    treat.add_argument("--record-as", help="id for the recorded treated snapshot")
    _add_report_flags(treat)
    _add_store_flag(treat)
    treat.set_defaults(func=cmd_treat)

    monitor = sub.add_parser("monitor", help="diff two snapshots")
    monitor.add_argument("--a", required=True, help="earlier snapshot id")
    monitor.add_argument("--b", required=True, help="later snapshot id")
    _add_report_flags(monitor)
    _add_store_flag(monitor)
    monitor.set_defaults(func=cmd_monitor)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8421)
    serve.add_argument("--auth", help="token file (JSON, format auth/1)")
    serve.add_argument("--ui-dir", help="static UI assets to serve at /ui")
    _add_store_flag(serve)
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DeadlockError as exc:
        _note(f"deadlock: {exc}")
        return EXIT_DEADLOCK
    except (ConflictError, StoreError) as exc:
        _note(f"store error: {exc}")
        return EXIT_STORE
    except CloudRiskError as exc:
        _note(f"error: {exc}")
        return EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover - safety net
        _note(f"unexpected error: {exc}")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
