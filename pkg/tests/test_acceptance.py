"""Acceptance suite.

Each test implements one exit criterion at its stated tolerance and
prints a PASS line on success (run with ``pytest tests/test_acceptance.py
-v -s`` to see them). Tolerances are pinned here, not configurable.
"""

import json
import threading
import time
from pathlib import Path

import httpx

from cloudrisk import model, planner, registry, reports
from cloudrisk.model import Classification, Objective, RiskRecord
from cloudrisk.service import create_app
from cloudrisk.store import Store

import at_fixture as at
import test_cli
import test_delphi
import test_model
import test_planner
import test_registry

FIXTURES = Path(__file__).parent / "fixtures"

FULL_PRECISION_TOL = 1e-12
GRL_AFTER_TOL = 1e-4
PROPERTY_TIME_BUDGET_S = 10.0
AT_REPRODUCTION_BUDGET_S = 1.0
WHAT_IF_LATENCY_BUDGET_S = 0.050


def ok(line: str) -> None:
    print(f"PASS: {line}", flush=True)


def at_inputs():
    objectives = [Objective(i, n, w) for i, n, w in at.OBJECTIVES]
    risks = [RiskRecord(i, n, lk) for i, n, lk in at.RISKS]
    return objectives, risks


# ---------------------------------------------------------------------------
# Criterion 1: worked-example reproduction, desk scale, < 1s
# ---------------------------------------------------------------------------


class TestUseCaseReproduction:
    def test_risk_levels_both_precisions(self):
        start = time.perf_counter()
        objectives, risks = at_inputs()
        results = model.evaluate(objectives, risks, at.IMPACTS, at.ALPHA)
        levels = {r.risk_id: r.level for r in results}
        grl = model.global_risk_level(levels.values())

        expected_full = {
            "r1": 0.459, "r2": 0.107, "r3": 0.1225, "r4": 0.504, "r5": 0.105,
        }
        for rid, expected in expected_full.items():
            assert abs(levels[rid] - expected) <= FULL_PRECISION_TOL
        assert abs(grl - 1.2975) <= FULL_PRECISION_TOL

        displayed = [reports.display(levels[rid], "paper-compat")
                     for rid in ("r1", "r2", "r3", "r4", "r5")]
        assert displayed == ["0.46", "0.11", "0.12", "0.50", "0.11"]
        assert reports.display_sum(levels.values(), "paper-compat") == "1.30"

        elapsed = time.perf_counter() - start
        assert elapsed < AT_REPRODUCTION_BUDGET_S
        ok(f"risk levels reproduce the worked example in both modes "
           f"({elapsed * 1000:.1f} ms)")

    def test_classification_exactly_r1_r4(self):
        objectives, risks = at_inputs()
        results = model.evaluate(objectives, risks, at.IMPACTS, 0.25)
        unacceptable = {r.risk_id for r in results
                        if r.classification is Classification.UNACCEPTABLE}
        assert unacceptable == {"r1", "r4"}
        ok("alpha 0.25 classifies exactly {r1, r4} unacceptable")

    def test_treatment_reproduction(self):
        objectives, risks = at_inputs()
        results = model.evaluate(objectives, risks, at.IMPACTS, at.ALPHA)
        levels = {r.risk_id: r.level for r in results}
        ev = planner.evaluate_plan(
            levels, at.REDUCTIONS, ["c1", "c2", "c3"], at.ALPHA
        )
        assert ev.crrs["r1"] == 0.98  # exact
        assert ev.crrs["r4"] == 0.9  # exact
        assert reports.display(ev.residuals["r1"], "paper-compat") == "0.01"
        assert reports.display(ev.residuals["r4"], "paper-compat") == "0.05"
        assert reports.display_sum(ev.residuals.values(), "paper-compat") == "0.40"
        assert abs(ev.grl_after - 0.3941) <= GRL_AFTER_TOL
        assert ev.grr == 1.88  # exact
        report = reports.treatment_report(
            planner.with_mode(ev, "paper-compat"), reductions=at.REDUCTIONS
        )
        assert "69%" in report
        ok("treatment plan {c1,c2,c3} reproduces the reduction tables, "
           "GRL 0.40/0.3941, GRR 1.88, 69% line")


# ---------------------------------------------------------------------------
# Criterion 2: property suites, >= 1000 randomized cases each, < 10s total
# ---------------------------------------------------------------------------


PROPERTY_SUITES = [
    ("level bounds and extremes", test_model.TestRiskLevelProperties,
     "test_bounds_and_extremes"),
    ("level reaches 1 only at the top corner", test_model.TestRiskLevelProperties,
     "test_level_one_only_at_top"),
    ("level monotone in likelihood and impacts", test_model.TestRiskLevelProperties,
     "test_monotone_in_likelihood_and_impacts"),
    ("combined reduction permutation invariance", test_model.TestReductionProperties,
     "test_permutation_invariance"),
    ("combined reduction monotone under append", test_model.TestReductionProperties,
     "test_monotone_under_append"),
    ("combined reduction absorbs elimination", test_model.TestReductionProperties,
     "test_absorption_at_elimination"),
    ("residual algebraic identity", test_model.TestReductionProperties,
     "test_residual_algebraic_identity"),
    ("aggregate linearity", test_model.TestAggregateLinearity,
     "test_sum_of_parts_equals_concatenation"),
    ("optimizer equals brute-force oracle", test_planner.TestOptimizeExact,
     "test_oracle_equivalence"),
    ("greedy feasible whenever possible", test_planner.TestOptimizeGreedy,
     "test_greedy_feasible_whenever_possible"),
    ("what-if double toggle identity", test_planner.TestWhatIf,
     "test_double_toggle_is_identity"),
    ("consensus ratio permutation invariance", test_delphi.TestConsensusRatio,
     "test_permutation_invariance"),
    ("consensus ratio 1.0 within band", test_delphi.TestConsensusRatio,
     "test_ratio_one_when_spread_within_delta"),
    ("finalized weights always validate", test_delphi.TestFinalize,
     "test_renormalized_weights_validate"),
    ("aggregates anonymous, closed rounds immutable", test_delphi.TestAnonymity,
     "test_no_participant_handle_in_any_aggregate"),
    ("profile round-trip identity", test_registry.TestRoundTripProperties,
     "test_profile_round_trip_identity"),
    ("snapshot round-trip and recompute equality",
     test_registry.TestRoundTripProperties,
     "test_snapshot_round_trip_and_recompute"),
]


class TestPropertySuites:
    def test_scale_and_budget(self):
        assert test_model.N_CASES >= 1000
        start = time.perf_counter()
        for name, suite, method in PROPERTY_SUITES:
            getattr(suite(), method)()
        elapsed = time.perf_counter() - start
        assert elapsed < PROPERTY_TIME_BUDGET_S
        ok(f"{len(PROPERTY_SUITES)} property suites at >=1000 cases "
           f"in {elapsed:.2f}s (< {PROPERTY_TIME_BUDGET_S:.0f}s)")


# ---------------------------------------------------------------------------
# Criterion 3: CLI end-to-end against checked-in goldens, both modes
# ---------------------------------------------------------------------------


class TestCliEndToEnd:
    def test_six_phases_match_goldens_and_deterministic(self, capsys, tmp_path):
        goldens = Path(__file__).parent / "goldens"
        for mode, tag in (("paper-compat", "paper"), ("full", "full")):
            first = test_cli.run_workflow(capsys, tmp_path / f"a-{tag}", mode, tag)
            second = test_cli.run_workflow(capsys, tmp_path / f"b-{tag}", mode, tag)
            assert first == second, "workflow output not deterministic"
            for name in ("assess", "treat", "monitor"):
                golden = (goldens / f"{name}_{tag}.txt").read_text()
                assert first[name] == golden, f"{name}/{tag} drifted from golden"
        with capsys.disabled():
            ok("CLI six-phase workflow matches goldens in both modes, "
               "deterministic across runs")


# ---------------------------------------------------------------------------
# Criterion 4: service contract against a live instance
# ---------------------------------------------------------------------------


class LiveService:
    def __init__(self, tmp_path: Path):
        self.store = Store(tmp_path / "store")
        self._seed()
        tokens = {
            "tok-mod": ("mod", "moderator"),
            "tok-p1": ("p1", "participant"),
            "tok-p2": ("p2", "participant"),
            "tok-view": ("observer", "viewer"),
        }
        self.app = create_app(self.store, tokens=tokens)
        import uvicorn

        config = uvicorn.Config(
            self.app, host="127.0.0.1", port=0, log_level="error"
        )
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def _seed(self):
        profile = registry.load_profile(FIXTURES / "profile.json")
        risks = registry.load_risks(FIXTURES / "risks.json")
        impacts = registry.import_impact_matrix(
            FIXTURES / "impacts.csv", profile, risks
        )
        reductions = registry.import_reduction_matrix(
            FIXTURES / "reductions.csv", risks
        )
        self.store.put("profiles/at", registry.profile_to_doc(profile))
        self.store.put("registers/at", registry.risks_to_doc("at", risks))
        self.store.put("matrices/at", registry.impact_matrix_to_doc("at", impacts))
        self.store.put("reductions/at", registry.reduction_matrix_to_doc(reductions))
        self.store.put(
            "catalog",
            json.loads((FIXTURES / "catalog.json").read_text()),
        )

    def __enter__(self):
        self.thread.start()
        deadline = time.time() + 10
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("service did not start")
            time.sleep(0.01)
        port = self.server.servers[0].sockets[0].getsockname()[1]
        self.base = f"http://127.0.0.1:{port}/api/v1"
        return self

    def __exit__(self, *exc):
        self.server.should_exit = True
        self.thread.join(timeout=10)


class TestServiceContractLive:
    def test_live_contract(self, tmp_path):
        with LiveService(tmp_path) as live:
            base = live.base
            mod = {"Authorization": "Bearer tok-mod"}
            p1 = {"Authorization": "Bearer tok-p1"}
            p2 = {"Authorization": "Bearer tok-p2"}

            health = httpx.get(f"{base}/health")
            assert health.status_code == 200

            r = httpx.post(f"{base}/sessions", json={
                "session_id": "live", "quantities": ["likelihood:r1"],
                "participants": ["p1", "p2"], "moderator": "mod",
                "org_id": "at",
            }, headers=mod)
            assert r.status_code == 201, r.text
            assert httpx.post(f"{base}/sessions/live/rounds",
                              headers=mod).status_code == 201

            # idempotent submission: replaying the same keyed request is safe
            idem = {**p1, "Idempotency-Key": "k1"}
            body = {"quantity": "likelihood:r1", "value": 0.6}
            first = httpx.post(f"{base}/sessions/live/estimates",
                               json=body, headers=idem)
            replay = httpx.post(f"{base}/sessions/live/estimates",
                                json=body, headers=idem)
            assert first.status_code == 201
            assert first.json()["payload"] == replay.json()["payload"]

            assert httpx.post(f"{base}/sessions/live/estimates",
                              json={"quantity": "likelihood:r1", "value": 0.62},
                              headers=p2).status_code == 201

            # anonymity authorization: participants cannot read raw estimates
            denied = httpx.get(f"{base}/sessions/live/rounds/1/estimates",
                               headers=p1)
            assert denied.status_code == 403
            assert denied.json()["error"]["code"] == "forbidden"

            # concurrent submissions from different participants all land
            results = []

            def resubmit(headers, value):
                resp = httpx.post(f"{base}/sessions/live/estimates",
                                  json={"quantity": "likelihood:r1",
                                        "value": value},
                                  headers=headers)
                results.append(resp.status_code)

            workers = [
                threading.Thread(target=resubmit, args=(h, v))
                for h, v in ((p1, 0.61), (p2, 0.59), (p1, 0.6), (p2, 0.6))
            ]
            for w in workers:
                w.start()
            for w in workers:
                w.join()
            assert results == [201, 201, 201, 201]

            # round close succeeds once; the retry conflicts
            closed = httpx.post(f"{base}/sessions/live/rounds/current/close",
                                headers=mod)
            assert closed.status_code == 200, closed.text
            retry = httpx.post(f"{base}/sessions/live/rounds/current/close",
                               headers=mod)
            assert retry.status_code == 409

            # the full treatment path works over the live instance
            r = httpx.post(f"{base}/assessments/run",
                           json={"org_id": "at", "snapshot_id": "live-base"},
                           headers=mod)
            assert r.status_code == 201, r.text
            r = httpx.post(f"{base}/treatment/what-if", json={
                "org_id": "at", "snapshot_id": "live-base",
                "plan": ["c1", "c3"], "toggle": "c2",
                "rounding_mode": "paper-compat",
            }, headers=p1)
            assert r.status_code == 200
            assert r.json()["payload"]["display"]["crrs"]["r1"] == "0.98"
        ok("live service: anonymity authorization, idempotent submission, "
           "round-close conflict on retry")


# ---------------------------------------------------------------------------
# What-if latency: interactive-use contract
# ---------------------------------------------------------------------------


class TestWhatIfLatency:
    def test_toggle_under_50ms(self):
        objectives, risks = at_inputs()
        results = model.evaluate(objectives, risks, at.IMPACTS, at.ALPHA)
        levels = {r.risk_id: r.level for r in results}
        timings = []
        plan = []
        for i in range(100):
            toggle = ("c1", "c2", "c3")[i % 3]
            start = time.perf_counter()
            ev = planner.what_if(levels, at.REDUCTIONS, plan, toggle, at.ALPHA)
            timings.append(time.perf_counter() - start)
            plan = list(ev.plan)
        timings.sort()
        median = timings[len(timings) // 2]
        worst = timings[-1]
        assert median < WHAT_IF_LATENCY_BUDGET_S
        assert worst < WHAT_IF_LATENCY_BUDGET_S
        ok(f"what-if toggle latency median {median * 1e6:.0f}us, "
           f"worst {worst * 1e6:.0f}us (< 50ms)")
