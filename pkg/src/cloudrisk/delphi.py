"""Anonymous, moderated estimation sessions.

A session collects numerical estimates of weights, likelihoods, impacts
and countermeasure reductions from a roster of participants over
successive rounds. After each round the engine aggregates the estimates,
measures agreement, and either converges (ready to finalize), opens
another round carrying the aggregate back as shared feedback, or -- after
a configurable round cap -- deadlocks pending an explicit moderator
override.

Participant handles are expected to be pre-anonymized; aggregates emitted
by the engine never contain them.

Agreement metric: for each quantity the round median is computed and the
consensus ratio is the fraction of estimates within +/- ``delta`` of it.
A quantity has reached consensus when that ratio is at least ``theta``
(default 0.85); the round as a whole has converged when every quantity
has. Even-count medians use the midpoint of the two central values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import mean, median
from typing import Iterable, Mapping, Sequence

from .errors import DeadlockError, StateError, UnknownIdError, ValidationError

DEFAULT_THETA = 0.85
DEFAULT_DELTA = 0.05
DEFAULT_MAX_ROUNDS = 10

QUANTITY_KINDS = ("weight", "likelihood", "impact", "levelred")


@dataclass(frozen=True)
class QuantityRef:
    """One estimated quantity: what kind, and which ids it targets."""

    kind: str
    risk_id: str | None = None
    objective_id: str | None = None
    countermeasure_id: str | None = None

    def __post_init__(self):
        expected = {
            "weight": ("objective_id",),
            "likelihood": ("risk_id",),
            "impact": ("risk_id", "objective_id"),
            "levelred": ("risk_id", "countermeasure_id"),
        }
        if self.kind not in expected:
            raise ValidationError(f"unknown quantity kind {self.kind!r}")
        for attr in ("risk_id", "objective_id", "countermeasure_id"):
            value = getattr(self, attr)
            if attr in expected[self.kind]:
                if not value:
                    raise ValidationError(f"{self.kind} quantity needs {attr}")
            elif value is not None:
                raise ValidationError(f"{self.kind} quantity must not set {attr}")

    @property
    def key(self) -> str:
        if self.kind == "weight":
            return f"weight:{self.objective_id}"
        if self.kind == "likelihood":
            return f"likelihood:{self.risk_id}"
        if self.kind == "impact":
            return f"impact:{self.risk_id}:{self.objective_id}"
        return f"levelred:{self.risk_id}:{self.countermeasure_id}"

    @classmethod
    def parse(cls, key: str) -> "QuantityRef":
        parts = key.split(":")
        kind = parts[0]
        if kind == "weight" and len(parts) == 2:
            return cls("weight", objective_id=parts[1])
        if kind == "likelihood" and len(parts) == 2:
            return cls("likelihood", risk_id=parts[1])
        if kind == "impact" and len(parts) == 3:
            return cls("impact", risk_id=parts[1], objective_id=parts[2])
        if kind == "levelred" and len(parts) == 3:
            return cls("levelred", risk_id=parts[1], countermeasure_id=parts[2])
        raise ValidationError(f"malformed quantity key {key!r}")


@dataclass(frozen=True)
class QuantityStats:
    """Anonymous aggregate for one quantity in one round."""

    median: float
    mean: float
    min: float
    max: float
    ratio: float
    reached: bool


@dataclass(frozen=True)
class ConsensusReport:
    round_number: int
    theta: float
    delta: float
    per_quantity: Mapping[str, QuantityStats]
    overall_reached: bool


@dataclass
class Round:
    number: int
    status: str = "collecting"  # collecting | closed
    # quantity key -> participant -> estimate; raw values, never exposed
    # through aggregates
    estimates: dict[str, dict[str, float]] = field(default_factory=dict)
    report: ConsensusReport | None = None


def consensus_ratio(estimates: Sequence[float], delta: float) -> float:
    """Fraction of estimates within +/- delta of the median."""
    if not estimates:
        raise ValidationError("cannot measure consensus of an empty estimate list")
    center = median(estimates)
    hits = sum(1 for e in estimates if abs(e - center) <= delta)
    return hits / len(estimates)


class DelphiSession:
    """State machine for one estimation session.

    Mutations must be externally serialized per session (the HTTP service
    holds one lock per session); reads of the projection methods are safe
    against a consistent snapshot.
    """

    def __init__(
        self,
        session_id: str,
        quantities: Sequence[QuantityRef],
        roster: Sequence[str],
        moderator: str,
        theta: float = DEFAULT_THETA,
        delta: float = DEFAULT_DELTA,
        max_rounds: int = DEFAULT_MAX_ROUNDS,
        known_ids: Mapping[str, Iterable[str]] | None = None,
    ):
        if len(roster) < 2:
            raise ValidationError("a session needs at least two participants")
        if len(set(roster)) != len(roster):
            raise ValidationError("duplicate participant handles in roster")
        if not quantities:
            raise ValidationError("a session needs at least one quantity")
        keys = [q.key for q in quantities]
        if len(set(keys)) != len(keys):
            dupes = sorted({k for k in keys if keys.count(k) > 1})
            raise ValidationError("duplicate quantities: " + ", ".join(dupes))
        if not 0.0 < theta <= 1.0:
            raise ValidationError(f"theta must be in (0, 1], got {theta!r}")
        if not 0.0 < delta <= 1.0:
            raise ValidationError(f"delta must be in (0, 1], got {delta!r}")
        if max_rounds < 1:
            raise ValidationError("round cap must be at least 1")
        if known_ids is not None:
            self._check_targets(quantities, known_ids)

        self.session_id = session_id
        self.quantities = tuple(quantities)
        self.roster = tuple(roster)
        self.moderator = moderator
        self.theta = theta
        self.delta = delta
        self.max_rounds = max_rounds
        self.state = "open"  # open | round-active | deadlocked | finalized
        self.rounds: list[Round] = []
        self.final_estimates: dict[str, float] | None = None
        self.audit: list[dict] = []

    @staticmethod
    def _check_targets(quantities, known_ids):
        pools = {
            "risk_id": set(known_ids.get("risks", ())),
            "objective_id": set(known_ids.get("objectives", ())),
            "countermeasure_id": set(known_ids.get("countermeasures", ())),
        }
        bad = []
        for q in quantities:
            for attr, pool in pools.items():
                target = getattr(q, attr)
                if target is not None and target not in pool:
                    bad.append(f"{q.key}: unknown {attr} {target!r}")
        if bad:
            raise UnknownIdError("; ".join(bad))

    # -- round lifecycle ---------------------------------------------------

    def open_round(self) -> Round:
        if self.state == "finalized":
            raise StateError("session is finalized")
        if self.state == "deadlocked":
            raise DeadlockError("session is deadlocked; only override is possible")
        if self.state == "round-active":
            raise StateError("a round is already active")
        if len(self.rounds) >= self.max_rounds:
            raise DeadlockError("round cap reached")
        rnd = Round(number=len(self.rounds) + 1)
        self.rounds.append(rnd)
        self.state = "round-active"
        self.audit.append({"event": "round-opened", "round": rnd.number})
        return rnd

    def submit(self, participant: str, quantity_key: str, value: float) -> None:
        """Record one estimate; resubmission within the open round overwrites."""
        if self.state == "finalized":
            raise StateError("session is finalized")
        if self.state != "round-active":
            raise StateError("no active round")
        if participant not in self.roster:
            raise UnknownIdError(f"unknown participant {participant!r}")
        if quantity_key not in self._quantity_keys():
            raise UnknownIdError(f"unknown quantity {quantity_key!r}")
        if not 0.0 <= value <= 1.0:
            raise ValidationError(
                f"estimate {value!r} for {quantity_key} out of [0, 1]"
            )
        rnd = self.rounds[-1]
        rnd.estimates.setdefault(quantity_key, {})[participant] = value

    def carried_defaults(self, participant: str) -> dict[str, float]:
        """The participant's estimates from the last closed round.

        Presented as prefills that still require explicit confirmation in
        the new round; the engine never copies them automatically.
        """
        if participant not in self.roster:
            raise UnknownIdError(f"unknown participant {participant!r}")
        for rnd in reversed(self.rounds):
            if rnd.status == "closed":
                return {
                    key: per_part[participant]
                    for key, per_part in rnd.estimates.items()
                    if participant in per_part
                }
        return {}

    def missing_cells(self) -> list[tuple[str, str]]:
        """(participant, quantity) pairs still unconfirmed in the open round."""
        if self.state != "round-active":
            return []
        rnd = self.rounds[-1]
        missing = []
        for key in self._quantity_keys():
            have = rnd.estimates.get(key, {})
            for participant in self.roster:
                if participant not in have:
                    missing.append((participant, key))
        return missing

    def close_round(self) -> ConsensusReport:
        """Close the active round and aggregate it.

        Requires a complete round: every participant must have confirmed
        every quantity. On convergence the session becomes finalizable;
        otherwise another round may be opened, unless the cap was hit, in
        which case the session deadlocks.
        """
        if self.state != "round-active":
            raise StateError("no active round to close")
        missing = self.missing_cells()
        if missing:
            cells = ", ".join(f"({p}, {q})" for p, q in missing[:20])
            raise ValidationError(
                f"round incomplete: {len(missing)} missing estimates",
                [cells],
            )
        rnd = self.rounds[-1]
        per_quantity = {}
        for key in self._quantity_keys():
            values = list(rnd.estimates[key].values())
            ratio = consensus_ratio(values, self.delta)
            per_quantity[key] = QuantityStats(
                median=median(values),
                mean=mean(values),
                min=min(values),
                max=max(values),
                ratio=ratio,
                reached=ratio >= self.theta,
            )
        report = ConsensusReport(
            round_number=rnd.number,
            theta=self.theta,
            delta=self.delta,
            per_quantity=per_quantity,
            overall_reached=all(s.reached for s in per_quantity.values()),
        )
        rnd.status = "closed"
        rnd.report = report
        self.audit.append(
            {
                "event": "round-closed",
                "round": rnd.number,
                "overall_reached": report.overall_reached,
            }
        )
        if report.overall_reached:
            self.state = "open"
        elif len(self.rounds) >= self.max_rounds:
            self.state = "deadlocked"
            self.audit.append({"event": "deadlocked", "round": rnd.number})
        else:
            self.state = "open"
        return rnd.report

    # -- finalization --------------------------------------------------------

    def finalize(self, by: str, force: bool = False) -> dict[str, float]:
        """Freeze the session and return the final estimate per quantity.

        The final value is the median of the last closed round; weight
        quantities are then proportionally rescaled to sum exactly to 1.
        ``force`` is only honored from the deadlocked state and is flagged
        in the audit trail.
        """
        if by != self.moderator:
            raise StateError("only the moderator may finalize")
        if self.state == "finalized":
            raise StateError("session already finalized")
        last_closed = next(
            (r for r in reversed(self.rounds) if r.status == "closed"), None
        )
        if last_closed is None:
            raise StateError("no closed round to finalize from")
        if self.state == "round-active":
            raise StateError("close the active round first")
        reached = last_closed.report.overall_reached
        if not reached:
            if self.state != "deadlocked" or not force:
                raise StateError("consensus not reached")
        finals = {
            key: last_closed.report.per_quantity[key].median
            for key in self._quantity_keys()
        }
        self._renormalize_weights(finals)
        self.final_estimates = finals
        self.state = "finalized"
        self.audit.append(
            {
                "event": "finalized",
                "by": by,
                "round": last_closed.number,
                "forced": bool(force and not reached),
            }
        )
        return dict(finals)

    def _renormalize_weights(self, finals: dict[str, float]) -> None:
        weight_keys = [q.key for q in self.quantities if q.kind == "weight"]
        if not weight_keys:
            return
        total = sum(finals[k] for k in weight_keys)
        if total <= 0.0:
            raise ValidationError("weight medians sum to zero; cannot renormalize")
        for k in weight_keys:
            finals[k] = finals[k] / total

    # -- projections ---------------------------------------------------------

    def _quantity_keys(self) -> list[str]:
        return [q.key for q in self.quantities]

    def last_report(self) -> ConsensusReport | None:
        for rnd in reversed(self.rounds):
            if rnd.report is not None:
                return rnd.report
        return None

    def status_view(self) -> dict:
        """Aggregate-only projection of session state; no raw estimates."""
        active = self.rounds[-1] if self.state == "round-active" else None
        return {
            "session_id": self.session_id,
            "state": self.state,
            "round_count": len(self.rounds),
            "active_round": active.number if active else None,
            "missing_count": len(self.missing_cells()),
            "theta": self.theta,
            "delta": self.delta,
            "max_rounds": self.max_rounds,
            "quantities": self._quantity_keys(),
            "participant_count": len(self.roster),
        }


def create_session(
    session_id: str,
    quantities: Sequence[QuantityRef],
    roster: Sequence[str],
    moderator: str,
    theta: float = DEFAULT_THETA,
    delta: float = DEFAULT_DELTA,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    known_ids: Mapping[str, Iterable[str]] | None = None,
) -> DelphiSession:
    """Create an open session; see :class:`DelphiSession` for the contract."""
    return DelphiSession(
        session_id, quantities, roster, moderator, theta, delta, max_rounds, known_ids
    )
