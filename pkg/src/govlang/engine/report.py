"""Audit reports and enactment actions, plus their JSON serialization.

Reports serialize deterministically: keys appear in a fixed order, fraction
weights become floats, and replaying the same model and event stream yields
byte-identical output.  The engine only *emits* actions; executing them
against a platform is somebody else's job.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from ..model import DecisionType
from .state import (
    BallotBox,
    CollaborationState,
    PhaseState,
    Vote,
)
from .tally import ConditionResult, Decision


class ActionKind(Enum):
    MERGE_PROPOSAL = "merge-proposal"
    CLOSE_PROPOSAL = "close-proposal"
    ANNOUNCE_WINNER = "announce-winner"
    ESCALATE_TO_FALLBACK = "escalate-to-fallback"
    INVALIDATE_PROCESS = "invalidate-process"


@dataclass(frozen=True)
class ActionRecord:
    kind: ActionKind
    collab_id: str
    details: tuple[tuple[str, object], ...] = ()

    def detail_dict(self) -> dict:
        return dict(self.details)


@dataclass(frozen=True)
class PhaseReport:
    policy_id: str
    status: str
    opened_at: int | None
    deadline_at: int | None
    resolved_at: int | None
    votes: tuple[Vote, ...]
    pre_conditions: tuple[ConditionResult, ...]
    decision: Decision | None


@dataclass(frozen=True)
class DecisionReport:
    collab_id: str
    scope_id: str
    policy_id: str
    decision_type: DecisionType
    candidates: tuple[str, ...] | None
    status: str
    opened_at: int
    closed_at: int
    pre_conditions: tuple[ConditionResult, ...]
    phases: tuple[PhaseReport, ...]
    final: Decision | None
    actions: tuple[ActionRecord, ...]


# ---------------------------------------------------------------------------
# Serialization


def _weight(value: Fraction) -> float | int:
    as_float = float(value)
    return int(as_float) if as_float.is_integer() else as_float


def condition_to_dict(result: ConditionResult) -> dict:
    return {
        "kind": result.kind,
        "placement": result.placement,
        "result": "pass" if result.passed else "fail",
        "detail": result.detail,
    }


def vote_to_dict(vote: Vote) -> dict:
    return {
        "participant": vote.participant_id,
        "value": vote.value,
        "weight": _weight(vote.effective_weight),
        "ts": vote.ts,
        "rationale": vote.rationale,
        "carried": vote.carried,
    }


def decision_to_dict(decision: Decision) -> dict:
    return {
        "outcome": decision.outcome.value,
        "winner": decision.winner,
        "tallies": {option: _weight(w) for option, w in decision.tallies.items()},
        "tie": decision.tie_flag,
        "fallback_used": decision.fallback_used,
        "conditions": [condition_to_dict(c) for c in decision.condition_results],
        "notes": list(decision.notes),
    }


def phase_to_dict(phase: PhaseReport) -> dict:
    return {
        "policy": phase.policy_id,
        "status": phase.status,
        "opened_at": phase.opened_at,
        "deadline_at": phase.deadline_at,
        "resolved_at": phase.resolved_at,
        "votes": [vote_to_dict(v) for v in phase.votes],
        "pre_conditions": [condition_to_dict(c) for c in phase.pre_conditions],
        "decision": decision_to_dict(phase.decision) if phase.decision else None,
    }


def action_to_dict(action: ActionRecord) -> dict:
    return {
        "kind": action.kind.value,
        "collab": action.collab_id,
        "details": action.detail_dict(),
    }


def report_to_dict(report: DecisionReport) -> dict:
    return {
        "collab": report.collab_id,
        "scope": report.scope_id,
        "policy": report.policy_id,
        "decision_type": "candidate" if report.decision_type is DecisionType.CANDIDATE else "boolean",
        "candidates": list(report.candidates) if report.candidates is not None else None,
        "status": report.status,
        "opened_at": report.opened_at,
        "closed_at": report.closed_at,
        "pre_conditions": [condition_to_dict(c) for c in report.pre_conditions],
        "phases": [phase_to_dict(p) for p in report.phases],
        "final": decision_to_dict(report.final) if report.final else None,
        "actions": [action_to_dict(a) for a in report.actions],
    }


def report_to_json(report: DecisionReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def reports_to_json(reports: list[DecisionReport]) -> str:
    return json.dumps([report_to_dict(r) for r in reports], indent=2) + "\n"


# ---------------------------------------------------------------------------
# Store snapshots (for the simulator's --snapshot flag)


def _ballot_to_dict(ballot: BallotBox | None) -> dict | None:
    if ballot is None:
        return None
    return {
        "eligible": list(ballot.eligible),
        "votes": [vote_to_dict(v) for v in ballot.votes.values()],
    }


def _phase_state_to_dict(phase: PhaseState) -> dict:
    return {
        "policy": phase.policy_id,
        "status": phase.status.value,
        "opened_at": phase.opened_at,
        "deadline_at": phase.deadline_at,
        "resolved_at": phase.resolved_at,
        "ballot": _ballot_to_dict(phase.ballot),
        "decision": decision_to_dict(phase.decision) if phase.decision else None,
    }


def snapshot_to_dict(store: dict[str, CollaborationState]) -> dict:
    return {
        "collaborations": [
            {
                "collab": st.collab_id,
                "scope": st.scope_id,
                "policy": st.policy_id,
                "status": st.status.value,
                "opened_at": st.opened_at,
                "closed_at": st.closed_at,
                "candidates": list(st.candidates) if st.candidates is not None else None,
                "phases": [_phase_state_to_dict(ph) for ph in st.phases],
            }
            for st in store.values()
        ]
    }


def snapshot_to_json(store: dict[str, CollaborationState]) -> str:
    return json.dumps(snapshot_to_dict(store), indent=2) + "\n"
