"""Decision engine: events in, audit reports and enactment actions out."""
from __future__ import annotations

from .engine import DecisionEngine, RunResult, run, run_log
from .events import (
    CollaborationCancelled,
    CollaborationOpened,
    Event,
    EventFormatError,
    Tick,
    VoteCast,
    event_from_obj,
    event_to_obj,
    read_event_log,
    write_event_log,
)
from .report import (
    ActionKind,
    ActionRecord,
    DecisionReport,
    PhaseReport,
    report_to_dict,
    report_to_json,
    reports_to_json,
    snapshot_to_dict,
    snapshot_to_json,
)
from .state import (
    BallotBox,
    CollabStatus,
    CollaborationState,
    PhaseState,
    PhaseStatus,
    Vote,
)
from .tally import (
    ConditionResult,
    Decision,
    Outcome,
    check_conditions,
    combine_phase_outcomes,
    resolve_composed,
    tally_lazy_consensus,
    tally_leader_driven,
    tally_majority,
    tally_policy,
)

__all__ = [
    "DecisionEngine",
    "RunResult",
    "run",
    "run_log",
    "CollaborationOpened",
    "VoteCast",
    "Tick",
    "CollaborationCancelled",
    "Event",
    "EventFormatError",
    "event_from_obj",
    "event_to_obj",
    "read_event_log",
    "write_event_log",
    "ActionKind",
    "ActionRecord",
    "DecisionReport",
    "PhaseReport",
    "report_to_dict",
    "report_to_json",
    "reports_to_json",
    "snapshot_to_dict",
    "snapshot_to_json",
    "BallotBox",
    "Vote",
    "PhaseState",
    "PhaseStatus",
    "CollaborationState",
    "CollabStatus",
    "Decision",
    "Outcome",
    "ConditionResult",
    "tally_majority",
    "tally_lazy_consensus",
    "tally_leader_driven",
    "tally_policy",
    "resolve_composed",
    "combine_phase_outcomes",
    "check_conditions",
]
