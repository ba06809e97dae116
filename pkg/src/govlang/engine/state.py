"""Mutable per-collaboration state: ballots, phases, lifecycle status.

Terminal statuses are sticky; the engine never reopens a resolved,
invalidated, or cancelled collaboration.  Composed policies get one
:class:`PhaseState` per phase; simple policies get a single synthetic phase
wrapping the policy itself, so resolution logic is uniform.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction


@dataclass(frozen=True)
class Vote:
    """One registered vote.  ``effective_weight`` is the voter's vote value
    at registration time; ``carried`` marks votes inherited from the
    previous phase of a composed policy."""

    participant_id: str
    value: bool | str
    ts: int
    effective_weight: Fraction
    rationale: str | None = None
    carried: bool = False


@dataclass
class BallotBox:
    """Latest-wins vote store over a fixed eligible set."""

    eligible: tuple[str, ...]
    votes: dict[str, Vote] = field(default_factory=dict)

    def register(self, vote: Vote) -> None:
        assert vote.participant_id in self.eligible, vote.participant_id
        self.votes[vote.participant_id] = vote

    def carry_from(self, other: "BallotBox") -> None:
        for vote in other.votes.values():
            if vote.participant_id in self.eligible:
                self.register(replace(vote, carried=True))

    def all_voted(self) -> bool:
        return len(self.votes) == len(self.eligible)

    def voter_count(self) -> int:
        return len(self.votes)


class PhaseStatus(Enum):
    PENDING = "pending"
    OPEN = "open"
    RESOLVED = "resolved"
    INVALID = "invalid"
    SKIPPED = "skipped"


class CollabStatus(Enum):
    OPEN = "open"
    RESOLVED = "resolved"
    INVALID = "invalid"
    CANCELLED = "cancelled"

_TERMINAL = {CollabStatus.RESOLVED, CollabStatus.INVALID, CollabStatus.CANCELLED}


@dataclass
class PhaseState:
    policy_id: str
    status: PhaseStatus = PhaseStatus.PENDING
    ballot: BallotBox | None = None
    opened_at: int | None = None
    deadline_at: int | None = None  # None while pending, or no deadline at all
    resolved_at: int | None = None
    decision: object | None = None  # tally.Decision once resolved
    pre_results: tuple = ()  # tally.ConditionResult entries from opening time


@dataclass
class CollaborationState:
    collab_id: str
    scope_id: str
    policy_id: str
    opened_at: int
    phases: list[PhaseState]
    status: CollabStatus = CollabStatus.OPEN
    candidates: tuple[str, ...] | None = None
    closed_at: int | None = None
    pre_results: tuple = ()  # composed-level pre-check results from opening time

    @property
    def phase_index(self) -> int:
        """Number of phases that have left the OPEN/PENDING states."""
        return sum(
            1
            for ph in self.phases
            if ph.status in (PhaseStatus.RESOLVED, PhaseStatus.INVALID, PhaseStatus.SKIPPED)
        )

    @property
    def ballot(self) -> BallotBox | None:
        """Ballot of the first open phase (the only one for simple policies)."""
        for ph in self.phases:
            if ph.status is PhaseStatus.OPEN:
                return ph.ballot
        return None

    @property
    def deadline_at(self) -> int | None:
        """Deadline of the first open phase."""
        for ph in self.phases:
            if ph.status is PhaseStatus.OPEN:
                return ph.deadline_at
        return None

    @property
    def is_terminal(self) -> bool:
        return self.status in _TERMINAL

    def open_phases(self) -> list[PhaseState]:
        return [ph for ph in self.phases if ph.status is PhaseStatus.OPEN]
