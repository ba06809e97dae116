"""Shared glue for tests: ballot construction and tiny model factories."""
from __future__ import annotations

from fractions import Fraction

from govlang.engine import BallotBox, Vote
from govlang.model import (
    DecisionType,
    GovernanceModel,
    MajorityRule,
    Participant,
    Policy,
    Role,
    ScopeKind,
    ScopeNode,
    derive_top_level,
)

VoteTriple = tuple[str, object, Fraction]


def make_ballot(
    votes: list[VoteTriple], eligible: tuple[str, ...] | None = None
) -> BallotBox:
    if eligible is None:
        seen: list[str] = []
        for pid, _value, _weight in votes:
            if pid not in seen:
                seen.append(pid)
        eligible = tuple(seen)
    ballot = BallotBox(eligible=eligible)
    for ts, (pid, value, weight) in enumerate(votes):
        ballot.register(
            Vote(participant_id=pid, value=value, ts=ts, effective_weight=Fraction(weight))
        )
    return ballot


def simple_majority_model(
    participants: dict[str, Fraction],
    ratio: Fraction = Fraction(1, 2),
    decision_type: DecisionType = DecisionType.BOOLEAN,
) -> GovernanceModel:
    """One project/one task model with a single majority policy over a role."""
    scopes = {
        "proj": ScopeNode(id="proj", kind=ScopeKind.PROJECT, children=("act",)),
        "act": ScopeNode(id="act", kind=ScopeKind.ACTIVITY, children=("task",)),
        "task": ScopeNode(id="task", kind=ScopeKind.TASK),
    }
    registry = {
        pid: Participant(id=pid, vote_value=Fraction(weight), roles=("member",))
        for pid, weight in participants.items()
    }
    policies = {
        "pol": Policy(
            id="pol",
            scope="task",
            decision_type=decision_type,
            participant_list=("member",),
            rule=MajorityRule(ratio=ratio),
        )
    }
    return GovernanceModel(
        scopes=scopes,
        roots=("proj",),
        roles={"member": Role(id="member")},
        participants=registry,
        policies=policies,
        top_level_policies=derive_top_level(policies),
    )
