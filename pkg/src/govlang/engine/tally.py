"""Pure decision logic: weighted tallies, consensus, leaders, composition.

All arithmetic is exact (:class:`fractions.Fraction`), so thresholds like
"40% positive votes" compare without rounding error.  Ballots are taken as
given; eligibility, deadlines, and vote-type checks happen upstream in the
engine, and the functions here only assert those contracts.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from ..model import (
    CombinationMode,
    ComposedRule,
    DecisionType,
    GovernanceModel,
    LazyConsensusRule,
    LeaderDrivenRule,
    MajorityRule,
    MinParticipantsCondition,
    Placement,
    Policy,
)
from .state import BallotBox

NOTE_NO_VOTES = "no votes"
NOTE_LEADER_ABSENT = "leader absent"
NOTE_FALLBACK = "fallback applied"


class Outcome(Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    WINNER = "winner"
    NO_WINNER = "no-winner"


@dataclass(frozen=True)
class ConditionResult:
    kind: str  # "deadline" | "min-participants"
    placement: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class Decision:
    """Outcome of one tally, with the evidence that produced it."""

    outcome: Outcome
    tallies: dict[str, Fraction]
    tie_flag: bool = False
    winner: str | None = None
    condition_results: tuple[ConditionResult, ...] = ()
    notes: tuple[str, ...] = ()
    fallback_used: bool = False

    @property
    def passed(self) -> bool:
        return self.outcome in (Outcome.ACCEPT, Outcome.WINNER)


def boolean_tallies(ballot: BallotBox) -> dict[str, Fraction]:
    accept = Fraction(0)
    reject = Fraction(0)
    for vote in ballot.votes.values():
        assert isinstance(vote.value, bool), "boolean ballot holds a non-boolean vote"
        if vote.value:
            accept += vote.effective_weight
        else:
            reject += vote.effective_weight
    return {"accept": accept, "reject": reject}


def candidate_tallies(ballot: BallotBox, candidates: tuple[str, ...]) -> dict[str, Fraction]:
    tallies = {c: Fraction(0) for c in candidates}
    for vote in ballot.votes.values():
        assert isinstance(vote.value, str), "candidate ballot holds a non-candidate vote"
        assert vote.value in tallies, f"vote names unknown candidate {vote.value!r}"
        tallies[vote.value] += vote.effective_weight
    return tallies


def tally_majority(
    ballot: BallotBox,
    ratio: Fraction,
    decision_type: DecisionType,
    candidates: tuple[str, ...] | None = None,
) -> Decision:
    """Weighted (qualified) majority.

    Boolean: accept when the accept share of all cast weight is at least
    ``ratio``; an empty ballot rejects.  Candidate choice: the unique
    heaviest candidate wins when its share reaches ``ratio``; a tied
    maximum yields no winner with the tie flag set.
    """
    assert 0 < ratio <= 1, ratio
    if decision_type is DecisionType.BOOLEAN:
        tallies = boolean_tallies(ballot)
        total = tallies["accept"] + tallies["reject"]
        if total == 0:
            return Decision(Outcome.REJECT, tallies, notes=(NOTE_NO_VOTES,))
        accepted = tallies["accept"] >= ratio * total
        return Decision(Outcome.ACCEPT if accepted else Outcome.REJECT, tallies)
    assert candidates is not None, "candidate tally needs the candidate list"
    tallies = candidate_tallies(ballot, candidates)
    total = sum(tallies.values(), Fraction(0))
    if total == 0:
        return Decision(Outcome.NO_WINNER, tallies, notes=(NOTE_NO_VOTES,))
    top = max(tallies.values())
    leaders = [c for c in candidates if tallies[c] == top]
    if len(leaders) > 1:
        return Decision(Outcome.NO_WINNER, tallies, tie_flag=True)
    if top >= ratio * total:
        return Decision(Outcome.WINNER, tallies, winner=leaders[0])
    return Decision(Outcome.NO_WINNER, tallies)


def tally_lazy_consensus(ballot: BallotBox) -> Decision:
    """Accept unless an objection was cast; weights never matter here."""
    tallies = boolean_tallies(ballot)
    objected = any(vote.value is False for vote in ballot.votes.values())
    return Decision(Outcome.REJECT if objected else Outcome.ACCEPT, tallies)


def tally_leader_driven(
    ballot: BallotBox,
    leader: str,
    fallback: Policy | None,
    model: GovernanceModel,
    decision_type: DecisionType,
    candidates: tuple[str, ...] | None = None,
) -> Decision:
    """The leader's vote decides; otherwise the fallback policy resolves the
    same ballot, and with no fallback a silent leader means rejection."""
    assert leader in ballot.eligible, f"leader {leader!r} missing from eligible set"
    leader_vote = ballot.votes.get(leader)
    if leader_vote is not None:
        if decision_type is DecisionType.BOOLEAN:
            tallies = boolean_tallies(ballot)
            outcome = Outcome.ACCEPT if leader_vote.value else Outcome.REJECT
            return Decision(outcome, tallies)
        tallies = candidate_tallies(ballot, candidates or ())
        return Decision(Outcome.WINNER, tallies, winner=str(leader_vote.value))
    if fallback is not None:
        decision = tally_policy(fallback, ballot, model, candidates)
        return Decision(
            outcome=decision.outcome,
            tallies=decision.tallies,
            tie_flag=decision.tie_flag,
            winner=decision.winner,
            notes=(NOTE_LEADER_ABSENT, NOTE_FALLBACK) + decision.notes,
            fallback_used=True,
        )
    if decision_type is DecisionType.BOOLEAN:
        return Decision(Outcome.REJECT, boolean_tallies(ballot), notes=(NOTE_LEADER_ABSENT,))
    return Decision(
        Outcome.NO_WINNER, candidate_tallies(ballot, candidates or ()), notes=(NOTE_LEADER_ABSENT,)
    )


def tally_policy(
    policy: Policy,
    ballot: BallotBox,
    model: GovernanceModel,
    candidates: tuple[str, ...] | None = None,
) -> Decision:
    """Dispatch to the tally for a simple (non-composed) policy."""
    rule = policy.rule
    if isinstance(rule, MajorityRule):
        return tally_majority(ballot, rule.ratio, policy.decision_type, candidates)
    if isinstance(rule, LazyConsensusRule):
        return tally_lazy_consensus(ballot)
    if isinstance(rule, LeaderDrivenRule):
        fallback = model.policies[rule.fallback] if rule.fallback else None
        return tally_leader_driven(
            ballot, rule.leader, fallback, model, policy.decision_type, candidates
        )
    raise ValueError(f"policy {policy.id!r} is composed; resolve its phases instead")


# ---------------------------------------------------------------------------
# Composition


def _combined_pass(decision_type: DecisionType, winner: str | None = None) -> Decision:
    if decision_type is DecisionType.BOOLEAN:
        return Decision(Outcome.ACCEPT, {})
    return Decision(Outcome.WINNER, {}, winner=winner)


def _combined_fail(decision_type: DecisionType, note: str | None = None) -> Decision:
    notes = (note,) if note else ()
    if decision_type is DecisionType.BOOLEAN:
        return Decision(Outcome.REJECT, {}, notes=notes)
    return Decision(Outcome.NO_WINNER, {}, notes=notes)


def combine_phase_outcomes(
    rule: ComposedRule, decisions: list[Decision], decision_type: DecisionType
) -> Decision:
    """Conjunction/disjunction over completed phase decisions.

    Candidate-choice conjunction additionally requires every phase to agree
    on the same winner; disjunction takes the first phase that produced one.
    """
    if rule.combination is CombinationMode.CONJUNCTION:
        if not all(d.passed for d in decisions):
            return _combined_fail(decision_type)
        if decision_type is DecisionType.CANDIDATE:
            winners = {d.winner for d in decisions}
            if len(winners) != 1:
                return _combined_fail(decision_type, "phase winners disagree")
            return _combined_pass(decision_type, winners.pop())
        return _combined_pass(decision_type)
    for d in decisions:
        if d.passed:
            return _combined_pass(decision_type, d.winner)
    return _combined_fail(decision_type)


def short_circuit(
    rule: ComposedRule, decisions: list[Decision], decision_type: DecisionType
) -> Decision | None:
    """Final decision already forced by the phases resolved so far, if any."""
    if rule.combination is CombinationMode.CONJUNCTION:
        if any(not d.passed for d in decisions):
            return _combined_fail(decision_type)
        if decision_type is DecisionType.CANDIDATE:
            winners = {d.winner for d in decisions if d.outcome is Outcome.WINNER}
            if len(winners) > 1:
                return _combined_fail(decision_type, "phase winners disagree")
    else:
        for d in decisions:
            if d.passed:
                return _combined_pass(decision_type, d.winner)
    return None


def resolve_composed(
    ballots: list[BallotBox],
    policy: Policy,
    model: GovernanceModel,
    candidates: tuple[str, ...] | None = None,
) -> Decision:
    """Resolve a composed policy over one ballot per phase.

    This is the order-free view used for parallel execution without vote
    carry-over; the engine handles sequencing, carry-over, and deadlines.
    """
    rule = policy.rule
    assert isinstance(rule, ComposedRule)
    assert len(ballots) == len(rule.phases), "one ballot per phase required"
    decisions = [
        tally_policy(model.policies[phase_id], ballot, model, candidates)
        for phase_id, ballot in zip(rule.phases, ballots)
    ]
    return combine_phase_outcomes(rule, decisions, policy.decision_type)


# ---------------------------------------------------------------------------
# Conditions


def check_conditions(
    policy: Policy,
    placement: Placement,
    *,
    eligible_count: int,
    ballot: BallotBox | None,
) -> list[ConditionResult]:
    """Evaluate a policy's checkable conditions for one placement.

    Minimum-participant conditions count eligible participants as a
    pre-check and distinct voters as a post-check.  Exclusions are enforced
    structurally when the eligible set is built and deadlines bound the
    voting window, so neither shows up here.
    """
    results: list[ConditionResult] = []
    for cond in policy.conditions:
        if isinstance(cond, MinParticipantsCondition) and cond.placement is placement:
            if placement is Placement.PRE:
                found = eligible_count
            else:
                found = ballot.voter_count() if ballot is not None else 0
            results.append(
                ConditionResult(
                    kind="min-participants",
                    placement=placement.value,
                    passed=found >= cond.minimum,
                    detail=f"requires {cond.minimum}, found {found}",
                )
            )
    return results


def deadline_result(policy: Policy) -> ConditionResult | None:
    cond = policy.deadline()
    if cond is None:
        return None
    return ConditionResult(
        kind="deadline",
        placement=Placement.DURING.value,
        passed=True,
        detail=f"{cond.count} {cond.unit.value}",
    )
