"""Deterministic decision engine: a pure fold over an ordered event stream.

Lifecycle per collaboration: an ``open`` event binds the scope's applicable
policy, computes the eligible voters and the deadline, and runs pre-checks;
``vote`` events land in the ballots of every open phase that accepts the
voter; ``tick`` events resolve phases whose deadline has passed, anchored at
the deadline itself so outcomes never depend on how often ticks arrive.

A phase also resolves early once every eligible participant has voted (the
outcome can no longer change, since only new voters could alter it); until
then voters may replace their own vote, latest wins.  Failed pre- or
post-conditions invalidate the collaboration and override the tally.

Malformed or unacceptable events are reported as diagnostics and skipped;
the engine never raises on event data.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from ..diagnostics import Diagnostic, error, warning
from ..model import (
    ComposedRule,
    DecisionType,
    GovernanceModel,
    ParticipantKind,
    Placement,
    Policy,
    UnknownScopeError,
    applicable_policy,
    expand_participants,
)
from .events import (
    CollaborationCancelled,
    CollaborationOpened,
    Event,
    Tick,
    VoteCast,
    read_event_log,
)
from .report import (
    ActionKind,
    ActionRecord,
    DecisionReport,
    PhaseReport,
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
    Decision,
    Outcome,
    check_conditions,
    combine_phase_outcomes,
    deadline_result,
    short_circuit,
    tally_policy,
)


@dataclass
class RunResult:
    store: dict[str, CollaborationState]
    reports: list[DecisionReport]
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)


class DecisionEngine:
    """Holds the collaboration store for one run over one immutable model.

    Multiple engines may share a model concurrently; a single engine is
    strictly single-threaded and consumes events in timestamp order.
    """

    def __init__(self, model: GovernanceModel) -> None:
        self.model = model
        self.store: dict[str, CollaborationState] = {}
        self.reports: list[DecisionReport] = []
        self._clock: int | None = None

    # -- event entry points --------------------------------------------------

    def process(self, event: Event) -> list[Diagnostic]:
        if self._clock is not None and event.ts < self._clock:
            return [
                error(
                    "engine.time-regression",
                    f"event at t={event.ts} precedes the already-processed t={self._clock}; "
                    "event skipped",
                )
            ]
        self._clock = event.ts
        if isinstance(event, CollaborationOpened):
            return self.open_collaboration(event)
        if isinstance(event, VoteCast):
            return self.register_vote(event)
        if isinstance(event, Tick):
            return self.advance_time(event)
        return self.cancel_collaboration(event)

    def open_collaboration(self, event: CollaborationOpened) -> list[Diagnostic]:
        if event.collab_id in self.store:
            return [
                error(
                    "engine.duplicate-collab",
                    f"open at t={event.ts}: collaboration {event.collab_id!r} already exists",
                    subject=event.collab_id,
                )
            ]
        try:
            policy = applicable_policy(self.model, event.scope_id)
        except UnknownScopeError:
            return [
                error(
                    "engine.unknown-scope",
                    f"open at t={event.ts}: unknown scope {event.scope_id!r}",
                    subject=event.scope_id,
                )
            ]
        if policy is None:
            return [
                error(
                    "engine.no-policy",
                    f"open at t={event.ts}: no applicable policy for scope "
                    f"{event.scope_id!r}; collaboration rejected",
                    subject=event.scope_id,
                )
            ]
        diags: list[Diagnostic] = []
        candidates = event.candidates
        if policy.decision_type is DecisionType.CANDIDATE:
            if candidates is None:
                return [
                    error(
                        "engine.missing-candidates",
                        f"open at t={event.ts}: policy {policy.id!r} decides between "
                        "candidates but the event names none",
                        subject=event.collab_id,
                    )
                ]
        elif candidates is not None:
            diags.append(
                warning(
                    "engine.candidates-ignored",
                    f"open at t={event.ts}: {policy.id!r} is a boolean decision; "
                    "candidate list ignored",
                    subject=event.collab_id,
                )
            )
            candidates = None

        rule = policy.rule
        phase_policies = rule.phases if isinstance(rule, ComposedRule) else (policy.id,)
        state = CollaborationState(
            collab_id=event.collab_id,
            scope_id=event.scope_id,
            policy_id=policy.id,
            opened_at=event.ts,
            phases=[PhaseState(policy_id=pid) for pid in phase_policies],
            candidates=candidates,
        )
        self.store[event.collab_id] = state

        if isinstance(rule, ComposedRule):
            eligible_union: set[str] = set()
            for pid in rule.phases:
                eligible_union.update(p.id for p in self._phase_eligible(state, pid))
            state.pre_results = tuple(
                check_conditions(
                    policy, Placement.PRE, eligible_count=len(eligible_union), ballot=None
                )
            )
            if any(not r.passed for r in state.pre_results):
                self._invalidate(state, event.ts, "precondition failed")
                return diags
            if rule.execution.value == "parallel":
                for idx in range(len(state.phases)):
                    if state.status is not CollabStatus.OPEN:
                        break
                    self._open_phase(state, idx, event.ts)
            else:
                self._open_phase(state, 0, event.ts)
        else:
            self._open_phase(state, 0, event.ts)
        return diags

    def register_vote(self, event: VoteCast) -> list[Diagnostic]:
        def reject(code: str, why: str) -> list[Diagnostic]:
            return [
                error(
                    code,
                    f"vote by {event.participant_id!r} at t={event.ts} on "
                    f"{event.collab_id!r}: {why}",
                    subject=event.participant_id,
                )
            ]

        state = self.store.get(event.collab_id)
        if state is None:
            return reject("engine.unknown-collab", "no such collaboration")
        if state.status is not CollabStatus.OPEN:
            return reject("engine.not-open", f"collaboration is {state.status.value}")
        participant = self.model.participants.get(event.participant_id)
        if participant is None:
            return reject("engine.unknown-participant", "participant is not in the model")

        main = self.model.policies[state.policy_id]
        if main.decision_type is DecisionType.BOOLEAN:
            if not isinstance(event.value, bool):
                return reject("engine.vote-type", "boolean decision needs a true/false vote")
        else:
            if isinstance(event.value, bool):
                return reject("engine.vote-type", "candidate decision needs a candidate id")
            if state.candidates is None or event.value not in state.candidates:
                return reject("engine.unknown-candidate", f"unknown candidate {event.value!r}")

        composed_excluded = set(main.exclusions()) if isinstance(main.rule, ComposedRule) else set()
        reasons: list[tuple[str, str]] = []
        touched: list[int] = []
        for idx, phase in enumerate(state.phases):
            if phase.status is not PhaseStatus.OPEN:
                continue
            phase_policy = self.model.policies[phase.policy_id]
            if (
                event.participant_id in composed_excluded
                or event.participant_id in phase_policy.exclusions()
            ):
                reasons.append(("engine.excluded", "participant excluded"))
                continue
            if event.participant_id not in phase.ballot.eligible:
                reasons.append(("engine.not-eligible", "participant not eligible"))
                continue
            if phase.deadline_at is not None and event.ts > phase.deadline_at:
                reasons.append(("engine.late-vote", "vote after the deadline"))
                continue
            if (
                phase_policy.min_confidence is not None
                and participant.kind is ParticipantKind.AGENT
            ):
                confidence = (
                    participant.agent_attrs.confidence if participant.agent_attrs else None
                )
                if confidence is None or confidence < phase_policy.min_confidence:
                    reasons.append(("engine.low-confidence", "confidence below threshold"))
                    continue
            phase.ballot.register(
                Vote(
                    participant_id=event.participant_id,
                    value=event.value,
                    ts=event.ts,
                    effective_weight=participant.vote_value,
                    rationale=event.rationale,
                )
            )
            touched.append(idx)
        if not touched:
            code, why = reasons[0] if reasons else ("engine.not-open", "no phase is open")
            return reject(code, why)
        for idx in touched:
            if state.status is not CollabStatus.OPEN:
                break
            self._maybe_early_resolve(state, idx, event.ts)
        return []

    def advance_time(self, event: Tick) -> list[Diagnostic]:
        for state in list(self.store.values()):
            while state.status is CollabStatus.OPEN:
                due = [
                    (phase.deadline_at, idx)
                    for idx, phase in enumerate(state.phases)
                    if phase.status is PhaseStatus.OPEN
                    and phase.deadline_at is not None
                    and phase.deadline_at <= event.ts
                ]
                if not due:
                    break
                due.sort()
                deadline, idx = due[0]
                # Anchor at the deadline itself: outcomes must not depend on
                # when the tick happened to arrive.
                self._resolve_phase(state, idx, deadline)
        return []

    def cancel_collaboration(self, event: CollaborationCancelled) -> list[Diagnostic]:
        state = self.store.get(event.collab_id)
        if state is None:
            return [
                error(
                    "engine.unknown-collab",
                    f"cancel at t={event.ts}: no such collaboration {event.collab_id!r}",
                    subject=event.collab_id,
                )
            ]
        if state.status is not CollabStatus.OPEN:
            return [
                error(
                    "engine.not-open",
                    f"cancel at t={event.ts}: collaboration {event.collab_id!r} is "
                    f"{state.status.value}",
                    subject=event.collab_id,
                )
            ]
        state.status = CollabStatus.CANCELLED
        state.closed_at = event.ts
        self._skip_pending(state)
        self._emit_report(state, final=None, actions=())
        return []

    # -- internals -------------------------------------------------------------

    def _phase_eligible(self, state: CollaborationState, policy_id: str):
        policy = self.model.policies[policy_id]
        eligible = expand_participants(policy, self.model)
        main = self.model.policies[state.policy_id]
        if isinstance(main.rule, ComposedRule):
            barred = set(main.exclusions())
            eligible = tuple(p for p in eligible if p.id not in barred)
        return eligible

    def _open_phase(self, state: CollaborationState, idx: int, at_ts: int) -> None:
        phase = state.phases[idx]
        policy = self.model.policies[phase.policy_id]
        main = self.model.policies[state.policy_id]
        eligible = self._phase_eligible(state, phase.policy_id)
        phase.opened_at = at_ts
        deadline = policy.deadline()
        phase.deadline_at = at_ts + deadline.minutes if deadline is not None else None
        phase.ballot = BallotBox(eligible=tuple(p.id for p in eligible))
        if (
            isinstance(main.rule, ComposedRule)
            and main.rule.carry_votes
            and idx > 0
            and state.phases[idx - 1].ballot is not None
        ):
            phase.ballot.carry_from(state.phases[idx - 1].ballot)
        phase.status = PhaseStatus.OPEN
        phase.pre_results = tuple(
            check_conditions(policy, Placement.PRE, eligible_count=len(eligible), ballot=None)
        )
        if any(not r.passed for r in phase.pre_results):
            self._invalidate(state, at_ts, "precondition failed")
            return
        self._maybe_early_resolve(state, idx, at_ts)

    def _maybe_early_resolve(self, state: CollaborationState, idx: int, at_ts: int) -> None:
        phase = state.phases[idx]
        if (
            phase.status is PhaseStatus.OPEN
            and phase.ballot.eligible
            and phase.ballot.all_voted()
        ):
            self._resolve_phase(state, idx, at_ts)

    def _resolve_phase(self, state: CollaborationState, idx: int, at_ts: int) -> None:
        phase = state.phases[idx]
        policy = self.model.policies[phase.policy_id]
        decision = tally_policy(policy, phase.ballot, self.model, state.candidates)
        post = check_conditions(
            policy,
            Placement.POST,
            eligible_count=len(phase.ballot.eligible),
            ballot=phase.ballot,
        )
        during = deadline_result(policy)
        conditions = tuple(phase.pre_results) + ((during,) if during else ()) + tuple(post)
        decision = dataclasses.replace(decision, condition_results=conditions)
        phase.decision = decision
        phase.resolved_at = at_ts
        if any(not r.passed for r in post):
            phase.status = PhaseStatus.INVALID
            self._invalidate(state, at_ts, "postcondition failed")
            return
        phase.status = PhaseStatus.RESOLVED
        self._advance_composition(state, at_ts)

    def _advance_composition(self, state: CollaborationState, at_ts: int) -> None:
        main = self.model.policies[state.policy_id]
        rule = main.rule
        if not isinstance(rule, ComposedRule):
            self._finalize(state, at_ts, state.phases[0].decision)
            return
        resolved = [
            ph.decision for ph in state.phases if ph.status is PhaseStatus.RESOLVED
        ]
        if rule.execution.value == "sequential":
            forced = short_circuit(rule, resolved, main.decision_type)
            if forced is not None:
                self._skip_pending(state)
                self._finalize(state, at_ts, forced)
                return
            next_idx = next(
                (i for i, ph in enumerate(state.phases) if ph.status is PhaseStatus.PENDING),
                None,
            )
            if next_idx is None:
                self._finalize(
                    state, at_ts, combine_phase_outcomes(rule, resolved, main.decision_type)
                )
            else:
                self._open_phase(state, next_idx, at_ts)
        else:
            if all(ph.status is PhaseStatus.RESOLVED for ph in state.phases):
                self._finalize(
                    state, at_ts, combine_phase_outcomes(rule, resolved, main.decision_type)
                )

    def _finalize(self, state: CollaborationState, at_ts: int, final: Decision) -> None:
        main = self.model.policies[state.policy_id]
        if isinstance(main.rule, ComposedRule):
            voters = {
                pid
                for ph in state.phases
                if ph.ballot is not None
                for pid in ph.ballot.votes
            }
            post = check_conditions(
                main,
                Placement.POST,
                eligible_count=len(voters),
                ballot=_CountingBallot(voters),
            )
            final = dataclasses.replace(
                final, condition_results=tuple(state.pre_results) + tuple(post)
            )
            if any(not r.passed for r in post):
                self._invalidate(state, at_ts, "postcondition failed", final=None)
                return
        state.status = CollabStatus.RESOLVED
        state.closed_at = at_ts
        actions = self._escalations(state) + (self._terminal_action(state, final),)
        self._emit_report(state, final=final, actions=actions)

    def _escalations(self, state: CollaborationState) -> tuple[ActionRecord, ...]:
        return tuple(
            ActionRecord(
                kind=ActionKind.ESCALATE_TO_FALLBACK,
                collab_id=state.collab_id,
                details=(("policy", ph.policy_id),),
            )
            for ph in state.phases
            if ph.decision is not None and ph.decision.fallback_used
        )

    def _terminal_action(self, state: CollaborationState, final: Decision) -> ActionRecord:
        if final.outcome is Outcome.ACCEPT:
            return ActionRecord(ActionKind.MERGE_PROPOSAL, state.collab_id)
        if final.outcome is Outcome.WINNER:
            return ActionRecord(
                ActionKind.ANNOUNCE_WINNER,
                state.collab_id,
                details=(("winner", final.winner),),
            )
        if final.outcome is Outcome.NO_WINNER:
            return ActionRecord(
                ActionKind.CLOSE_PROPOSAL,
                state.collab_id,
                details=(("reason", "no-winner"), ("tie", final.tie_flag)),
            )
        return ActionRecord(
            ActionKind.CLOSE_PROPOSAL, state.collab_id, details=(("reason", "rejected"),)
        )

    def _invalidate(
        self,
        state: CollaborationState,
        at_ts: int,
        reason: str,
        final: Decision | None = None,
    ) -> None:
        state.status = CollabStatus.INVALID
        state.closed_at = at_ts
        self._skip_pending(state)
        actions = self._escalations(state) + (
            ActionRecord(
                ActionKind.INVALIDATE_PROCESS,
                state.collab_id,
                details=(("reason", reason),),
            ),
        )
        self._emit_report(state, final=final, actions=actions)

    def _skip_pending(self, state: CollaborationState) -> None:
        for phase in state.phases:
            if phase.status is PhaseStatus.PENDING:
                phase.status = PhaseStatus.SKIPPED

    def _emit_report(
        self,
        state: CollaborationState,
        final: Decision | None,
        actions: tuple[ActionRecord, ...],
    ) -> None:
        main = self.model.policies[state.policy_id]
        phases = tuple(
            PhaseReport(
                policy_id=ph.policy_id,
                status=ph.status.value,
                opened_at=ph.opened_at,
                deadline_at=ph.deadline_at,
                resolved_at=ph.resolved_at,
                votes=tuple(ph.ballot.votes.values()) if ph.ballot is not None else (),
                pre_conditions=tuple(ph.pre_results),
                decision=ph.decision,
            )
            for ph in state.phases
        )
        self.reports.append(
            DecisionReport(
                collab_id=state.collab_id,
                scope_id=state.scope_id,
                policy_id=state.policy_id,
                decision_type=main.decision_type,
                candidates=state.candidates,
                status=state.status.value,
                opened_at=state.opened_at,
                closed_at=state.closed_at if state.closed_at is not None else state.opened_at,
                pre_conditions=tuple(state.pre_results),
                phases=phases,
                final=final,
                actions=actions,
            )
        )


class _CountingBallot:
    """Just enough ballot surface for post-condition voter counting."""

    def __init__(self, voters: set[str]) -> None:
        self._voters = voters

    def voter_count(self) -> int:
        return len(self._voters)


def run(model: GovernanceModel, events: list[Event]) -> RunResult:
    """Fold an event stream into reports; diagnostics never abort the run."""
    engine = DecisionEngine(model)
    diagnostics: list[Diagnostic] = []
    for event in events:
        diagnostics.extend(engine.process(event))
    return RunResult(store=engine.store, reports=engine.reports, diagnostics=diagnostics)


def run_log(model: GovernanceModel, text: str, source: str | None = None) -> RunResult:
    """Decode a JSON Lines event log and run it."""
    events, diagnostics = read_event_log(text, source)
    result = run(model, events)
    result.diagnostics = diagnostics + result.diagnostics
    return result
