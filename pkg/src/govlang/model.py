"""Typed governance models: scopes, participants, policies, and validation.

A :class:`GovernanceModel` is the in-memory form of a policy file.  It holds
a forest of project/activity/task scopes, registries of profiles, roles and
participants, and a registry of policies.  Models are treated as immutable
once validated and can be shared freely between engine instances.

Numeric attributes (vote weights, ratios, agent attributes) are stored as
:class:`fractions.Fraction` so threshold comparisons are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterator, Union

from .diagnostics import Diagnostic, error, warning


class GovernanceError(Exception):
    """Base class for model-level lookup failures."""


class UnknownReferenceError(GovernanceError):
    def __init__(self, ref: str) -> None:
        super().__init__(f"unresolved reference: {ref!r}")
        self.ref = ref


class UnknownScopeError(GovernanceError):
    def __init__(self, scope_id: str) -> None:
        super().__init__(f"unknown scope: {scope_id!r}")
        self.scope_id = scope_id


# ---------------------------------------------------------------------------
# Scopes


class ScopeKind(Enum):
    PROJECT = "Project"
    ACTIVITY = "Activity"
    TASK = "Task"


_CHILD_KIND = {
    ScopeKind.PROJECT: ScopeKind.ACTIVITY,
    ScopeKind.ACTIVITY: ScopeKind.TASK,
    ScopeKind.TASK: None,
}


@dataclass(frozen=True)
class ScopeNode:
    id: str
    kind: ScopeKind
    children: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Participants


@dataclass(frozen=True)
class Profile:
    """Named bundle of descriptive attributes (ordered name/value pairs)."""

    id: str
    attributes: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Role:
    id: str


class ParticipantKind(Enum):
    HUMAN = "Human"
    AGENT = "Agent"


@dataclass(frozen=True)
class AgentAttributes:
    """Trust attributes of an automated participant, each in [0, 1]."""

    autonomy_level: Fraction | None = None
    explainability: Fraction | None = None
    confidence: Fraction | None = None


@dataclass(frozen=True)
class Participant:
    id: str
    kind: ParticipantKind = ParticipantKind.HUMAN
    vote_value: Fraction = Fraction(1)
    profile: str | None = None
    roles: tuple[str, ...] = ()
    agent_attrs: AgentAttributes | None = None


# ---------------------------------------------------------------------------
# Conditions


class Placement(Enum):
    PRE = "pre"
    DURING = "during"
    POST = "post"


class TimeUnit(Enum):
    MINUTES = "minutes"
    HOURS = "hours"
    DAYS = "days"


_UNIT_MINUTES = {TimeUnit.MINUTES: 1, TimeUnit.HOURS: 60, TimeUnit.DAYS: 1440}


@dataclass(frozen=True)
class DeadlineCondition:
    """Voting window length.  Placement other than ``during`` is ignored by
    the engine (the deadline always bounds the voting window) and flagged
    by validation."""

    count: int
    unit: TimeUnit
    placement: Placement = Placement.DURING

    @property
    def minutes(self) -> int:
        return self.count * _UNIT_MINUTES[self.unit]


@dataclass(frozen=True)
class MinParticipantsCondition:
    """Turnout floor: as a pre-check it counts eligible participants, as a
    post-check it counts distinct voters."""

    minimum: int
    placement: Placement = Placement.POST


@dataclass(frozen=True)
class ParticipantExclusionCondition:
    """Participants barred from the expanded participant list."""

    participants: tuple[str, ...]
    placement: Placement = Placement.PRE


Condition = Union[DeadlineCondition, MinParticipantsCondition, ParticipantExclusionCondition]


# ---------------------------------------------------------------------------
# Policies


class DecisionType(Enum):
    BOOLEAN = "BooleanDecision"
    CANDIDATE = "CandidateChoice"


@dataclass(frozen=True)
class MajorityRule:
    """Accept when the accept share of cast weight reaches ``ratio``."""

    ratio: Fraction


@dataclass(frozen=True)
class LazyConsensusRule:
    """Accept unless somebody objects before the deadline."""


@dataclass(frozen=True)
class LeaderDrivenRule:
    """The leader's vote decides; an optional fallback policy resolves the
    same ballot when the leader stays silent."""

    leader: str
    fallback: str | None = None


class ExecutionMode(Enum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"


class CombinationMode(Enum):
    CONJUNCTION = "and"
    DISJUNCTION = "or"


@dataclass(frozen=True)
class ComposedRule:
    """Multi-phase policy; phases are ids of non-composed policies."""

    phases: tuple[str, ...]
    execution: ExecutionMode
    combination: CombinationMode
    carry_votes: bool = False


Rule = Union[MajorityRule, LazyConsensusRule, LeaderDrivenRule, ComposedRule]

_RULE_KEYWORD = {
    MajorityRule: "MajorityPolicy",
    LazyConsensusRule: "LazyConsensusPolicy",
    LeaderDrivenRule: "LeaderDrivenPolicy",
    ComposedRule: "ComposedPolicy",
}


@dataclass(frozen=True)
class Policy:
    id: str
    scope: str
    decision_type: DecisionType
    participant_list: tuple[str, ...]
    rule: Rule
    conditions: tuple[Condition, ...] = ()
    min_confidence: Fraction | None = None

    @property
    def kind_keyword(self) -> str:
        return _RULE_KEYWORD[type(self.rule)]

    def deadline(self) -> DeadlineCondition | None:
        for cond in self.conditions:
            if isinstance(cond, DeadlineCondition):
                return cond
        return None

    def exclusions(self) -> tuple[str, ...]:
        seen: list[str] = []
        for cond in self.conditions:
            if isinstance(cond, ParticipantExclusionCondition):
                for pid in cond.participants:
                    if pid not in seen:
                        seen.append(pid)
        return tuple(seen)

    def min_participants(self, placement: Placement) -> tuple[MinParticipantsCondition, ...]:
        return tuple(
            cond
            for cond in self.conditions
            if isinstance(cond, MinParticipantsCondition) and cond.placement is placement
        )


# ---------------------------------------------------------------------------
# Model


@dataclass
class GovernanceModel:
    """Root container.  Registry dicts preserve declaration order, which is
    the canonical ordering for participant expansion and pretty-printing."""

    scopes: dict[str, ScopeNode] = field(default_factory=dict)
    roots: tuple[str, ...] = ()
    profiles: dict[str, Profile] = field(default_factory=dict)
    roles: dict[str, Role] = field(default_factory=dict)
    participants: dict[str, Participant] = field(default_factory=dict)
    policies: dict[str, Policy] = field(default_factory=dict)
    top_level_policies: tuple[str, ...] = ()
    _parents: dict[str, str] | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def parent_of(self, scope_id: str) -> str | None:
        if self._parents is None:
            parents: dict[str, str] = {}
            for node in self.scopes.values():
                for child in node.children:
                    parents[child] = node.id
            self._parents = parents
        return self._parents.get(scope_id)

    def scope_chain(self, scope_id: str) -> Iterator[str]:
        """Yield ``scope_id``, then each enclosing ancestor up to the root."""
        cur: str | None = scope_id
        while cur is not None:
            yield cur
            cur = self.parent_of(cur)


def derive_top_level(policies: dict[str, Policy]) -> tuple[str, ...]:
    """Policies not referenced as a phase or fallback of another policy."""
    referenced: set[str] = set()
    for policy in policies.values():
        if isinstance(policy.rule, ComposedRule):
            referenced.update(policy.rule.phases)
        elif isinstance(policy.rule, LeaderDrivenRule) and policy.rule.fallback:
            referenced.add(policy.rule.fallback)
    return tuple(pid for pid in policies if pid not in referenced)


# ---------------------------------------------------------------------------
# Operations


def expand_participants(policy: Policy, model: GovernanceModel) -> tuple[Participant, ...]:
    """Resolve a policy's participant list to concrete participants.

    The result is the union of directly listed participants and all members
    of listed roles, minus every excluded participant, ordered by declaration
    order in the model and free of duplicates.  Raises
    :class:`UnknownReferenceError` for a reference that resolves to nothing.
    """
    listed_roles: set[str] = set()
    listed_participants: set[str] = set()
    for ref in policy.participant_list:
        if ref in model.roles:
            listed_roles.add(ref)
        elif ref in model.participants:
            listed_participants.add(ref)
        else:
            raise UnknownReferenceError(ref)
    excluded = set(policy.exclusions())
    result = []
    for participant in model.participants.values():
        if participant.id in excluded:
            continue
        if participant.id in listed_participants or listed_roles.intersection(participant.roles):
            result.append(participant)
    return tuple(result)


def applicable_policy(model: GovernanceModel, scope_id: str) -> Policy | None:
    """Find the policy governing a scope.

    Picks the top-level policy attached to the scope itself, else the one on
    the nearest enclosing ancestor; returns ``None`` when no scope on the
    chain has a policy.
    """
    if scope_id not in model.scopes:
        raise UnknownScopeError(scope_id)
    by_scope: dict[str, Policy] = {}
    for pid in model.top_level_policies:
        policy = model.policies.get(pid)
        if policy is not None:
            by_scope.setdefault(policy.scope, policy)
    for node_id in model.scope_chain(scope_id):
        if node_id in by_scope:
            return by_scope[node_id]
    return None


# ---------------------------------------------------------------------------
# Validation

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _expand_safe(
    policy: Policy, model: GovernanceModel
) -> tuple[tuple[Participant, ...], tuple[str, ...]]:
    """Like expand_participants but collects unresolved refs instead of raising."""
    missing = tuple(
        ref
        for ref in policy.participant_list
        if ref not in model.roles and ref not in model.participants
    )
    if missing:
        trimmed = Policy(
            id=policy.id,
            scope=policy.scope,
            decision_type=policy.decision_type,
            participant_list=tuple(r for r in policy.participant_list if r not in missing),
            rule=policy.rule,
            conditions=policy.conditions,
        )
        return expand_participants(trimmed, model), missing
    return expand_participants(policy, model), ()


def validate_model(model: GovernanceModel) -> list[Diagnostic]:
    """Check every model invariant and return the full list of findings.

    Validation never aborts mid-scan; an empty error list means the model is
    well-formed.  Codes are stable; permuting declaration order never changes
    the set of codes produced.
    """
    diags: list[Diagnostic] = []
    out = diags.append

    _validate_scopes(model, out)
    _validate_profiles(model, out)
    _validate_participants(model, out)
    _validate_policies(model, out)
    return diags


def _validate_scopes(model: GovernanceModel, out) -> None:
    appearances: dict[str, int] = {sid: 0 for sid in model.scopes}
    for root in model.roots:
        node = model.scopes.get(root)
        if node is None:
            out(error("model.unknown-ref", f"root scope {root!r} is not declared", subject=root))
            continue
        appearances[root] += 1
        if node.kind is not ScopeKind.PROJECT:
            out(
                error(
                    "model.scope-root-kind",
                    f"scope forest root {root!r} must be a Project, found {node.kind.value}",
                    subject=root,
                )
            )
    for node in model.scopes.values():
        expected = _CHILD_KIND[node.kind]
        for child_id in node.children:
            child = model.scopes.get(child_id)
            if child is None:
                out(
                    error(
                        "model.unknown-ref",
                        f"scope {node.id!r} references undeclared child {child_id!r}",
                        subject=child_id,
                    )
                )
                continue
            appearances[child_id] += 1
            if expected is None:
                out(
                    error(
                        "model.scope-nesting",
                        f"{node.kind.value} scope {node.id!r} cannot contain children",
                        subject=node.id,
                    )
                )
            elif child.kind is not expected:
                out(
                    error(
                        "model.scope-nesting",
                        f"scope {node.id!r} may only contain {expected.value} children, "
                        f"found {child.kind.value} {child_id!r}",
                        subject=child_id,
                    )
                )
    for sid, count in appearances.items():
        if count == 0:
            out(
                error(
                    "model.scope-not-forest",
                    f"scope {sid!r} is neither a root nor a child of any scope",
                    subject=sid,
                )
            )
        elif count > 1:
            out(
                error(
                    "model.scope-not-forest",
                    f"scope {sid!r} appears more than once in the forest",
                    subject=sid,
                )
            )


def _validate_profiles(model: GovernanceModel, out) -> None:
    for profile in model.profiles.values():
        seen: set[str] = set()
        for name, _value in profile.attributes:
            if not name:
                out(
                    error(
                        "model.profile-attr",
                        f"profile {profile.id!r} has an empty attribute name",
                        subject=profile.id,
                    )
                )
            elif name in seen:
                out(
                    error(
                        "model.profile-attr",
                        f"profile {profile.id!r} repeats attribute {name!r}",
                        subject=profile.id,
                    )
                )
            seen.add(name)


def _in_unit_interval(value: Fraction | None) -> bool:
    return value is None or _ZERO <= value <= _ONE


def _validate_participants(model: GovernanceModel, out) -> None:
    for pid in model.participants:
        if pid in model.roles:
            out(
                error(
                    "model.id-collision",
                    f"{pid!r} is declared both as a role and as a participant; "
                    "participant list references would be ambiguous",
                    subject=pid,
                )
            )
    for participant in model.participants.values():
        if participant.vote_value < 0:
            out(
                error(
                    "model.bad-weight",
                    f"participant {participant.id!r} has negative vote value "
                    f"{participant.vote_value}",
                    subject=participant.id,
                )
            )
        is_agent = participant.kind is ParticipantKind.AGENT
        if is_agent and participant.agent_attrs is None:
            out(
                error(
                    "model.agent-attrs",
                    f"agent {participant.id!r} is missing its agent attribute block",
                    subject=participant.id,
                )
            )
        if not is_agent and participant.agent_attrs is not None:
            out(
                error(
                    "model.agent-attrs",
                    f"participant {participant.id!r} carries agent attributes but is not an agent",
                    subject=participant.id,
                )
            )
        attrs = participant.agent_attrs
        if attrs is not None:
            for label, value in (
                ("autonomy level", attrs.autonomy_level),
                ("explainability", attrs.explainability),
                ("confidence", attrs.confidence),
            ):
                if not _in_unit_interval(value):
                    out(
                        error(
                            "model.attr-range",
                            f"{label} of {participant.id!r} must lie in [0, 1], got {value}",
                            subject=participant.id,
                        )
                    )
        if participant.profile is not None and participant.profile not in model.profiles:
            out(
                error(
                    "model.unknown-ref",
                    f"participant {participant.id!r} references undeclared profile "
                    f"{participant.profile!r}",
                    subject=participant.profile,
                )
            )
        for role in participant.roles:
            if role not in model.roles:
                out(
                    error(
                        "model.unknown-ref",
                        f"participant {participant.id!r} references undeclared role {role!r}",
                        subject=role,
                    )
                )


def _validate_conditions(policy: Policy, model: GovernanceModel, out) -> None:
    for cond in policy.conditions:
        if isinstance(cond, DeadlineCondition):
            if cond.count <= 0:
                out(
                    error(
                        "model.bad-deadline",
                        f"policy {policy.id!r} has non-positive deadline {cond.count}",
                        subject=policy.id,
                    )
                )
            if cond.placement is not Placement.DURING:
                out(
                    warning(
                        "model.deadline-placement",
                        f"policy {policy.id!r} marks its deadline as "
                        f"{cond.placement.value}; deadlines always bound the voting window",
                        subject=policy.id,
                    )
                )
        elif isinstance(cond, MinParticipantsCondition):
            if cond.minimum < 1:
                out(
                    error(
                        "model.bad-min-participants",
                        f"policy {policy.id!r} requires fewer than one participant",
                        subject=policy.id,
                    )
                )
        elif isinstance(cond, ParticipantExclusionCondition):
            if not cond.participants:
                out(
                    error(
                        "model.empty-exclusion",
                        f"policy {policy.id!r} has an empty participant exclusion",
                        subject=policy.id,
                    )
                )
            for pid in cond.participants:
                if pid not in model.participants:
                    out(
                        error(
                            "model.unknown-ref",
                            f"policy {policy.id!r} excludes undeclared participant {pid!r}",
                            subject=pid,
                        )
                    )


def _fallback_cycle(policy: Policy, model: GovernanceModel) -> bool:
    seen = {policy.id}
    cur = policy
    while isinstance(cur.rule, LeaderDrivenRule) and cur.rule.fallback:
        nxt = model.policies.get(cur.rule.fallback)
        if nxt is None:
            return False
        if nxt.id in seen:
            return True
        seen.add(nxt.id)
        cur = nxt
    return False


def _validate_policies(model: GovernanceModel, out) -> None:
    top_level = set(model.top_level_policies)
    for pid in model.top_level_policies:
        if pid not in model.policies:
            out(
                error(
                    "model.unknown-ref",
                    f"top-level policy {pid!r} is not declared",
                    subject=pid,
                )
            )

    phase_ids: set[str] = set()
    for policy in model.policies.values():
        if isinstance(policy.rule, ComposedRule):
            phase_ids.update(policy.rule.phases)

    scope_owner: dict[str, str] = {}
    for policy in model.policies.values():
        if policy.scope not in model.scopes:
            out(
                error(
                    "model.unknown-ref",
                    f"policy {policy.id!r} targets undeclared scope {policy.scope!r}",
                    subject=policy.scope,
                )
            )
        elif policy.id in top_level:
            other = scope_owner.get(policy.scope)
            if other is not None:
                out(
                    error(
                        "model.ambiguous-scope",
                        f"policies {other!r} and {policy.id!r} both target scope "
                        f"{policy.scope!r}; applicability would be ambiguous",
                        subject=policy.id,
                    )
                )
            else:
                scope_owner[policy.scope] = policy.id

        if not policy.participant_list:
            out(
                error(
                    "model.empty-participants",
                    f"policy {policy.id!r} has an empty participant list",
                    subject=policy.id,
                )
            )
            continue

        expanded, missing = _expand_safe(policy, model)
        for ref in missing:
            out(
                error(
                    "model.unknown-ref",
                    f"policy {policy.id!r} lists {ref!r}, which is neither a role "
                    "nor a participant",
                    subject=ref,
                )
            )
        if not missing:
            before_exclusion = any(
                p.id in set(policy.participant_list)
                or set(p.roles) & set(policy.participant_list)
                for p in model.participants.values()
            )
            if not before_exclusion:
                out(
                    error(
                        "model.empty-participants",
                        f"policy {policy.id!r} has an empty participant list "
                        "(no listed role has members)",
                        subject=policy.id,
                    )
                )
            elif not expanded:
                out(
                    error(
                        "model.excluded-all",
                        f"participant list of policy {policy.id!r} is empty after exclusion",
                        subject=policy.id,
                    )
                )

        _validate_conditions(policy, model, out)
        _validate_rule(policy, expanded, model, top_level, phase_ids, out)


def _validate_rule(
    policy: Policy,
    expanded: tuple[Participant, ...],
    model: GovernanceModel,
    top_level: set[str],
    phase_ids: set[str],
    out,
) -> None:
    rule = policy.rule
    expanded_ids = {p.id for p in expanded}

    if policy.min_confidence is not None:
        if isinstance(rule, ComposedRule):
            out(
                error(
                    "model.composed-min-confidence",
                    f"composed policy {policy.id!r} cannot set minConfidence; "
                    "set it on the phase policies instead",
                    subject=policy.id,
                )
            )
        elif not _in_unit_interval(policy.min_confidence):
            out(
                error(
                    "model.attr-range",
                    f"minConfidence of {policy.id!r} must lie in [0, 1], "
                    f"got {policy.min_confidence}",
                    subject=policy.id,
                )
            )

    if isinstance(rule, LazyConsensusRule) and policy.decision_type is DecisionType.CANDIDATE:
        out(
            error(
                "model.lazy-candidate",
                f"policy {policy.id!r} combines lazy consensus with candidate choice, "
                "which has no objection semantics",
                subject=policy.id,
            )
        )

    if isinstance(rule, MajorityRule):
        if not (0 < rule.ratio <= 1):
            out(
                error(
                    "model.bad-ratio",
                    f"ratio of policy {policy.id!r} must lie in (0, 1], got {rule.ratio}",
                    subject=policy.id,
                )
            )

    if isinstance(rule, LeaderDrivenRule):
        if rule.leader not in model.participants:
            out(
                error(
                    "model.unknown-ref",
                    f"leader {rule.leader!r} of policy {policy.id!r} is not declared",
                    subject=rule.leader,
                )
            )
        elif rule.leader not in expanded_ids:
            out(
                error(
                    "model.leader-not-member",
                    f"leader {rule.leader!r} is not in the expanded participant list "
                    f"of policy {policy.id!r}",
                    subject=policy.id,
                )
            )
        if rule.fallback is not None:
            fallback = model.policies.get(rule.fallback)
            if fallback is None:
                out(
                    error(
                        "model.unknown-ref",
                        f"fallback {rule.fallback!r} of policy {policy.id!r} is not declared",
                        subject=rule.fallback,
                    )
                )
            elif isinstance(fallback.rule, ComposedRule):
                out(
                    error(
                        "model.fallback-composed",
                        f"fallback {rule.fallback!r} of policy {policy.id!r} is composed; "
                        "fallbacks resolve a single ballot and must be simple",
                        subject=policy.id,
                    )
                )
            elif _fallback_cycle(policy, model):
                out(
                    error(
                        "model.fallback-cycle",
                        f"fallback chain of policy {policy.id!r} is cyclic",
                        subject=policy.id,
                    )
                )

    if isinstance(rule, ComposedRule):
        if len(rule.phases) < 2:
            out(
                error(
                    "model.composed-phase-count",
                    f"composed policy {policy.id!r} needs at least two phases",
                    subject=policy.id,
                )
            )
        if len(set(rule.phases)) != len(rule.phases):
            out(
                error(
                    "model.composed-phase-count",
                    f"composed policy {policy.id!r} repeats a phase",
                    subject=policy.id,
                )
            )
        composed_excluded = set(policy.exclusions())
        for phase_id in rule.phases:
            phase = model.policies.get(phase_id)
            if phase is None:
                out(
                    error(
                        "model.unknown-ref",
                        f"phase {phase_id!r} of policy {policy.id!r} is not declared",
                        subject=phase_id,
                    )
                )
                continue
            if isinstance(phase.rule, ComposedRule):
                out(
                    error(
                        "model.composed-depth",
                        f"phase {phase_id!r} of policy {policy.id!r} is itself composed; "
                        "only one level of composition is supported",
                        subject=policy.id,
                    )
                )
            if phase.decision_type is not policy.decision_type:
                out(
                    error(
                        "model.composed-phase-type",
                        f"phase {phase_id!r} decides {phase.decision_type.value} but "
                        f"composed policy {policy.id!r} decides {policy.decision_type.value}",
                        subject=policy.id,
                    )
                )
            if isinstance(phase.rule, LeaderDrivenRule) and phase.rule.leader in composed_excluded:
                out(
                    error(
                        "model.leader-not-member",
                        f"leader {phase.rule.leader!r} of phase {phase_id!r} is excluded "
                        f"by composed policy {policy.id!r}",
                        subject=policy.id,
                    )
                )
        if policy.deadline() is not None:
            out(
                warning(
                    "model.composed-deadline",
                    f"composed policy {policy.id!r} declares a deadline; phase deadlines "
                    "govern resolution and the composed deadline is not enforced",
                    subject=policy.id,
                )
            )

    # Turnout warnings only where the policy actually opens a ballot.
    opens_ballot = policy.id in top_level or policy.id in phase_ids
    if opens_ballot and not isinstance(rule, ComposedRule) and policy.deadline() is None:
        out(
            warning(
                "model.no-deadline",
                f"policy {policy.id!r} has no deadline; its collaborations resolve only "
                "when every eligible participant has voted or on cancellation",
                subject=policy.id,
            )
        )
    if opens_ballot and expanded:
        for cond in policy.min_participants(Placement.PRE) + policy.min_participants(
            Placement.POST
        ):
            if cond.minimum > len(expanded):
                out(
                    warning(
                        "model.min-exceeds-eligible",
                        f"policy {policy.id!r} requires {cond.minimum} participants but "
                        f"only {len(expanded)} are eligible",
                        subject=policy.id,
                    )
                )
