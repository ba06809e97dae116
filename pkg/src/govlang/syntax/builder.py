"""Turns a parsed policy file into a validated :class:`GovernanceModel`.

The builder resolves nothing eagerly: it assembles registries, materializes
defaults (vote weight 1, condition placements), then runs full model
validation and maps each finding back to a source span via the declaration
and reference sites collected during the walk.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction

from ..diagnostics import Diagnostic, SourceSpan, error
from ..model import (
    AgentAttributes,
    CombinationMode,
    ComposedRule,
    Condition,
    DeadlineCondition,
    DecisionType,
    ExecutionMode,
    GovernanceModel,
    LazyConsensusRule,
    LeaderDrivenRule,
    MajorityRule,
    MinParticipantsCondition,
    Participant,
    ParticipantExclusionCondition,
    ParticipantKind,
    Placement,
    Policy,
    Profile,
    Role,
    Rule,
    ScopeKind,
    ScopeNode,
    TimeUnit,
    derive_top_level,
    validate_model,
)
from . import ast

_PLACEMENTS = {"pre": Placement.PRE, "post": Placement.POST}
_UNITS = {u.value: u for u in TimeUnit}
_DECISION_TYPES = {d.value: d for d in DecisionType}
_EXECUTIONS = {e.value: e for e in ExecutionMode}
_COMBINATIONS = {c.value: c for c in CombinationMode}

DEFAULT_PLACEMENTS = {
    "Deadline": Placement.DURING,
    "ParticipantExclusion": Placement.PRE,
    "MinParticipants": Placement.POST,
}


@dataclass
class BuildResult:
    model: GovernanceModel | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.model is not None and not any(d.is_error for d in self.diagnostics)


class _Builder:
    def __init__(self, tree: ast.PolicyFile) -> None:
        self.tree = tree
        self.diags: list[Diagnostic] = []
        self.decl_spans: dict[str, SourceSpan] = {}
        self.ref_spans: dict[str, SourceSpan] = {}

    def note_decl(self, name: str, span: SourceSpan, registry: dict, what: str) -> bool:
        """Record a declaration; returns False (and reports) on redeclaration."""
        if name in registry:
            self.diags.append(
                error(
                    "model.duplicate-declaration",
                    f"duplicate declaration of {what} {name!r}",
                    span=span,
                    subject=name,
                )
            )
            return False
        self.decl_spans.setdefault(name, span)
        return True

    def note_ref(self, name: str, span: SourceSpan) -> str:
        self.ref_spans.setdefault(name, span)
        return name

    def number(self, text: str, span: SourceSpan, what: str) -> Fraction:
        return Fraction(text)

    def integer(self, text: str, span: SourceSpan, what: str) -> int:
        if "." in text:
            self.diags.append(
                error(
                    "model.bad-number",
                    f"{what} must be an integer, got {text!r}",
                    span=span,
                )
            )
            return max(1, int(text.split(".")[0] or "0"))
        return int(text)

    # -- sections ------------------------------------------------------------

    def build_scopes(self) -> tuple[dict[str, ScopeNode], tuple[str, ...]]:
        scopes: dict[str, ScopeNode] = {}
        roots: list[str] = []

        def add(name: str, kind: ScopeKind, children: tuple[str, ...], span: SourceSpan) -> None:
            if self.note_decl(name, span, scopes, "scope"):
                scopes[name] = ScopeNode(id=name, kind=kind, children=children)

        for project in self.tree.projects:
            activity_ids = tuple(a.name for a in project.activities)
            for activity in project.activities:
                task_ids = tuple(t.name for t in activity.tasks)
                for task in activity.tasks:
                    add(task.name, ScopeKind.TASK, (), task.span)
                add(activity.name, ScopeKind.ACTIVITY, task_ids, activity.span)
            add(project.name, ScopeKind.PROJECT, activity_ids, project.span)
            if project.name in scopes:
                roots.append(project.name)
        return scopes, tuple(roots)

    def build_profiles(self) -> dict[str, Profile]:
        profiles: dict[str, Profile] = {}
        for decl in self.tree.profiles:
            if not self.note_decl(decl.name, decl.span, profiles, "profile"):
                continue
            profiles[decl.name] = Profile(
                id=decl.name,
                attributes=tuple((a.name, a.value) for a in decl.attributes),
            )
        return profiles

    def build_roles(self) -> dict[str, Role]:
        roles: dict[str, Role] = {}
        for decl in self.tree.roles:
            if self.note_decl(decl.name, decl.span, roles, "role"):
                roles[decl.name] = Role(id=decl.name)
        return roles

    def build_participants(self) -> dict[str, Participant]:
        participants: dict[str, Participant] = {}
        for decl in self.tree.individuals:
            if not self.note_decl(decl.name, decl.span, participants, "participant"):
                continue
            weight = Fraction(1)
            profile: str | None = None
            roles: list[str] = []
            agent_values: dict[str, Fraction] = {}
            for attr in decl.attributes:
                if attr.name == "vote value":
                    weight = self.number(attr.value, attr.value_span, "vote value")
                elif attr.name == "profile":
                    profile = self.note_ref(attr.value, attr.value_span)
                elif attr.name == "role":
                    ref = self.note_ref(attr.value, attr.value_span)
                    if ref not in roles:
                        roles.append(ref)
                else:
                    key = attr.name.replace(" ", "_")
                    agent_values[key] = self.number(attr.value, attr.value_span, attr.name)
            agent_attrs = None
            if decl.is_agent:
                agent_attrs = AgentAttributes(**agent_values)
            elif agent_values:
                # Keep the stray attributes so validation can point at them.
                agent_attrs = AgentAttributes(**agent_values)
            participants[decl.name] = Participant(
                id=decl.name,
                kind=ParticipantKind.AGENT if decl.is_agent else ParticipantKind.HUMAN,
                vote_value=weight,
                profile=profile,
                roles=tuple(roles),
                agent_attrs=agent_attrs,
            )
        return participants

    def build_condition(self, decl: ast.ConditionDecl) -> Condition:
        placement = _PLACEMENTS.get(decl.placement or "", DEFAULT_PLACEMENTS[decl.kind])
        if decl.kind == "Deadline":
            return DeadlineCondition(
                count=self.integer(decl.count or "0", decl.span, "deadline count"),
                unit=_UNITS[decl.unit or "days"],
                placement=placement,
            )
        if decl.kind == "MinParticipants":
            return MinParticipantsCondition(
                minimum=self.integer(decl.count or "0", decl.span, "participant count"),
                placement=placement,
            )
        return ParticipantExclusionCondition(
            participants=tuple(self.note_ref(p, decl.span) for p in decl.participants),
            placement=placement,
        )

    def build_policy(self, decl: ast.PolicyDecl, policies: dict[str, Policy]) -> Policy | None:
        if not self.note_decl(decl.name, decl.span, policies, "policy"):
            return None

        def require(value, entry: str):
            if value is None or value == ():
                self.diags.append(
                    error(
                        "model.missing-entry",
                        f"policy {decl.name!r} is missing its '{entry}' entry",
                        span=decl.span,
                        subject=decl.name,
                    )
                )
            return value

        scope = require(decl.scope, "Scope") or ""
        if decl.scope:
            self.note_ref(decl.scope, decl.span)
        decision_word = require(decl.decision_type, "DecisionType") or "BooleanDecision"
        participant_list = tuple(
            self.note_ref(ref, decl.span) for ref in require(decl.participant_list, "Participant list") or ()
        )

        params = {p.name: p for p in decl.parameters}
        min_confidence = None
        if "minConfidence" in params:
            p = params["minConfidence"]
            min_confidence = self.number(p.value, p.span, "minConfidence")

        rule = self.build_rule(decl, params)
        if rule is None:
            return None
        conditions = tuple(self.build_condition(c) for c in decl.conditions)
        return Policy(
            id=decl.name,
            scope=scope,
            decision_type=_DECISION_TYPES[decision_word],
            participant_list=participant_list,
            rule=rule,
            conditions=conditions,
            min_confidence=min_confidence,
        )

    def build_rule(self, decl: ast.PolicyDecl, params: dict[str, ast.ParamDecl]) -> Rule | None:
        def reject_entries(*entries: tuple[str, object]) -> None:
            for label, value in entries:
                if value not in (None, ()):
                    self.diags.append(
                        error(
                            "model.unexpected-entry",
                            f"policy {decl.name!r} ({decl.kind}) does not take a "
                            f"'{label}' entry",
                            span=decl.span,
                            subject=decl.name,
                        )
                    )

        composed_entries = (
            ("Execution", decl.execution),
            ("Combination", decl.combination),
            ("CarryVotes", decl.carry_votes),
            ("Phases", decl.phases),
        )
        leader_entries = (("Leader", decl.leader), ("Fallback", decl.fallback))

        if decl.kind == "MajorityPolicy":
            reject_entries(*composed_entries, *leader_entries)
            ratio_param = params.get("ratio")
            if ratio_param is None:
                self.diags.append(
                    error(
                        "model.missing-entry",
                        f"policy {decl.name!r} is missing its 'ratio' parameter",
                        span=decl.span,
                        subject=decl.name,
                    )
                )
                return None
            return MajorityRule(ratio=self.number(ratio_param.value, ratio_param.span, "ratio"))
        if decl.kind == "LazyConsensusPolicy":
            reject_entries(*composed_entries, *leader_entries, ("ratio", params.get("ratio")))
            return LazyConsensusRule()
        if decl.kind == "LeaderDrivenPolicy":
            reject_entries(*composed_entries, ("ratio", params.get("ratio")))
            if decl.leader is None:
                self.diags.append(
                    error(
                        "model.missing-entry",
                        f"policy {decl.name!r} is missing its 'Leader' entry",
                        span=decl.span,
                        subject=decl.name,
                    )
                )
                return None
            fallback = self.note_ref(decl.fallback, decl.span) if decl.fallback else None
            return LeaderDrivenRule(leader=self.note_ref(decl.leader, decl.span), fallback=fallback)
        reject_entries(*leader_entries, ("ratio", params.get("ratio")))
        missing = [
            label
            for label, value in (
                ("Execution", decl.execution),
                ("Combination", decl.combination),
                ("Phases", decl.phases),
            )
            if value in (None, ())
        ]
        if missing:
            for label in missing:
                self.diags.append(
                    error(
                        "model.missing-entry",
                        f"policy {decl.name!r} is missing its '{label}' entry",
                        span=decl.span,
                        subject=decl.name,
                    )
                )
            return None
        return ComposedRule(
            phases=tuple(self.note_ref(p, decl.span) for p in decl.phases),
            execution=_EXECUTIONS[decl.execution],
            combination=_COMBINATIONS[decl.combination],
            carry_votes=decl.carry_votes == "true",
        )

    # -- assembly --------------------------------------------------------------

    def build(self) -> BuildResult:
        scopes, roots = self.build_scopes()
        profiles = self.build_profiles()
        roles = self.build_roles()
        participants = self.build_participants()
        policies: dict[str, Policy] = {}
        for decl in self.tree.policies:
            policy = self.build_policy(decl, policies)
            if policy is not None:
                policies[policy.id] = policy
        model = GovernanceModel(
            scopes=scopes,
            roots=roots,
            profiles=profiles,
            roles=roles,
            participants=participants,
            policies=policies,
            top_level_policies=derive_top_level(policies),
        )
        for finding in validate_model(model):
            if finding.span is None and finding.subject is not None:
                span = self.ref_spans.get(finding.subject) or self.decl_spans.get(finding.subject)
                if span is not None:
                    finding = dataclasses.replace(finding, span=span)
            self.diags.append(finding)
        return BuildResult(model=model, diagnostics=self.diags)


def ast_to_model(tree: ast.PolicyFile) -> BuildResult:
    """Build and validate a model from a cleanly parsed file.

    The result always includes the (possibly inconsistent) model so callers
    can inspect it, but ``ok`` is only true when validation found no errors.
    """
    return _Builder(tree).build()
