"""Syntax tree produced by the parser, prior to reference resolution.

Every node keeps the :class:`SourceSpan` of the text it came from so later
stages (model building, validation) can anchor diagnostics precisely.
References between declarations are plain identifier strings at this stage.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..diagnostics import SourceSpan


@dataclass(frozen=True)
class AttrLine:
    """A ``name : value`` line inside a block; two-word attribute names such
    as ``vote value`` arrive joined with a single space."""

    name: str
    value: str
    span: SourceSpan
    value_span: SourceSpan


@dataclass(frozen=True)
class TaskDecl:
    name: str
    span: SourceSpan


@dataclass(frozen=True)
class ActivityDecl:
    name: str
    tasks: tuple[TaskDecl, ...]
    span: SourceSpan


@dataclass(frozen=True)
class ProjectDecl:
    name: str
    activities: tuple[ActivityDecl, ...]
    span: SourceSpan


@dataclass(frozen=True)
class ProfileDecl:
    name: str
    attributes: tuple[AttrLine, ...]
    span: SourceSpan


@dataclass(frozen=True)
class RoleDecl:
    name: str
    span: SourceSpan


@dataclass(frozen=True)
class IndividualDecl:
    name: str
    is_agent: bool
    attributes: tuple[AttrLine, ...]
    span: SourceSpan


@dataclass(frozen=True)
class ConditionDecl:
    """One condition line: optional ``pre``/``post`` marker, a kind word,
    and kind-specific payload fields."""

    kind: str  # "Deadline" | "ParticipantExclusion" | "MinParticipants"
    placement: str | None  # "pre" | "post" | None (use the default)
    count: str | None = None  # Deadline / MinParticipants payload
    unit: str | None = None  # Deadline payload
    participants: tuple[str, ...] = ()  # ParticipantExclusion payload
    span: SourceSpan = SourceSpan(1, 1, 1, 1)


@dataclass(frozen=True)
class ParamDecl:
    name: str
    value: str
    span: SourceSpan


@dataclass(frozen=True)
class PolicyDecl:
    kind: str  # policy keyword, e.g. "MajorityPolicy"
    name: str
    scope: str | None = None
    decision_type: str | None = None
    participant_list: tuple[str, ...] = ()
    conditions: tuple[ConditionDecl, ...] = ()
    parameters: tuple[ParamDecl, ...] = ()
    leader: str | None = None
    fallback: str | None = None
    execution: str | None = None
    combination: str | None = None
    carry_votes: str | None = None
    phases: tuple[str, ...] = ()
    span: SourceSpan = SourceSpan(1, 1, 1, 1)


@dataclass
class PolicyFile:
    """Parsed file: Scopes section, Participants section, policy declarations."""

    projects: list[ProjectDecl] = field(default_factory=list)
    profiles: list[ProfileDecl] = field(default_factory=list)
    roles: list[RoleDecl] = field(default_factory=list)
    individuals: list[IndividualDecl] = field(default_factory=list)
    policies: list[PolicyDecl] = field(default_factory=list)
    has_scopes_section: bool = False
    has_participants_section: bool = False
