"""Canonical text rendering of governance models.

Output uses 4-space indentation, a fixed section order, and declaration
order for every registry.  Defaults are elided (vote weight 1, default
condition placements, CarryVotes false), so printing a freshly parsed model
and reparsing the result yields an equal model.
"""
from __future__ import annotations

from fractions import Fraction

from ..model import (
    ComposedRule,
    Condition,
    DeadlineCondition,
    GovernanceModel,
    LeaderDrivenRule,
    MajorityRule,
    MinParticipantsCondition,
    Participant,
    ParticipantExclusionCondition,
    ParticipantKind,
    Placement,
    Policy,
    ScopeKind,
)
from .builder import DEFAULT_PLACEMENTS

_INDENT = "    "

_ONE = Fraction(1)


def render_number(value: Fraction) -> str:
    """Render a fraction as its exact decimal form when one exists.

    Numbers parsed from policy text always have 2^a * 5^b denominators and
    round-trip exactly; anything else (only constructible through the API)
    falls back to a 12-significant-digit float rendering.
    """
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{float(value):.12g}"
    places = max(twos, fives)
    scaled = value.numerator * (10**places // value.denominator)
    digits = str(abs(scaled)).rjust(places + 1, "0")
    sign = "-" if scaled < 0 else ""
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def _scope_lines(model: GovernanceModel, out: list[str]) -> None:
    out.append("Scopes:")
    for root in model.roots:
        project = model.scopes[root]
        out.append(f"{_INDENT}Project {project.id} {{")
        activities = [model.scopes[c] for c in project.children]
        if activities:
            for idx, activity in enumerate(activities):
                sep = "," if idx + 1 < len(activities) else ""
                head = f"{_INDENT * 2}activities : " if idx == 0 else _INDENT * 2
                if activity.children:
                    out.append(f"{head}{activity.id} {{")
                    out.append(f"{_INDENT * 3}tasks : {', '.join(activity.children)}")
                    out.append(f"{_INDENT * 2}}}{sep}")
                else:
                    out.append(f"{head}{activity.id}{sep}")
        out.append(f"{_INDENT}}}")


def _participant_lines(participant: Participant) -> list[str]:
    lines: list[str] = []
    if participant.vote_value != _ONE:
        lines.append(f"vote value : {render_number(participant.vote_value)}")
    attrs = participant.agent_attrs
    if attrs is not None:
        if attrs.autonomy_level is not None:
            lines.append(f"autonomy level : {render_number(attrs.autonomy_level)}")
        if attrs.explainability is not None:
            lines.append(f"explainability : {render_number(attrs.explainability)}")
        if attrs.confidence is not None:
            lines.append(f"confidence : {render_number(attrs.confidence)}")
    if participant.profile is not None:
        lines.append(f"profile : {participant.profile}")
    if participant.roles:
        lines.append(f"role : {', '.join(participant.roles)}")
    return lines


def _participants_section(model: GovernanceModel, out: list[str]) -> None:
    out.append("Participants:")
    if model.profiles:
        out.append(f"{_INDENT}Profiles :")
        entries = list(model.profiles.values())
        for idx, profile in enumerate(entries):
            sep = "," if idx + 1 < len(entries) else ""
            out.append(f"{_INDENT * 2}{profile.id} {{")
            for name, value in profile.attributes:
                out.append(f"{_INDENT * 3}{name} : {value}")
            out.append(f"{_INDENT * 2}}}{sep}")
    if model.roles:
        out.append(f"{_INDENT}Roles : {', '.join(model.roles)}")
    if model.participants:
        out.append(f"{_INDENT}Individuals :")
        entries = list(model.participants.values())
        for idx, participant in enumerate(entries):
            sep = "," if idx + 1 < len(entries) else ""
            prefix = "(Agent) " if participant.kind is ParticipantKind.AGENT else ""
            body = _participant_lines(participant)
            if body:
                out.append(f"{_INDENT * 2}{prefix}{participant.id} {{")
                out.extend(f"{_INDENT * 3}{line}" for line in body)
                out.append(f"{_INDENT * 2}}}{sep}")
            else:
                out.append(f"{_INDENT * 2}{prefix}{participant.id}{sep}")


def _condition_line(cond: Condition) -> str:
    if isinstance(cond, DeadlineCondition):
        kind, payload = "Deadline", f"{cond.count} {cond.unit.value}"
    elif isinstance(cond, MinParticipantsCondition):
        kind, payload = "MinParticipants", str(cond.minimum)
    else:
        assert isinstance(cond, ParticipantExclusionCondition)
        kind, payload = "ParticipantExclusion", ", ".join(cond.participants)
    prefix = ""
    if cond.placement is not DEFAULT_PLACEMENTS[kind] and cond.placement in (
        Placement.PRE,
        Placement.POST,
    ):
        prefix = f"{cond.placement.value} "
    return f"{prefix}{kind} : {payload}"


def _policy_lines(policy: Policy, out: list[str]) -> None:
    out.append(f"{policy.kind_keyword} {policy.id} {{")
    out.append(f"{_INDENT}Scope : {policy.scope}")
    out.append(f"{_INDENT}DecisionType as {policy.decision_type.value}")
    out.append(f"{_INDENT}Participant list : {', '.join(policy.participant_list)}")
    rule = policy.rule
    if isinstance(rule, LeaderDrivenRule):
        out.append(f"{_INDENT}Leader : {rule.leader}")
        if rule.fallback is not None:
            out.append(f"{_INDENT}Fallback : {rule.fallback}")
    elif isinstance(rule, ComposedRule):
        out.append(f"{_INDENT}Execution : {rule.execution.value}")
        out.append(f"{_INDENT}Combination : {rule.combination.value}")
        if rule.carry_votes:
            out.append(f"{_INDENT}CarryVotes : true")
        out.append(f"{_INDENT}Phases : {', '.join(rule.phases)}")
    if policy.conditions:
        out.append(f"{_INDENT}Conditions :")
        for cond in policy.conditions:
            out.append(f"{_INDENT * 2}{_condition_line(cond)}")
    params: list[str] = []
    if isinstance(rule, MajorityRule):
        params.append(f"ratio : {render_number(rule.ratio)}")
    if policy.min_confidence is not None:
        params.append(f"minConfidence : {render_number(policy.min_confidence)}")
    if params:
        out.append(f"{_INDENT}Parameters :")
        out.extend(f"{_INDENT * 2}{line}" for line in params)
    out.append("}")


def pretty_print(model: GovernanceModel) -> str:
    """Render ``model`` as canonical policy text (ends with a newline)."""
    out: list[str] = []
    _scope_lines(model, out)
    _participants_section(model, out)
    for policy in model.policies.values():
        _policy_lines(policy, out)
    return "\n".join(out) + "\n"
