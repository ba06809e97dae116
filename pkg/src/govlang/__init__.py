"""govlang: a toolkit for explicit collaboration governance.

Write who-decides-what rules in a small policy language, validate them into
a typed model, and replay recorded collaboration events (votes, deadlines)
through a deterministic decision engine that emits auditable reports and
enactment actions.
"""
from __future__ import annotations

from .diagnostics import Diagnostic, Severity, SourceSpan, has_errors
from .engine import (
    DecisionEngine,
    DecisionReport,
    Outcome,
    RunResult,
    reports_to_json,
    run,
    run_log,
)
from .model import (
    DecisionType,
    GovernanceModel,
    Participant,
    Policy,
    applicable_policy,
    expand_participants,
    validate_model,
)
from .syntax import ast_to_model, parse, parse_policy_text, pretty_print, tokenize

__version__ = "0.1.0"

__all__ = [
    "Diagnostic",
    "Severity",
    "SourceSpan",
    "has_errors",
    "DecisionEngine",
    "DecisionReport",
    "Outcome",
    "RunResult",
    "reports_to_json",
    "run",
    "run_log",
    "DecisionType",
    "GovernanceModel",
    "Participant",
    "Policy",
    "applicable_policy",
    "expand_participants",
    "validate_model",
    "ast_to_model",
    "parse",
    "parse_policy_text",
    "pretty_print",
    "tokenize",
    "__version__",
]
