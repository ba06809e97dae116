"""Diagnostics shared by the parser, validator, engine, and ingest pipeline.

A :class:`Diagnostic` is a severity-tagged message with a stable machine
code, an optional source span, and the identifier it complains about.
Producers never raise on bad input; they collect diagnostics and keep
going, so one run reports everything it can find.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class SourceSpan:
    """1-based, inclusive region of a source document."""

    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.start_line}:{self.start_col}"

    def merge(self, other: "SourceSpan") -> "SourceSpan":
        a, b = self, other
        start = min((a.start_line, a.start_col), (b.start_line, b.start_col))
        end = max((a.end_line, a.end_col), (b.end_line, b.end_col))
        return SourceSpan(start[0], start[1], end[0], end[1])


_COLORS = {
    Severity.ERROR: "\x1b[31m",
    Severity.WARNING: "\x1b[33m",
    Severity.INFO: "\x1b[36m",
}
_RESET = "\x1b[0m"


@dataclass(frozen=True)
class Diagnostic:
    """One finding, e.g. ``error[model.unknown-ref] policy.gov:12:5: ...``.

    ``code`` is stable across releases and safe to assert on; ``subject``
    carries the offending identifier when one exists.
    """

    severity: Severity
    code: str
    message: str
    span: SourceSpan | None = None
    subject: str | None = None
    source: str | None = None

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def render(self, color: bool = False) -> str:
        where = ""
        if self.source and self.span:
            where = f" {self.source}:{self.span}:"
        elif self.source:
            where = f" {self.source}:"
        elif self.span:
            where = f" {self.span}:"
        label = f"{self.severity.value}[{self.code}]"
        if color:
            label = f"{_COLORS[self.severity]}{label}{_RESET}"
        return f"{label}{where} {self.message}"


def error(code: str, message: str, **kw) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, **kw)


def warning(code: str, message: str, **kw) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, **kw)


def info(code: str, message: str, **kw) -> Diagnostic:
    return Diagnostic(Severity.INFO, code, message, **kw)


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)


def error_codes(diagnostics: Iterable[Diagnostic]) -> set[str]:
    return {d.code for d in diagnostics if d.is_error}
