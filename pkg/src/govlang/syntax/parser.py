"""Hand-written recursive-descent parser for policy files.

Layout is block based: a ``Scopes:`` section, a ``Participants:`` section
(with ``Profiles``, ``Roles``, ``Individuals`` subsections), then policy
declarations.  Containment is expressed with nested ``{}`` blocks; all
cross-references are bare identifiers.  Whitespace around ``:`` carries no
meaning and commas separate sibling declarations.

Recovery is deliberately coarse: the first error inside a section or policy
block skips to the next synchronization point, so a broken block yields one
diagnostic instead of a cascade.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..diagnostics import Diagnostic, SourceSpan, error
from . import ast
from .lexer import Token, TokenKind

SECTION_WORDS = frozenset({"Scopes", "Participants"})
SUBSECTION_WORDS = frozenset({"Profiles", "Roles", "Individuals"})
BODY_WORDS = frozenset(
    {
        "Scope",
        "DecisionType",
        "Participant",
        "Conditions",
        "Parameters",
        "Leader",
        "Fallback",
        "Execution",
        "Combination",
        "CarryVotes",
        "Phases",
    }
)
CONDITION_KINDS = frozenset({"Deadline", "ParticipantExclusion", "MinParticipants"})
PARAMETER_NAMES = frozenset({"ratio", "minConfidence"})
DECISION_TYPE_WORDS = frozenset({"BooleanDecision", "CandidateChoice"})
TIME_UNITS = frozenset({"minutes", "hours", "days"})

_EOF_SPAN = SourceSpan(1, 1, 1, 1)


@dataclass
class ParseResult:
    ast: ast.PolicyFile
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)


class _Bail(Exception):
    """Internal signal: an error was recorded, skip to a sync point."""


class _Parser:
    def __init__(self, tokens: list[Token], diagnostics: list[Diagnostic]) -> None:
        self.toks = tokens
        self.pos = 0
        self.diags = diagnostics

    # -- cursor helpers ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        idx = self.pos + offset
        return self.toks[idx] if idx < len(self.toks) else None

    def advance(self) -> Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def at_end(self) -> bool:
        return self.pos >= len(self.toks)

    def _end_span(self) -> SourceSpan:
        if self.toks:
            last = self.toks[-1].span
            return SourceSpan(last.end_line, last.end_col, last.end_line, last.end_col)
        return _EOF_SPAN

    def _describe(self, tok: Token | None) -> str:
        return "end of input" if tok is None else repr(tok.text)

    def fail(self, expected: str, tok: Token | None = None, code: str = "syntax.unexpected-token"):
        if tok is None:
            tok = self.peek()
        span = tok.span if tok is not None else self._end_span()
        self.diags.append(
            error(code, f"expected {expected}, found {self._describe(tok)}", span=span)
        )
        raise _Bail()

    def expect_punct(self, ch: str, expected: str | None = None) -> Token:
        tok = self.peek()
        if tok is None or not tok.is_punct(ch):
            self.fail(expected or f"'{ch}'", tok)
        return self.advance()

    def expect_word(self, word: str) -> Token:
        tok = self.peek()
        if tok is None or not tok.is_word(word):
            self.fail(f"'{word}'", tok)
        return self.advance()

    def expect_ident(self, expected: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENT:
            self.fail(expected, tok)
        return self.advance()

    def expect_number(self, expected: str = "a number") -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.NUMBER:
            self.fail(expected, tok)
        return self.advance()

    def expect_one_of(self, words: frozenset[str], expected: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENT or tok.text not in words:
            self.fail(expected, tok)
        return self.advance()

    def ref_ident(self, expected: str, stop_words: frozenset[str] = frozenset()) -> Token:
        """An identifier used as a name or reference.  Structural words that
        start a new construct (detected by a following ``:``) end the
        enclosing list instead of being swallowed as a reference."""
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENT:
            self.fail(expected, tok)
        nxt = self.peek(1)
        if tok.text in stop_words and nxt is not None and nxt.is_punct(":"):
            self.fail(expected, tok)
        return self.advance()

    def _at_section_start(self) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        if tok.kind is TokenKind.KEYWORD:
            return True
        nxt = self.peek(1)
        return (
            tok.kind is TokenKind.IDENT
            and tok.text in SECTION_WORDS
            and nxt is not None
            and nxt.is_punct(":")
        )

    def sync_to_section(self) -> None:
        while not self.at_end() and not self._at_section_start():
            self.advance()

    def skip_block(self, already_open: bool) -> None:
        """Skip to the end of the current ``{}`` block after an error."""
        depth = 1 if already_open else 0
        while not self.at_end():
            tok = self.peek()
            if depth <= 1 and tok.kind is TokenKind.KEYWORD:
                return
            if tok.is_punct("{"):
                depth += 1
            elif tok.is_punct("}"):
                depth -= 1
                if depth <= 0:
                    self.advance()
                    return
            self.advance()

    # -- comma-separated lists --------------------------------------------

    def id_list(self, expected: str, stop_words: frozenset[str]) -> list[Token]:
        items = [self.ref_ident(expected, stop_words)]
        while True:
            tok = self.peek()
            if tok is None or not tok.is_punct(","):
                return items
            self.advance()
            items.append(self.ref_ident(expected, stop_words))

    # -- sections ----------------------------------------------------------

    def parse_file(self) -> ast.PolicyFile:
        out = ast.PolicyFile()
        while not self.at_end():
            tok = self.peek()
            nxt = self.peek(1)
            if tok.is_word("Scopes") and nxt is not None and nxt.is_punct(":"):
                if out.has_scopes_section:
                    self.diags.append(
                        error(
                            "syntax.duplicate-section",
                            "duplicate 'Scopes' section",
                            span=tok.span,
                        )
                    )
                if out.has_participants_section or out.policies:
                    self.diags.append(
                        error(
                            "syntax.section-order",
                            "'Scopes' section must come before 'Participants' and policies",
                            span=tok.span,
                        )
                    )
                self.advance()
                self.advance()
                out.has_scopes_section = True
                self.parse_scopes(out)
            elif tok.is_word("Participants") and nxt is not None and nxt.is_punct(":"):
                if out.has_participants_section:
                    self.diags.append(
                        error(
                            "syntax.duplicate-section",
                            "duplicate 'Participants' section",
                            span=tok.span,
                        )
                    )
                if out.policies:
                    self.diags.append(
                        error(
                            "syntax.section-order",
                            "'Participants' section must come before policy declarations",
                            span=tok.span,
                        )
                    )
                self.advance()
                self.advance()
                out.has_participants_section = True
                self.parse_participants(out)
            elif tok.kind is TokenKind.KEYWORD:
                try:
                    decl = self.parse_policy()
                    out.policies.append(decl)
                except _Bail:
                    self.skip_block(already_open=True)
            else:
                self.diags.append(
                    error(
                        "syntax.unexpected-token",
                        f"expected 'Scopes:', 'Participants:', or a policy declaration "
                        f"(MajorityPolicy, LazyConsensusPolicy, LeaderDrivenPolicy, "
                        f"ComposedPolicy), found {self._describe(tok)}",
                        span=tok.span,
                    )
                )
                self.advance()
                self.sync_to_section()
        return out

    def parse_scopes(self, out: ast.PolicyFile) -> None:
        while True:
            tok = self.peek()
            if tok is None or not tok.is_word("Project"):
                return
            try:
                out.projects.append(self.parse_project())
            except _Bail:
                self.skip_block(already_open=True)
                return

    def parse_project(self) -> ast.ProjectDecl:
        start = self.expect_word("Project")
        name = self.expect_ident("a project name")
        open_brace = self.expect_punct("{")
        activities: list[ast.ActivityDecl] = []
        tok = self.peek()
        if tok is not None and tok.is_word("activities"):
            self.advance()
            self.expect_punct(":")
            activities.append(self.parse_activity())
            while True:
                tok = self.peek()
                if tok is None or not tok.is_punct(","):
                    break
                self.advance()
                activities.append(self.parse_activity())
        close = self._expect_close(open_brace)
        return ast.ProjectDecl(
            name=name.text,
            activities=tuple(activities),
            span=start.span.merge(close.span),
        )

    def parse_activity(self) -> ast.ActivityDecl:
        name = self.ref_ident("an activity name", SECTION_WORDS)
        tasks: list[ast.TaskDecl] = []
        span = name.span
        tok = self.peek()
        if tok is not None and tok.is_punct("{"):
            open_brace = self.advance()
            tok = self.peek()
            if tok is not None and tok.is_word("tasks"):
                self.advance()
                self.expect_punct(":")
                for item in self.id_list("a task name", SECTION_WORDS):
                    tasks.append(ast.TaskDecl(name=item.text, span=item.span))
            close = self._expect_close(open_brace)
            span = span.merge(close.span)
        return ast.ActivityDecl(name=name.text, tasks=tuple(tasks), span=span)

    def parse_participants(self, out: ast.PolicyFile) -> None:
        seen: set[str] = set()
        while True:
            tok = self.peek()
            nxt = self.peek(1)
            if (
                tok is None
                or tok.kind is not TokenKind.IDENT
                or tok.text not in SUBSECTION_WORDS
                or nxt is None
                or not nxt.is_punct(":")
            ):
                return
            if tok.text in seen:
                self.diags.append(
                    error(
                        "syntax.duplicate-section",
                        f"duplicate '{tok.text}' subsection",
                        span=tok.span,
                    )
                )
            seen.add(tok.text)
            self.advance()
            self.advance()
            try:
                if tok.text == "Profiles":
                    self.parse_profiles(out)
                elif tok.text == "Roles":
                    for item in self.id_list("a role name", SECTION_WORDS | SUBSECTION_WORDS):
                        out.roles.append(ast.RoleDecl(name=item.text, span=item.span))
                else:
                    self.parse_individuals(out)
            except _Bail:
                self.skip_block(already_open=False)
                return

    def parse_profiles(self, out: ast.PolicyFile) -> None:
        out.profiles.append(self.parse_profile())
        while True:
            tok = self.peek()
            if tok is None or not tok.is_punct(","):
                return
            self.advance()
            out.profiles.append(self.parse_profile())

    def parse_profile(self) -> ast.ProfileDecl:
        name = self.ref_ident("a profile name", SECTION_WORDS | SUBSECTION_WORDS)
        open_brace = self.expect_punct("{")
        attrs: list[ast.AttrLine] = []
        while True:
            tok = self.peek()
            if tok is None or tok.is_punct("}"):
                break
            if tok.kind is not TokenKind.IDENT:
                self.fail("an attribute name or '}'", tok)
            attr_name = self.advance()
            self.expect_punct(":")
            value = self.peek()
            if value is None or value.kind not in (TokenKind.IDENT, TokenKind.NUMBER):
                self.fail("an attribute value", value)
            self.advance()
            attrs.append(
                ast.AttrLine(
                    name=attr_name.text,
                    value=value.text,
                    span=attr_name.span.merge(value.span),
                    value_span=value.span,
                )
            )
        close = self._expect_close(open_brace)
        return ast.ProfileDecl(
            name=name.text, attributes=tuple(attrs), span=name.span.merge(close.span)
        )

    def parse_individuals(self, out: ast.PolicyFile) -> None:
        out.individuals.append(self.parse_individual())
        while True:
            tok = self.peek()
            if tok is None or not tok.is_punct(","):
                return
            self.advance()
            out.individuals.append(self.parse_individual())

    def parse_individual(self) -> ast.IndividualDecl:
        is_agent = False
        start: Token | None = None
        tok = self.peek()
        if tok is not None and tok.is_punct("("):
            start = self.advance()
            self.expect_word("Agent")
            self.expect_punct(")")
            is_agent = True
        name = self.ref_ident("a participant name", SECTION_WORDS | SUBSECTION_WORDS)
        if start is None:
            start = name
        attrs: list[ast.AttrLine] = []
        end_span = name.span
        tok = self.peek()
        if tok is not None and tok.is_punct("{"):
            open_brace = self.advance()
            attrs = self.parse_individual_attrs()
            close = self._expect_close(open_brace)
            end_span = close.span
        return ast.IndividualDecl(
            name=name.text,
            is_agent=is_agent,
            attributes=tuple(attrs),
            span=start.span.merge(end_span),
        )

    def parse_individual_attrs(self) -> list[ast.AttrLine]:
        attrs: list[ast.AttrLine] = []
        while True:
            tok = self.peek()
            if tok is None or tok.is_punct("}"):
                return attrs
            if tok.kind is not TokenKind.IDENT:
                self.fail("an attribute name or '}'", tok)
            word = self.advance()
            if word.text == "vote":
                tail = self.expect_word("value")
                name, name_span = "vote value", word.span.merge(tail.span)
            elif word.text == "autonomy":
                tail = self.expect_word("level")
                name, name_span = "autonomy level", word.span.merge(tail.span)
            elif word.text in ("explainability", "confidence", "profile", "role"):
                name, name_span = word.text, word.span
            else:
                self.fail(
                    "one of 'vote value', 'autonomy level', 'explainability', "
                    "'confidence', 'profile', 'role'",
                    word,
                )
            self.expect_punct(":")
            if name == "role":
                for item in self.id_list("a role name", SECTION_WORDS | SUBSECTION_WORDS):
                    attrs.append(
                        ast.AttrLine(
                            name="role",
                            value=item.text,
                            span=name_span.merge(item.span),
                            value_span=item.span,
                        )
                    )
                continue
            value = self.peek()
            if name == "profile":
                if value is None or value.kind is not TokenKind.IDENT:
                    self.fail("a profile name", value)
            elif value is None or value.kind is not TokenKind.NUMBER:
                self.fail(f"a number for '{name}'", value)
            self.advance()
            attrs.append(
                ast.AttrLine(
                    name=name,
                    value=value.text,
                    span=name_span.merge(value.span),
                    value_span=value.span,
                )
            )

    # -- policies ----------------------------------------------------------

    def parse_policy(self) -> ast.PolicyDecl:
        kw = self.advance()
        name = self.expect_ident("a policy name")
        open_brace = self.expect_punct("{")
        fields: dict[str, object] = {}
        seen: set[str] = set()

        def once(entry: str, tok: Token) -> None:
            if entry in seen:
                self.diags.append(
                    error(
                        "syntax.duplicate-entry",
                        f"duplicate '{entry}' entry in policy {name.text!r}",
                        span=tok.span,
                    )
                )
                raise _Bail()
            seen.add(entry)

        while True:
            tok = self.peek()
            if tok is None or tok.kind is TokenKind.KEYWORD:
                self._unbalanced(open_brace)
            if tok.is_punct("}"):
                close = self.advance()
                break
            if tok.kind is not TokenKind.IDENT or tok.text not in BODY_WORDS:
                self.fail(
                    "a policy body entry (Scope, DecisionType, Participant list, "
                    "Leader, Fallback, Execution, Combination, CarryVotes, Phases, "
                    "Conditions, Parameters) or '}'",
                    tok,
                )
            word = tok.text
            once(word, tok)
            self.advance()
            if word == "Scope":
                self.expect_punct(":")
                fields["scope"] = self.ref_ident("a scope name", BODY_WORDS).text
            elif word == "DecisionType":
                self.expect_word("as")
                fields["decision_type"] = self.expect_one_of(
                    DECISION_TYPE_WORDS, "'BooleanDecision' or 'CandidateChoice'"
                ).text
            elif word == "Participant":
                self.expect_word("list")
                self.expect_punct(":")
                fields["participant_list"] = tuple(
                    t.text
                    for t in self.id_list(
                        "a role or participant name", BODY_WORDS | CONDITION_KINDS
                    )
                )
            elif word == "Leader":
                self.expect_punct(":")
                fields["leader"] = self.ref_ident("a participant name", BODY_WORDS).text
            elif word == "Fallback":
                self.expect_punct(":")
                fields["fallback"] = self.ref_ident("a policy name", BODY_WORDS).text
            elif word == "Execution":
                self.expect_punct(":")
                fields["execution"] = self.expect_one_of(
                    frozenset({"sequential", "parallel"}), "'sequential' or 'parallel'"
                ).text
            elif word == "Combination":
                self.expect_punct(":")
                fields["combination"] = self.expect_one_of(
                    frozenset({"and", "or"}), "'and' or 'or'"
                ).text
            elif word == "CarryVotes":
                self.expect_punct(":")
                fields["carry_votes"] = self.expect_one_of(
                    frozenset({"true", "false"}), "'true' or 'false'"
                ).text
            elif word == "Phases":
                self.expect_punct(":")
                fields["phases"] = tuple(
                    t.text for t in self.id_list("a policy name", BODY_WORDS | CONDITION_KINDS)
                )
            elif word == "Conditions":
                self.expect_punct(":")
                fields["conditions"] = tuple(self.parse_conditions())
            elif word == "Parameters":
                self.expect_punct(":")
                fields["parameters"] = tuple(self.parse_parameters())
        return ast.PolicyDecl(
            kind=kw.text, name=name.text, span=kw.span.merge(close.span), **fields
        )

    def parse_conditions(self) -> list[ast.ConditionDecl]:
        conditions: list[ast.ConditionDecl] = []
        while True:
            tok = self.peek()
            if tok is None or tok.kind is not TokenKind.IDENT:
                return conditions
            placement: str | None = None
            start = tok
            if tok.text in ("pre", "post"):
                nxt = self.peek(1)
                if nxt is None or nxt.kind is not TokenKind.IDENT or nxt.text not in CONDITION_KINDS:
                    return conditions
                placement = self.advance().text
                tok = self.peek()
            if tok.text not in CONDITION_KINDS:
                return conditions
            kind = self.advance()
            self.expect_punct(":")
            if kind.text == "Deadline":
                count = self.expect_number("a duration count")
                unit = self.expect_one_of(TIME_UNITS, "'minutes', 'hours', or 'days'")
                conditions.append(
                    ast.ConditionDecl(
                        kind="Deadline",
                        placement=placement,
                        count=count.text,
                        unit=unit.text,
                        span=start.span.merge(unit.span),
                    )
                )
            elif kind.text == "MinParticipants":
                count = self.expect_number("a participant count")
                conditions.append(
                    ast.ConditionDecl(
                        kind="MinParticipants",
                        placement=placement,
                        count=count.text,
                        span=start.span.merge(count.span),
                    )
                )
            else:
                names = self.id_list(
                    "a participant name", BODY_WORDS | CONDITION_KINDS | frozenset({"pre", "post"})
                )
                conditions.append(
                    ast.ConditionDecl(
                        kind="ParticipantExclusion",
                        placement=placement,
                        participants=tuple(t.text for t in names),
                        span=start.span.merge(names[-1].span),
                    )
                )

    def parse_parameters(self) -> list[ast.ParamDecl]:
        params: list[ast.ParamDecl] = []
        while True:
            tok = self.peek()
            nxt = self.peek(1)
            if (
                tok is None
                or tok.kind is not TokenKind.IDENT
                or tok.text in BODY_WORDS
                or tok.text in CONDITION_KINDS
                or nxt is None
                or not nxt.is_punct(":")
            ):
                return params
            if tok.text not in PARAMETER_NAMES:
                self.fail("a parameter name ('ratio' or 'minConfidence')", tok)
            name = self.advance()
            self.expect_punct(":")
            value = self.expect_number(f"a number for parameter '{name.text}'")
            params.append(
                ast.ParamDecl(
                    name=name.text, value=value.text, span=name.span.merge(value.span)
                )
            )

    # -- brace bookkeeping ---------------------------------------------------

    def _expect_close(self, open_brace: Token) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is TokenKind.KEYWORD:
            self._unbalanced(open_brace)
        if not tok.is_punct("}"):
            self.fail("'}'", tok)
        return self.advance()

    def _unbalanced(self, open_brace: Token):
        self.diags.append(
            error(
                "syntax.unbalanced-brace",
                "unbalanced braces: this '{' is never closed",
                span=open_brace.span,
            )
        )
        raise _Bail()


def parse(tokens: list[Token]) -> ParseResult:
    """Parse a token list into a :class:`PolicyFile` plus diagnostics.

    Lexer error tokens are reported here and dropped from the stream.  The
    returned tree is best-effort: declarations before the first error are
    always present.
    """
    diagnostics: list[Diagnostic] = []
    clean: list[Token] = []
    for tok in tokens:
        if tok.kind is TokenKind.ERROR:
            if tok.text[0].isdigit():
                diagnostics.append(
                    error(
                        "lex.bad-number",
                        f"malformed number {tok.text!r}",
                        span=tok.span,
                    )
                )
            else:
                diagnostics.append(
                    error(
                        "lex.unknown-char",
                        f"unknown character {tok.text!r}",
                        span=tok.span,
                    )
                )
        else:
            clean.append(tok)
    parser = _Parser(clean, diagnostics)
    tree = parser.parse_file()
    return ParseResult(ast=tree, diagnostics=diagnostics)
