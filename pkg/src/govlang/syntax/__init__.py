"""Concrete syntax: tokenizer, parser, model builder, pretty-printer."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..diagnostics import Diagnostic
from ..model import GovernanceModel
from . import ast
from .builder import BuildResult, ast_to_model
from .lexer import Token, TokenKind, tokenize
from .parser import ParseResult, parse
from .printer import pretty_print, render_number

__all__ = [
    "Token",
    "TokenKind",
    "tokenize",
    "ParseResult",
    "parse",
    "BuildResult",
    "ast_to_model",
    "pretty_print",
    "render_number",
    "LoadResult",
    "parse_policy_text",
    "ast",
]


@dataclass
class LoadResult:
    """Outcome of the full text -> tokens -> tree -> model pipeline."""

    model: GovernanceModel | None
    tree: ast.PolicyFile | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.model is not None and not any(d.is_error for d in self.diagnostics)


def parse_policy_text(text: str, source: str | None = None) -> LoadResult:
    """Parse policy text all the way to a validated model.

    Building is skipped when parsing already failed, so diagnostics stay
    anchored to the first broken construct.  ``source`` (usually a file
    name) is stamped onto every diagnostic.
    """
    import dataclasses

    parsed = parse(tokenize(text))
    diagnostics = list(parsed.diagnostics)
    model = None
    if parsed.ok:
        built = ast_to_model(parsed.ast)
        diagnostics.extend(built.diagnostics)
        model = built.model
    if source is not None:
        diagnostics = [dataclasses.replace(d, source=source) for d in diagnostics]
    return LoadResult(model=model, tree=parsed.ast, diagnostics=diagnostics)
