"""Tokenizer for governance policy text.

Tokens carry both a line/column span and absolute offsets, so the original
document can be reconstructed by splicing lexemes back between the
whitespace that separated them.  Unknown characters and malformed numbers
become error tokens rather than exceptions; the parser turns those into
diagnostics.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..diagnostics import SourceSpan

POLICY_KEYWORDS = frozenset(
    {"MajorityPolicy", "LazyConsensusPolicy", "LeaderDrivenPolicy", "ComposedPolicy"}
)

PUNCTUATION = "{}:,()"

_WS = " \t\r\n"


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENT = "ident"
    NUMBER = "number"
    PUNCT = "punct"
    ERROR = "error"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan
    start: int
    end: int

    def is_punct(self, ch: str) -> bool:
        return self.kind is TokenKind.PUNCT and self.text == ch

    def is_word(self, word: str) -> bool:
        return self.kind is TokenKind.IDENT and self.text == word


def _is_letter(ch: str) -> bool:
    return "a" <= ch <= "z" or "A" <= ch <= "Z"


def _is_ident_char(ch: str) -> bool:
    return _is_letter(ch) or ch.isdigit() or ch == "_"


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens.

    Identifiers are a letter followed by letters, digits, or underscores;
    numbers are decimal integers or decimals (no exponents).  Digits followed
    by a bare dot (``0.``) form a single error token.
    """
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _WS:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1
            continue
        start, start_line, start_col = i, line, col
        if _is_letter(ch):
            while i < n and _is_ident_char(text[i]):
                i += 1
                col += 1
            word = text[start:i]
            kind = TokenKind.KEYWORD if word in POLICY_KEYWORDS else TokenKind.IDENT
        elif ch.isdigit():
            while i < n and text[i].isdigit():
                i += 1
                col += 1
            kind = TokenKind.NUMBER
            if i < n and text[i] == ".":
                i += 1
                col += 1
                if i < n and text[i].isdigit():
                    while i < n and text[i].isdigit():
                        i += 1
                        col += 1
                else:
                    kind = TokenKind.ERROR
            word = text[start:i]
        elif ch in PUNCTUATION:
            i += 1
            col += 1
            word = ch
            kind = TokenKind.PUNCT
        else:
            i += 1
            col += 1
            word = ch
            kind = TokenKind.ERROR
        span = SourceSpan(start_line, start_col, line, col - 1)
        tokens.append(Token(kind, word, span, start, i))
    return tokens


def reconstruct(text: str, tokens: list[Token]) -> str:
    """Rebuild the source from tokens plus the original whitespace."""
    parts: list[str] = []
    pos = 0
    for tok in tokens:
        parts.append(text[pos : tok.start])
        parts.append(tok.text)
        pos = tok.end
    parts.append(text[pos:])
    return "".join(parts)
