from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import SpecSyntaxError
from .terms import Span

SECTIONS = ("@init", "@variable", "@equals", "@tokens", "@invariant", "@operations")

KEYWORDS = frozenset({
    "type", "function", "axiom", "var", "equals", "token", "conflict",
    "operation", "requires", "ensures", "acquires", "old", "forall",
    "true", "false", "int", "bool",
})

# longest operators first
_OPS = ["==>", "==", "!=", "<=", ">=", "&&", "||", ":=", "::",
        "<", ">", "!", "+", "-", "*", ":", ";", ",", "(", ")", "[", "]"]

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+|//[^\n]*)"
    r"|(?P<section>@[A-Za-z_]+)"
    r"|(?P<int>[0-9]+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>" + "|".join(re.escape(o) for o in _OPS) + ")"
)


@dataclass(frozen=True)
class Token:
    kind: str  # section | int | ident | keyword | op | eof
    text: str
    span: Span


def make_span(source: str, start: int, end: int) -> Span:
    line = source.count("\n", 0, start) + 1
    column = start - (source.rfind("\n", 0, start) + 1) + 1
    return Span(start, end, line, column)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            span = make_span(source, pos, pos + 1)
            raise SpecSyntaxError(span, {"token"}, source[pos])
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            span = make_span(source, pos, m.end())
            if kind == "section" and text not in SECTIONS:
                raise SpecSyntaxError(span, set(SECTIONS), text)
            if kind == "ident" and text in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, text, span))
        pos = m.end()
    tokens.append(Token("eof", "", make_span(source, n, n)))
    return tokens
