"""Deterministic lexical tokenizer shared by the similarity metrics."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterator

__all__ = ["TokenSeq", "Token", "tokenize", "scan_tokens", "keyword_set"]


@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for t in self.tokens:
            if not t:
                raise ValueError("empty token")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]


@dataclass(frozen=True)
class Token:
    kind: str  # string | number | ident | op | punct | newline
    text: str


_JAVA_OPS = [
    ">>>=", "<<=", ">>=", ">>>", "->", "::", "==", "!=", "<=", ">=",
    "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=", "<<", ">>",
]
_PY_OPS = [
    "**=", "//=", ">>=", "<<=", "->", ":=", "==", "!=", "<=", ">=",
    "**", "//", ">>", "<<", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=", "@=",
]


def _op_alt(ops: list[str]) -> str:
    return "|".join(re.escape(o) for o in ops)


_SYNTAX = {
    "java": re.compile(
        r"(?P<comment>//[^\n]*|/\*(?s:.*?)\*/)"
        r'|(?P<string>"(?:[^"\\\n]|\\.)*"|\'(?:[^\'\\\n]|\\.)*\')'
        r"|(?P<number>0[xX][0-9a-fA-F]+[lL]?"
        r"|(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?[fFdDlL]?)"
        r"|(?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)"
        rf"|(?P<op>{_op_alt(_JAVA_OPS)})"
        r"|(?P<newline>\n)"
        r"|(?P<punct>[^\s])"
    ),
    "python": re.compile(
        r"(?P<comment>#[^\n]*)"
        r"|(?P<string>[rRbBuUfF]{0,2}(?:(?s:\"\"\".*?\"\"\"|'''.*?''')"
        r"|\"(?:[^\"\\\n]|\\.)*\"|'(?:[^'\\\n]|\\.)*'))"
        r"|(?P<number>0[xX][0-9a-fA-F_]+|0[oO][0-7_]+|0[bB][01_]+"
        r"|(?:\d[\d_]*\.\d*|\.\d[\d_]*|\d[\d_]*)(?:[eE][+-]?\d+)?[jJ]?)"
        r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
        rf"|(?P<op>{_op_alt(_PY_OPS)})"
        r"|(?P<newline>\n)"
        r"|(?P<punct>[^\s])"
    ),
}


def _pattern(language: str) -> re.Pattern:
    try:
        return _SYNTAX[language]
    except KeyError:
        raise ValueError(f"unsupported language {language!r}") from None


def scan_tokens(code: str, language: str, keep_newlines: bool = False) -> list[Token]:
    """Lex code into kinds and texts; comments dropped, whitespace skipped.

    Newline tokens are kept only on request (they mark statement boundaries
    for the structural providers).
    """
    out: list[Token] = []
    for m in _pattern(language).finditer(code):
        kind = m.lastgroup
        if kind == "comment":
            continue
        if kind == "newline":
            if keep_newlines:
                out.append(Token("newline", "\n"))
            continue
        # a prefix-only string match like "r" never happens: ident wins there
        out.append(Token(kind, m.group()))
    return out


def tokenize(code: str, language: str) -> TokenSeq:
    """Tokenize code for n-gram and embedding metrics."""
    return TokenSeq(tuple(t.text for t in scan_tokens(code, language)))


@lru_cache(maxsize=None)
def keyword_set(language: str) -> frozenset[str]:
    """The reserved-word list for a supported language."""
    if language not in _SYNTAX:
        raise ValueError(f"unsupported language {language!r}")
    path = resources.files("codepool").joinpath("assets", "keywords", f"{language}.txt")
    words = path.read_text(encoding="utf-8").split()
    return frozenset(words)
