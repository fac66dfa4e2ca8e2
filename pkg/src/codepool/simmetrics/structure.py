"""Structural tree provider and subtree-match scoring.

The default provider builds a bracket/keyword structure tree rather than a
grammar-level AST: brace and parenthesis groups become internal nodes,
statements are split on separators, and remaining tokens become typed
leaves. The provider interface accepts any deterministic replacement.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lexer import Token, keyword_set, scan_tokens

__all__ = [
    "SyntaxTree",
    "StructureTreeProvider",
    "SignatureProfile",
    "signature_profile",
    "profile_syntax_match",
    "syntax_match",
]


@dataclass(frozen=True)
class SyntaxTree:
    kind: str
    children: tuple["SyntaxTree", ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if not self.kind:
            raise ValueError("node kind must be non-empty")

    def signature(self):
        return (self.kind, tuple(c.signature() for c in self.children))

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)


_GROUPS = {"{": ("}", "braces"), "(": (")", "parens"), "[": ("]", "brackets")}
_CLOSERS = {"}", ")", "]"}


class _TreeBuilder:
    """Single pass over the token stream, tolerant of unbalanced brackets:
    stray closers become leaves, unclosed groups end at EOF."""

    def __init__(self, language: str):
        self.language = language
        self.keywords = keyword_set(language)
        self.newline_splits = language == "python"

    def parse(self, code: str) -> SyntaxTree:
        tokens = scan_tokens(code, self.language, keep_newlines=self.newline_splits)
        children, _ = self._group(tokens, 0, closer=None, in_statements=True)
        return SyntaxTree("unit", tuple(children))

    def _leaf(self, tok: Token) -> SyntaxTree:
        if tok.kind == "ident":
            if tok.text in self.keywords:
                return SyntaxTree(f"kw:{tok.text}")
            return SyntaxTree("name")
        if tok.kind == "number":
            return SyntaxTree("num")
        if tok.kind == "string":
            return SyntaxTree("str")
        return SyntaxTree(f"op:{tok.text}")

    def _group(
        self, tokens: list[Token], i: int, closer, in_statements: bool
    ) -> tuple[list[SyntaxTree], int]:
        items: list[SyntaxTree] = []
        stmt: list[SyntaxTree] = []

        def flush() -> None:
            if stmt:
                items.append(SyntaxTree("stmt", tuple(stmt)))
                stmt.clear()

        sink = stmt if in_statements else items
        while i < len(tokens):
            tok = tokens[i]
            text = tok.text
            if text == closer:
                break
            if tok.kind == "newline":
                if in_statements:
                    flush()
                i += 1
                continue
            if in_statements and text == ";":
                flush()
                i += 1
                continue
            if text in _GROUPS:
                end, kind = _GROUPS[text]
                sub, i = self._group(tokens, i + 1, end, in_statements=(kind == "braces"))
                sink.append(SyntaxTree(kind, tuple(sub)))
                continue
            if text in _CLOSERS:
                sink.append(self._leaf(tok))  # stray closer, keep as leaf
                i += 1
                continue
            sink.append(self._leaf(tok))
            i += 1
        if in_statements:
            flush()
        return items, i + 1


class StructureTreeProvider:
    """Default pluggable tree provider."""

    def __init__(self, language: str):
        self._builder = _TreeBuilder(language)
        self.language = language

    def parse(self, code: str) -> SyntaxTree:
        return self._builder.parse(code)


class SignatureProfile:
    """Every subtree signature of one tree, listed pre-order (with
    duplicates) and as a membership set, built once per document."""

    __slots__ = ("sigs", "present")

    def __init__(self, tree: SyntaxTree):
        by_node: dict[int, tuple] = {}

        def build(node: SyntaxTree) -> tuple:
            sig = (node.kind, tuple(build(c) for c in node.children))
            by_node[id(node)] = sig
            return sig

        build(tree)
        sigs: list[tuple] = []
        stack = [tree]
        while stack:
            node = stack.pop()
            sigs.append(by_node[id(node)])
            stack.extend(reversed(node.children))
        self.sigs = tuple(sigs)
        self.present = frozenset(sigs)


def signature_profile(tree: SyntaxTree) -> SignatureProfile:
    return SignatureProfile(tree)


def profile_syntax_match(a: SignatureProfile, b: SignatureProfile) -> float:
    """Fraction of a's subtrees (by structural signature) present in b."""
    hits = sum(1 for s in a.sigs if s in b.present)
    return hits / len(a.sigs)


def syntax_match(a: SyntaxTree, b: SyntaxTree) -> float:
    """Fraction of a's subtrees (by structural signature) present in b."""
    return profile_syntax_match(SignatureProfile(a), SignatureProfile(b))
