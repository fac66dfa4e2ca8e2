"""Assignment-chain dataflow approximation and multiset edge matching."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .lexer import keyword_set, scan_tokens

__all__ = [
    "DataflowSet",
    "AssignmentFlowProvider",
    "dataflow_match",
    "counts_dataflow_match",
]

_ASSIGN_OPS = frozenset(
    ["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=",
     ">>>=", "**=", "//=", "@=", ":="]
)
_RHS_END = frozenset([";", ","])
_OPENERS = {"(": ")", "[": "]", "{": "}"}
_CLOSERS = frozenset(_OPENERS.values())


@dataclass(frozen=True)
class DataflowSet:
    """Multiset of (def_identifier, use_identifier) edges, one per
    identifier occurrence on the right-hand side of an assignment."""

    edges: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    def __len__(self) -> int:
        return len(self.edges)

    def counts(self) -> Counter:
        return Counter(self.edges)


class AssignmentFlowProvider:
    """Extract def→use edges: for every `x <assign-op> rhs`, one edge per
    identifier token in rhs. Dotted targets and comparisons never match
    because the lexer emits `==`, `<=` and friends as single tokens."""

    def __init__(self, language: str):
        self.language = language
        self.keywords = keyword_set(language)
        self._newline_ends = language == "python"

    def extract(self, code: str) -> DataflowSet:
        tokens = scan_tokens(code, self.language, keep_newlines=self._newline_ends)
        edges: list[tuple[str, str]] = []
        n = len(tokens)
        for i in range(n - 1):
            tok = tokens[i]
            nxt = tokens[i + 1]
            if tok.kind != "ident" or tok.text in self.keywords:
                continue
            if nxt.text not in _ASSIGN_OPS:
                continue
            if i > 0 and tokens[i - 1].text == ".":
                continue  # attribute target, no single def identifier
            target = tok.text
            depth = 0
            j = i + 2
            while j < n:
                t = tokens[j]
                if t.kind == "newline":
                    if depth == 0:
                        break
                    j += 1
                    continue
                if t.text in _OPENERS:
                    depth += 1
                elif t.text in _CLOSERS:
                    if depth == 0:
                        break
                    depth -= 1
                elif depth == 0 and (t.text in _RHS_END or t.text in _ASSIGN_OPS):
                    break
                elif t.kind == "ident" and t.text not in self.keywords:
                    edges.append((target, t.text))
                j += 1
        return DataflowSet(tuple(edges))


def counts_dataflow_match(
    counts_a: Counter, total_a: int, counts_b: Counter, total_b: int
) -> float:
    """dataflow_match over precomputed edge counts."""
    if total_a == 0:
        return 1.0 if total_b == 0 else 0.0
    inter = counts_a & counts_b
    return sum(inter.values()) / total_a


def dataflow_match(a: DataflowSet, b: DataflowSet) -> float:
    """Multiset intersection size over |a|; two empty sets match fully."""
    return counts_dataflow_match(a.counts(), len(a), b.counts(), len(b))
