"""Four-term weighted code similarity score."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .bleu import NgramProfile, Smoothing, keyword_weight_map, profile_bleu
from .dataflow import AssignmentFlowProvider, DataflowSet, counts_dataflow_match
from .lexer import TokenSeq, keyword_set, tokenize
from .structure import (
    SignatureProfile,
    StructureTreeProvider,
    SyntaxTree,
)

__all__ = ["CodeBleuConfig", "CodeBleuDoc", "CodeBleu", "codebleu", "TERM_NAMES"]

TERM_NAMES = ("ngram", "weighted_ngram", "syntax", "dataflow")


@dataclass(frozen=True)
class CodeBleuConfig:
    language: str = "java"
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    max_n: int = 4
    smoothing: Smoothing = Smoothing.ADD_ONE
    keyword_weight: float = 4.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) != 4:
            raise ValueError("weights must have 4 entries")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if self.max_n < 1:
            raise ValueError("max_n must be at least 1")
        if self.keyword_weight <= 0:
            raise ValueError("keyword_weight must be positive")


@dataclass(frozen=True)
class CodeBleuDoc:
    """One side of a comparison, preprocessed once: token sequence, the
    structural views (None where the provider failed on this code), and
    the derived lookup structures the pair terms run on."""

    tokens: TokenSeq
    tree: Optional[SyntaxTree]
    flow: Optional[DataflowSet]
    ngrams: NgramProfile = field(repr=False)
    tree_sigs: Optional[SignatureProfile] = field(repr=False)
    flow_counts: Optional[Counter] = field(repr=False)


class CodeBleu:
    """Reusable scorer; prepare() once per code string, score() per pair."""

    def __init__(
        self,
        config: CodeBleuConfig = CodeBleuConfig(),
        tree_provider=None,
        dataflow_provider=None,
    ):
        self.config = config
        self._trees = tree_provider or StructureTreeProvider(config.language)
        self._flows = dataflow_provider or AssignmentFlowProvider(config.language)
        self._kw_weights = keyword_weight_map(
            keyword_set(config.language), config.keyword_weight
        )

    def prepare(self, code: str) -> CodeBleuDoc:
        tokens = tokenize(code, self.config.language)
        try:
            tree = self._trees.parse(code)
        except Exception:
            tree = None
        try:
            flow = self._flows.extract(code)
        except Exception:
            flow = None
        return CodeBleuDoc(
            tokens=tokens,
            tree=tree,
            flow=flow,
            ngrams=NgramProfile(tuple(tokens), self.config.max_n),
            tree_sigs=None if tree is None else SignatureProfile(tree),
            flow_counts=None if flow is None else flow.counts(),
        )

    def terms(self, a: CodeBleuDoc, b: CodeBleuDoc) -> dict[str, Optional[float]]:
        """The four term values; None marks a term excluded by provider
        failure on either side."""
        cfg = self.config
        out: dict[str, Optional[float]] = {
            "ngram": profile_bleu(a.ngrams, b.ngrams, cfg.smoothing),
            "weighted_ngram": profile_bleu(
                a.ngrams, b.ngrams, cfg.smoothing, self._kw_weights
            ),
            "syntax": None,
            "dataflow": None,
        }
        if a.tree_sigs is not None and b.tree_sigs is not None:
            out["syntax"] = sum(
                1 for s in a.tree_sigs.sigs if s in b.tree_sigs.present
            ) / len(a.tree_sigs.sigs)
        if a.flow_counts is not None and b.flow_counts is not None:
            out["dataflow"] = counts_dataflow_match(
                a.flow_counts, len(a.flow), b.flow_counts, len(b.flow)
            )
        return out

    def score(self, a: CodeBleuDoc, b: CodeBleuDoc) -> float:
        terms = self.terms(a, b)
        total_weight = 0.0
        acc = 0.0
        for name, weight in zip(TERM_NAMES, self.config.weights):
            value = terms[name]
            if value is None:
                continue
            total_weight += weight
            acc += weight * value
        if total_weight == 0.0:
            return 0.0
        return acc / total_weight


def codebleu(
    code_a: str,
    code_b: str,
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25),
    language: str = "java",
    max_n: int = 4,
    smoothing: Smoothing = Smoothing.ADD_ONE,
) -> float:
    """Score code_a against code_b; excluded terms renormalize the rest."""
    scorer = CodeBleu(
        CodeBleuConfig(language=language, weights=weights, max_n=max_n, smoothing=smoothing)
    )
    return scorer.score(scorer.prepare(code_a), scorer.prepare(code_b))
