"""Pairwise-sum aggregation of a similarity metric over a candidate pool."""

from __future__ import annotations

from typing import Callable, Optional, Protocol, Union

import numpy as np

from ..model import CandidateKey, CandidatePool, GenerationRecord
from .codebleu import CodeBleu, CodeBleuConfig, CodeBleuDoc
from .embed import EmbeddingSeq, bertscore_f3
from .lexer import tokenize

__all__ = [
    "PairScorer",
    "CodeBleuPairScorer",
    "EmbeddingPairScorer",
    "pairwise_sum_scores",
    "pairwise_matrix",
]


class PairScorer(Protocol):
    """Two-phase pair metric: prepare a record once, score prepared pairs."""

    def prepare(self, record: GenerationRecord): ...

    def pair(self, prepared_a, prepared_b) -> float: ...


MetricLike = Union[PairScorer, Callable[[GenerationRecord, GenerationRecord], float]]


class _CallableScorer:
    def __init__(self, fn: Callable[[GenerationRecord, GenerationRecord], float]):
        self._fn = fn

    def prepare(self, record: GenerationRecord) -> GenerationRecord:
        return record

    def pair(self, a: GenerationRecord, b: GenerationRecord) -> float:
        return self._fn(a, b)


def _as_scorer(metric: MetricLike) -> PairScorer:
    if hasattr(metric, "prepare") and hasattr(metric, "pair"):
        return metric
    return _CallableScorer(metric)


class CodeBleuPairScorer:
    def __init__(self, config: CodeBleuConfig = CodeBleuConfig()):
        self._scorer = CodeBleu(config)

    def prepare(self, record: GenerationRecord) -> CodeBleuDoc:
        return self._scorer.prepare(record.extracted_code)

    def pair(self, a: CodeBleuDoc, b: CodeBleuDoc) -> float:
        return self._scorer.score(a, b)


class EmbeddingPairScorer:
    """Embedding-similarity metric over extracted code tokens.

    A side with no tokens cannot be embedded; pairs touching one score 0.
    """

    def __init__(self, embedder, language: str):
        self._embedder = embedder
        self.language = language

    def prepare(self, record: GenerationRecord) -> Optional[EmbeddingSeq]:
        tokens = tokenize(record.extracted_code, self.language)
        if len(tokens) == 0:
            return None
        return self._embedder.embed(tokens)

    def pair(self, a: Optional[EmbeddingSeq], b: Optional[EmbeddingSeq]) -> float:
        if a is None or b is None:
            return 0.0
        return bertscore_f3(a, b)


def pairwise_sum_scores(
    pool: CandidatePool, metric: MetricLike
) -> dict[CandidateKey, float]:
    """score(c) = Σ metric(c, c') over the other scoreable candidates,
    summed in ascending pool order. Unscoreable candidates get no entry;
    with fewer than 2 scoreable candidates all scoreable ones score 0."""
    scorer = _as_scorer(metric)
    scoreable = pool.scoreable
    if len(scoreable) < 2:
        return {rec.key: 0.0 for rec in scoreable}
    prepared = [scorer.prepare(rec) for rec in scoreable]
    sums: dict[CandidateKey, float] = {}
    for i, rec in enumerate(scoreable):
        acc = 0.0
        for j in range(len(scoreable)):
            if j == i:
                continue
            acc += scorer.pair(prepared[i], prepared[j])
        sums[rec.key] = acc
    return sums


def pairwise_matrix(
    pool: CandidatePool, metric: MetricLike
) -> tuple[list[CandidateKey], np.ndarray]:
    """Full metric matrix over scoreable candidates in pool order; the
    diagonal is 0 so row sums equal pairwise_sum_scores."""
    scorer = _as_scorer(metric)
    scoreable = pool.scoreable
    keys = [rec.key for rec in scoreable]
    prepared = [scorer.prepare(rec) for rec in scoreable]
    n = len(scoreable)
    matrix = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            if j != i:
                matrix[i, j] = scorer.pair(prepared[i], prepared[j])
    return keys, matrix
