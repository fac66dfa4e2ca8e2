"""Modified n-gram precision scores (plain and keyword-weighted)."""

from __future__ import annotations

import math
from collections import Counter
from enum import Enum
from typing import Mapping, Optional

from .lexer import TokenSeq

__all__ = [
    "Smoothing",
    "NgramProfile",
    "ngram_profile",
    "profile_bleu",
    "ngram_bleu",
    "weighted_ngram_match",
    "keyword_weight_map",
]


class Smoothing(Enum):
    NONE = "none"
    # add one to numerator and denominator of any zero precision at n >= 2
    ADD_ONE = "add_one"


def _ngrams(tokens: tuple[str, ...], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


class NgramProfile:
    """N-gram counts of one token sequence, built once and reused across
    every pairing of that sequence."""

    __slots__ = ("length", "counts")

    def __init__(self, tokens: tuple[str, ...], max_n: int):
        if max_n < 1:
            raise ValueError("max_n must be at least 1")
        self.length = len(tokens)
        self.counts = tuple(_ngrams(tokens, n) for n in range(1, max_n + 1))


def ngram_profile(tokens: TokenSeq, max_n: int = 4) -> NgramProfile:
    return NgramProfile(tuple(tokens), max_n)


def _precision(
    counts_a: Counter,
    counts_b: Counter,
    n: int,
    unigram_weights: Optional[Mapping[str, float]],
) -> tuple[float, float]:
    """Clipped match mass and total mass of a's n-grams against b."""
    if n == 1 and unigram_weights is not None:
        num = 0.0
        den = 0.0
        for gram, c in counts_a.items():
            w = unigram_weights.get(gram[0], 1.0)
            den += w * c
            num += w * min(c, counts_b[gram])
        return num, den
    num = 0
    for gram, c in counts_a.items():
        num += min(c, counts_b[gram])
    return float(num), float(sum(counts_a.values()))


def profile_bleu(
    a: NgramProfile,
    b: NgramProfile,
    smoothing: Smoothing = Smoothing.ADD_ONE,
    unigram_weights: Optional[Mapping[str, float]] = None,
) -> float:
    """BLEU over prepared profiles; both sides must share the same max_n."""
    if len(a.counts) != len(b.counts):
        raise ValueError("profiles were built with different max_n")
    if a.length == 0 or b.length == 0:
        return 0.0
    n_orders = min(len(a.counts), a.length)
    log_sum = 0.0
    for n in range(1, n_orders + 1):
        num, den = _precision(a.counts[n - 1], b.counts[n - 1], n, unigram_weights)
        if num == 0.0:
            if smoothing is Smoothing.ADD_ONE and n >= 2:
                num, den = num + 1.0, den + 1.0
            else:
                return 0.0
        log_sum += math.log(num / den)
    geo = math.exp(log_sum / n_orders)
    if a.length >= b.length:
        bp = 1.0
    else:
        bp = math.exp(1.0 - b.length / a.length)
    return bp * geo


def _geometric_bleu(
    a: TokenSeq,
    b: TokenSeq,
    max_n: int,
    smoothing: Smoothing,
    unigram_weights: Optional[Mapping[str, float]] = None,
) -> float:
    return profile_bleu(
        NgramProfile(tuple(a), max_n),
        NgramProfile(tuple(b), max_n),
        smoothing,
        unigram_weights,
    )


def ngram_bleu(
    a: TokenSeq,
    b: TokenSeq,
    max_n: int = 4,
    smoothing: Smoothing = Smoothing.ADD_ONE,
) -> float:
    """BLEU of a against reference b over orders 1..max_n.

    Orders above len(a) are skipped so identical short sequences still
    score 1. Empty input on either side scores 0.
    """
    return _geometric_bleu(a, b, max_n, smoothing)


def weighted_ngram_match(
    a: TokenSeq,
    b: TokenSeq,
    keyword_weights: Mapping[str, float],
    max_n: int = 4,
    smoothing: Smoothing = Smoothing.ADD_ONE,
) -> float:
    """Keyword-weighted variant: unigram precision weights each token by
    keyword_weights (default 1), higher orders stay unweighted."""
    for token, w in keyword_weights.items():
        if w <= 0:
            raise ValueError(f"non-positive weight for token {token!r}")
    return _geometric_bleu(a, b, max_n, smoothing, unigram_weights=keyword_weights)


def keyword_weight_map(keywords: frozenset[str], weight: float = 4.0) -> dict[str, float]:
    """Weight table giving every keyword the same boosted weight."""
    return {kw: weight for kw in sorted(keywords)}
