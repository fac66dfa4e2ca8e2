"""Selection strategies: pick k candidates per problem from a scored pool."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Optional

from .model import CandidateKey, CandidatePool, EnsembleSpec, GenerationRecord

__all__ = [
    "Direction",
    "Strategy",
    "MetricFamily",
    "ScoredPool",
    "Selection",
    "select_highest",
    "select_lowest",
    "select_diverse",
    "select_naive",
    "distance_for",
]


class Direction(Enum):
    HIGHER_IS_CONSENSUS = "higher"
    LOWER_IS_CONSENSUS = "lower"


class Strategy(Enum):
    HIGHEST = "highest"
    LOWEST = "lowest"
    DIVERSE = "diverse"
    NAIVE = "naive"


class MetricFamily(Enum):
    """What kind of score a metric produces, for the diversity distance."""

    OUTPUT = "output"
    CONFIDENCE = "confidence"


@dataclass(frozen=True)
class ScoredPool:
    """A pool plus one aggregated score per scoreable candidate."""

    pool: CandidatePool
    scores: Mapping[CandidateKey, float]
    direction: Direction

    def __post_init__(self) -> None:
        object.__setattr__(self, "scores", dict(self.scores))
        expected = {rec.key for rec in self.pool.scoreable}
        got = set(self.scores)
        if got != expected:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise ValueError(
                f"scores do not cover the scoreable candidates exactly "
                f"(missing {missing}, extra {extra})"
            )


@dataclass(frozen=True)
class Selection:
    problem_id: str
    strategy: Strategy
    members: tuple[CandidateKey, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(tuple(m) for m in self.members))
        if len(set(self.members)) != len(self.members):
            raise ValueError("selection contains duplicates")


def _ranked(sp: ScoredPool, reverse: bool) -> list[GenerationRecord]:
    """Scoreable candidates sorted by score then pool order."""
    pool = sp.pool
    recs = list(pool.scoreable)
    if reverse:
        return sorted(recs, key=lambda r: (-sp.scores[r.key], pool.position(r.key)))
    return sorted(recs, key=lambda r: (sp.scores[r.key], pool.position(r.key)))


def select_highest(sp: ScoredPool, k: int) -> Selection:
    """The k greatest-scoring scoreable candidates, pool order on ties."""
    if k < 1:
        raise ValueError("k must be positive")
    chosen = _ranked(sp, reverse=True)[:k]
    return Selection(sp.pool.problem_id, Strategy.HIGHEST, tuple(r.key for r in chosen))


def select_lowest(sp: ScoredPool, k: int) -> Selection:
    """The k least-scoring scoreable candidates, pool order on ties."""
    if k < 1:
        raise ValueError("k must be positive")
    chosen = _ranked(sp, reverse=False)[:k]
    return Selection(sp.pool.problem_id, Strategy.LOWEST, tuple(r.key for r in chosen))


def select_diverse(
    sp: ScoredPool,
    distances: Callable[[GenerationRecord, GenerationRecord], float],
    k: int,
) -> Selection:
    """Greedy farthest-point selection seeded with the score extremes.

    Seeds are the argmax and argmin of the score (pool order on ties);
    every later pick maximizes the minimum distance to the selected set.
    With fewer than 2 scoreable candidates, returns whatever exists.
    """
    if k < 2:
        raise ValueError("k must be at least 2 for diversity selection")
    pool = sp.pool
    scoreable = list(pool.scoreable)
    if len(scoreable) < 2:
        return Selection(
            pool.problem_id, Strategy.DIVERSE, tuple(r.key for r in scoreable)
        )

    hi = scoreable[0]
    lo = scoreable[0]
    for rec in scoreable[1:]:
        if sp.scores[rec.key] > sp.scores[hi.key]:
            hi = rec
        if sp.scores[rec.key] < sp.scores[lo.key]:
            lo = rec
    selected = [hi] if hi.key == lo.key else [hi, lo]
    chosen_keys = {r.key for r in selected}
    remaining = [r for r in scoreable if r.key not in chosen_keys]

    target = min(k, len(scoreable))
    while len(selected) < target:
        best = None
        best_gap = None
        for rec in remaining:
            gap = min(distances(rec, s) for s in selected)
            if best is None or gap > best_gap:
                best, best_gap = rec, gap
        selected.append(best)
        remaining.remove(best)
    return Selection(pool.problem_id, Strategy.DIVERSE, tuple(r.key for r in selected))


def select_naive(pool: CandidatePool, spec: EnsembleSpec, k: int) -> Selection:
    """First-outputs-per-model selection, blind to scores.

    Each member contributes its candidates 0..q-1 where q = k // members;
    the first k mod members members contribute index q as well. Indices
    absent from the pool are skipped.
    """
    if k < 1:
        raise ValueError("k must be positive")
    m = len(spec.members)
    quota, remainder = divmod(k, m)
    members: list[CandidateKey] = []
    for pos, model in enumerate(spec.members):
        take = quota + (1 if pos < remainder else 0)
        for idx in range(take):
            key = (model.label, idx)
            try:
                pool.position(key)
            except KeyError:
                continue
            members.append(key)
    return Selection(pool.problem_id, Strategy.NAIVE, tuple(members))


def distance_for(
    family: MetricFamily,
    pair_metric: Optional[Callable[[GenerationRecord, GenerationRecord], float]] = None,
    scores: Optional[Mapping[CandidateKey, float]] = None,
) -> Callable[[GenerationRecord, GenerationRecord], float]:
    """The diversity distance for a metric kind.

    Output metrics: d = 1 - metric(a, b). Confidence metrics: d is the
    absolute gap between the aggregated scalar scores.
    """
    if family is MetricFamily.OUTPUT:
        if pair_metric is None:
            raise ValueError("output-based distance needs the pair metric")
        return lambda a, b: 1.0 - pair_metric(a, b)
    if scores is None:
        raise ValueError("confidence-based distance needs the score map")
    return lambda a, b: abs(scores[a.key] - scores[b.key])
