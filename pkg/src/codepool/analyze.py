"""Complementarity and performance analyses over plausibility labels."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .errors import DataError
from .model import ModelId, PlausibilityLabels, SizeClass
from .select import Selection

__all__ = [
    "SolvedSet",
    "FamilyStats",
    "PairBaseline",
    "PairDelta",
    "StrategyCell",
    "solved_set",
    "theoretical_max",
    "unique_contributions",
    "hard_problems",
    "fai_z",
    "pair_sweep",
    "strategy_table",
]

ModelRef = Union[str, ModelId]


def _label(model: ModelRef) -> str:
    return model.label if isinstance(model, ModelId) else model


@dataclass(frozen=True)
class SolvedSet:
    """Problems with at least one plausible candidate in the scope."""

    name: str
    problems: frozenset[str]

    def __len__(self) -> int:
        return len(self.problems)


@dataclass(frozen=True)
class FamilyStats:
    """Within-family advantage of the large model on hard problems, as a
    z-score against the other large models. fai_z is None when the other
    models show zero variance."""

    family: str
    p_l: float
    mu: float
    sigma: float
    fai_z: Optional[float]


def _model_solved(labels: PlausibilityLabels, model_label: str) -> frozenset[str]:
    found = False
    solved = set()
    for (pid, label, _idx), plausible in labels.items():
        if label != model_label:
            continue
        found = True
        if plausible:
            solved.add(pid)
    if not found:
        raise DataError(f"no plausibility labels for model {model_label!r}")
    return frozenset(solved)


def _selection_solved(labels: PlausibilityLabels, selections: Iterable[Selection]) -> frozenset[str]:
    solved = set()
    for sel in selections:
        for (label, idx) in sel.members:
            if labels.is_plausible(sel.problem_id, label, idx):
                solved.add(sel.problem_id)
    return frozenset(solved)


def solved_set(
    labels: PlausibilityLabels,
    scope: Union[ModelRef, Iterable[Selection]],
    name: Optional[str] = None,
) -> SolvedSet:
    """Solved problems for a model (over all its labeled candidates) or for
    a list of per-problem selections (over the selected candidates only)."""
    if isinstance(scope, (str, ModelId)):
        label = _label(scope)
        return SolvedSet(name or label, _model_solved(labels, label))
    selections = list(scope)
    if name is None:
        name = selections[0].strategy.value if selections else "selection"
    return SolvedSet(name, _selection_solved(labels, selections))


def theoretical_max(models: Sequence[ModelRef], labels: PlausibilityLabels) -> int:
    """Size of the union of the models' solved sets."""
    if not models:
        raise ValueError("at least one model required")
    union: set[str] = set()
    for m in models:
        union |= _model_solved(labels, _label(m))
    return len(union)


def unique_contributions(
    models: Sequence[ModelRef], labels: PlausibilityLabels
) -> dict[str, int]:
    """Per model, how many problems only it solves among the listed models."""
    if len(models) < 2:
        raise ValueError("at least two models required")
    solved = {_label(m): _model_solved(labels, _label(m)) for m in models}
    out: dict[str, int] = {}
    for label, mine in solved.items():
        others: set[str] = set()
        for other_label, theirs in solved.items():
            if other_label != label:
                others |= theirs
        out[label] = len(mine - others)
    return out


def hard_problems(
    small_models: Sequence[ModelRef], labels: PlausibilityLabels
) -> frozenset[str]:
    """Problems solved by at least one but not all of the small models."""
    if len(small_models) < 2:
        raise ValueError("at least two small models required")
    for m in small_models:
        if isinstance(m, ModelId) and m.size_class is not SizeClass.SMALL:
            raise ValueError(f"model {m.label!r} is not a small model")
    solved = [_model_solved(labels, _label(m)) for m in small_models]
    union = frozenset().union(*solved)
    everyone = solved[0]
    for s in solved[1:]:
        everyone = everyone & s
    return frozenset(union - everyone)


def _conditional(
    solved_small: frozenset[str], solved_large: frozenset[str], hard: frozenset[str]
) -> float:
    base = hard & solved_small
    return len(base & solved_large) / len(base)


def fai_z(
    family: tuple[ModelRef, ModelRef],
    other_large: Sequence[ModelRef],
    labels: PlausibilityLabels,
    hard: frozenset[str],
) -> FamilyStats:
    """Family advantage z-score on the hard set.

    p_L is the probability that the family's large model solves a hard
    problem given its small model solved it; mu and sigma are the mean and
    population standard deviation of the same probability for the other
    large models.
    """
    small, large = family
    if not other_large:
        raise ValueError("other_large must be non-empty")
    small_solved = _model_solved(labels, _label(small))
    if not (hard & small_solved):
        raise DataError("no hard problems solved by small model")
    family_name = large.family if isinstance(large, ModelId) else _label(large)

    p_l = _conditional(small_solved, _model_solved(labels, _label(large)), hard)
    others = [
        _conditional(small_solved, _model_solved(labels, _label(m)), hard)
        for m in other_large
    ]
    mu = sum(others) / len(others)
    sigma = math.sqrt(sum((p - mu) ** 2 for p in others) / len(others))
    z = None if sigma == 0.0 else (p_l - mu) / sigma
    return FamilyStats(family=family_name, p_l=p_l, mu=mu, sigma=sigma, fai_z=z)


class PairBaseline(Enum):
    BEST_SINGLE = "best_single"
    NAIVE = "naive"


@dataclass(frozen=True)
class PairDelta:
    model_a: str
    model_b: str
    delta: int


PairSelector = Callable[[tuple[ModelId, ModelId]], Iterable[Selection]]


def pair_sweep(
    models: Sequence[ModelId],
    labels: PlausibilityLabels,
    selector: PairSelector,
    baseline: PairBaseline = PairBaseline.BEST_SINGLE,
    naive_selector: Optional[PairSelector] = None,
) -> list[PairDelta]:
    """Solved-count deltas of a two-model heuristic over every unordered
    pair, against the best single model of the pair or its naive selection.

    Pairs are ordered lexicographically by label; each row has a < b.
    """
    if len(models) < 2:
        raise ValueError("at least two models required")
    if baseline is PairBaseline.NAIVE and naive_selector is None:
        raise ValueError("naive baseline requires a naive selector")
    by_label = sorted(models, key=lambda m: m.label)
    out: list[PairDelta] = []
    for i, ma in enumerate(by_label):
        for mb in by_label[i + 1 :]:
            pair = (ma, mb)
            solved = len(_selection_solved(labels, selector(pair)))
            if baseline is PairBaseline.BEST_SINGLE:
                base = max(
                    len(_model_solved(labels, ma.label)),
                    len(_model_solved(labels, mb.label)),
                )
            else:
                base = len(_selection_solved(labels, naive_selector(pair)))
            out.append(PairDelta(ma.label, mb.label, solved - base))
    return out


@dataclass(frozen=True)
class StrategyCell:
    ensemble: str
    metric: str
    strategy: str
    solved: int


def strategy_table(
    ensembles: Sequence[tuple[str, Sequence[ModelRef]]],
    selections: Mapping[tuple[str, str, str], Sequence[Selection]],
    labels: PlausibilityLabels,
) -> list[StrategyCell]:
    """Long-format solved-count table.

    One row per provided (ensemble, metric, strategy) selection list, in
    mapping order, plus a terminal (best, best) row per ensemble holding
    the ensemble's theoretical maximum.
    """
    cells: list[StrategyCell] = []
    for name, members in ensembles:
        for (ens, metric, strategy), sels in selections.items():
            if ens != name:
                continue
            solved = len(_selection_solved(labels, sels))
            cells.append(StrategyCell(name, metric, strategy, solved))
        cells.append(StrategyCell(name, "best", "best", theoretical_max(members, labels)))
    return cells
