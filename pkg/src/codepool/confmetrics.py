"""Confidence scores from token traces and their cross-model aggregation.

Lower values mean higher model confidence for every metric here; direction
is interpreted by the selection module, not by these functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DataError
from .model import EnsembleSpec, GenerationRecord, TokenTrace

__all__ = [
    "ConfidenceMetric",
    "ConfidenceScore",
    "nll_per_byte",
    "entropy_per_byte",
    "sum_entropy_norm",
    "apply_metric",
    "cross_model_sum",
]


class ConfidenceMetric(Enum):
    NLL_PER_BYTE = "nll_per_byte"
    ENTROPY_PER_BYTE = "entropy_per_byte"
    SUM_ENTROPY_NORM = "sum_entropy_norm"


@dataclass(frozen=True)
class ConfidenceScore:
    metric: ConfidenceMetric
    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value) or self.value < 0.0:
            raise ValueError(f"confidence score must be finite and non-negative, got {self.value!r}")


def nll_per_byte(trace: TokenTrace, byte_len: int) -> float:
    """Total negative log-likelihood per UTF-8 byte of the extracted code."""
    if byte_len < 1 or len(trace) == 0:
        raise ValueError("degenerate patch")
    return sum(trace.nlls) / byte_len


def entropy_per_byte(trace: TokenTrace, byte_len: int) -> float:
    """Total token entropy per UTF-8 byte of the extracted code."""
    if byte_len < 1 or len(trace) == 0:
        raise ValueError("degenerate patch")
    return sum(trace.entropies) / byte_len


def sum_entropy_norm(trace: TokenTrace) -> float:
    """Total token entropy normalized by the scoring model's ln|V|.

    Empty traces sum to 0; byte length plays no part here.
    """
    if trace.vocab_size < 2:
        raise ValueError("vocab_size must be at least 2")
    return sum(trace.entropies) / math.log(trace.vocab_size)


def apply_metric(metric: ConfidenceMetric, trace: TokenTrace, byte_len: int) -> float:
    if metric is ConfidenceMetric.NLL_PER_BYTE:
        return nll_per_byte(trace, byte_len)
    if metric is ConfidenceMetric.ENTROPY_PER_BYTE:
        return entropy_per_byte(trace, byte_len)
    return sum_entropy_norm(trace)


def cross_model_sum(
    record: GenerationRecord,
    metric: ConfidenceMetric,
    ensemble: EnsembleSpec,
) -> float:
    """Sum of the metric over every ensemble member's trace of this
    candidate, in member order. The byte length is the candidate's own;
    each member contributes its own vocabulary size."""
    byte_len = record.byte_len
    if byte_len is None:
        raise DataError(
            f"candidate {record.key} for {record.problem_id!r} has no extracted code"
        )
    total = 0.0
    for member in ensemble.members:
        trace = record.cross_traces.get(member.label)
        if trace is None:
            raise DataError(
                f"candidate {record.key} for {record.problem_id!r} has no trace "
                f"from model {member.label!r}"
            )
        total += apply_metric(metric, trace, byte_len)
    return total
