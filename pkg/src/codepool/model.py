"""Domain types: models, token traces, generation records, candidate pools."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import DataError
from .extract import TaskKind, extract_code

__all__ = [
    "SizeClass",
    "ModelId",
    "TokenTrace",
    "GenerationRecord",
    "CandidateKey",
    "CandidatePool",
    "PlausibilityLabels",
    "EnsembleSpec",
    "RecordFormat",
    "ingest_records",
    "write_records",
    "build_pool",
]

# tolerance for entropy-vs-ln|V| checks on values that went through text
_ENTROPY_SLACK = 1e-9

CandidateKey = tuple[str, int]


class SizeClass(Enum):
    SMALL = "small"
    LARGE = "large"


@dataclass(frozen=True, order=True)
class ModelId:
    """Identity of one ensemble member: display label, family, size class."""

    label: str
    family: str
    size_class: SizeClass

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("model label must be non-empty")
        if not self.family:
            raise ValueError("model family must be non-empty")


@dataclass(frozen=True)
class TokenTrace:
    """Per-token negative log-likelihoods and entropies (natural log) for one
    scored sequence, plus the vocabulary size of the scoring model."""

    nlls: tuple[float, ...]
    entropies: tuple[float, ...]
    vocab_size: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "nlls", tuple(float(x) for x in self.nlls))
        object.__setattr__(self, "entropies", tuple(float(x) for x in self.entropies))
        if len(self.nlls) != len(self.entropies):
            raise ValueError(
                f"trace length mismatch: {len(self.nlls)} nlls vs "
                f"{len(self.entropies)} entropies"
            )
        if self.vocab_size < 2:
            raise ValueError("vocab_size must be at least 2")
        cap = math.log(self.vocab_size) + _ENTROPY_SLACK
        for x in self.nlls:
            if not math.isfinite(x) or x < 0.0:
                raise ValueError(f"negative or non-finite nll {x!r}")
        for e in self.entropies:
            if not math.isfinite(e) or e < 0.0:
                raise ValueError(f"negative or non-finite entropy {e!r}")
            if e > cap:
                raise ValueError(f"entropy {e!r} exceeds ln|V| for vocab {self.vocab_size}")

    def __len__(self) -> int:
        return len(self.nlls)


@dataclass(frozen=True)
class GenerationRecord:
    """One candidate output of one model for one problem.

    `extracted_code` is None when no fenced block could be recovered from
    the raw output; such candidates stay in the pool but are unscoreable.
    `cross_traces` maps scoring-model labels to the traces obtained by
    running that model over this candidate's extracted code.
    """

    problem_id: str
    model: ModelId
    candidate_index: int
    raw_output: str
    trace: Optional[TokenTrace] = None
    cross_traces: Mapping[str, TokenTrace] = field(default_factory=dict)
    extracted_code: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.problem_id:
            raise ValueError("problem_id must be non-empty")
        if self.candidate_index < 0:
            raise ValueError("candidate_index must be non-negative")
        object.__setattr__(self, "cross_traces", dict(self.cross_traces))

    @property
    def key(self) -> CandidateKey:
        return (self.model.label, self.candidate_index)

    @property
    def scoreable(self) -> bool:
        return self.extracted_code is not None and self.extracted_code != ""

    @property
    def byte_len(self) -> Optional[int]:
        """UTF-8 byte length of the extracted code; None when unscoreable."""
        if not self.scoreable:
            return None
        return len(self.extracted_code.encode("utf-8"))


@dataclass(frozen=True)
class EnsembleSpec:
    """A named set of member models with a pool size and selection budget."""

    name: str
    members: tuple[ModelId, ...]
    n_outputs: int
    k: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        if not self.name:
            raise ValueError("ensemble name must be non-empty")
        if not self.members:
            raise ValueError("ensemble must have at least one member")
        labels = [m.label for m in self.members]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate member labels in ensemble {self.name!r}")
        if self.n_outputs < 1:
            raise ValueError("n_outputs must be positive")
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.k > len(self.members) * self.n_outputs:
            raise ValueError(
                f"k={self.k} exceeds pool capacity "
                f"{len(self.members)}x{self.n_outputs}"
            )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(m.label for m in self.members)


@dataclass(frozen=True)
class CandidatePool:
    """All candidates of one ensemble for one problem, in canonical order:
    ascending (model label, candidate_index)."""

    problem_id: str
    spec: EnsembleSpec
    candidates: tuple[GenerationRecord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        index: dict[CandidateKey, int] = {}
        for i, rec in enumerate(self.candidates):
            if rec.key in index:
                raise ValueError(f"duplicate candidate {rec.key}")
            index[rec.key] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def position(self, key: CandidateKey) -> int:
        return self._index[key]

    def get(self, key: CandidateKey) -> GenerationRecord:
        return self.candidates[self._index[key]]

    @property
    def scoreable(self) -> tuple[GenerationRecord, ...]:
        return tuple(r for r in self.candidates if r.scoreable)


def build_pool(
    records: Iterable[GenerationRecord],
    spec: EnsembleSpec,
    problem_id: str,
) -> CandidatePool:
    """Assemble the candidate pool for one problem from ingested records.

    Records from models outside the ensemble, wrong problem ids, indices
    at or above n_outputs, and duplicate (model, index) pairs are errors.
    """
    members = {m.label: m for m in spec.members}
    seen: set[CandidateKey] = set()
    kept: list[GenerationRecord] = []
    for rec in records:
        if rec.problem_id != problem_id:
            raise DataError(
                f"record for problem {rec.problem_id!r} passed to pool "
                f"for {problem_id!r}"
            )
        member = members.get(rec.model.label)
        if member is None:
            raise DataError(
                f"model {rec.model.label!r} is not a member of ensemble {spec.name!r}"
            )
        if rec.model != member:
            raise DataError(
                f"model {rec.model.label!r} disagrees with ensemble member identity"
            )
        if rec.candidate_index >= spec.n_outputs:
            raise DataError(
                f"candidate_index {rec.candidate_index} out of range for "
                f"n_outputs={spec.n_outputs} ({rec.model.label!r})"
            )
        if rec.key in seen:
            raise DataError(f"duplicate candidate {rec.key} for problem {problem_id!r}")
        seen.add(rec.key)
        kept.append(rec)
    kept.sort(key=lambda r: r.key)
    return CandidatePool(problem_id=problem_id, spec=spec, candidates=tuple(kept))


class PlausibilityLabels:
    """Ground-truth plausibility per (problem, model, candidate).

    Lookups are strict: asking for an unlabeled key raises DataError.
    """

    def __init__(self, labels: Mapping[tuple[str, str, int], bool]):
        self._labels = dict(labels)

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, key: tuple[str, str, int]) -> bool:
        return key in self._labels

    def items(self):
        return self._labels.items()

    def is_plausible(self, problem_id: str, model_label: str, candidate_index: int) -> bool:
        key = (problem_id, model_label, candidate_index)
        try:
            return self._labels[key]
        except KeyError:
            raise DataError(f"no plausibility label for {key}") from None

    def model_labels(self) -> frozenset[str]:
        return frozenset(label for (_, label, _) in self._labels)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "PlausibilityLabels":
        """Load labels from CSV with header problem_id,model,candidate_index,plausible."""
        import csv

        expected = ["problem_id", "model", "candidate_index", "plausible"]
        labels: dict[tuple[str, str, int], bool] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"empty labels file {path}") from None
            if header != expected:
                raise DataError(
                    f"bad labels header {header!r} in {path}, expected {expected!r}"
                )
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 4:
                    raise DataError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
                pid, label, idx_s, plaus_s = row
                try:
                    idx = int(idx_s)
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: candidate_index {idx_s!r} is not an integer"
                    ) from None
                if plaus_s not in ("0", "1"):
                    raise DataError(f"{path}:{lineno}: plausible must be 0 or 1, got {plaus_s!r}")
                key = (pid, label, idx)
                if key in labels:
                    raise DataError(f"{path}:{lineno}: duplicate label for {key}")
                labels[key] = plaus_s == "1"
        return cls(labels)

    def to_csv(self, path: Union[str, Path]) -> None:
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["problem_id", "model", "candidate_index", "plausible"])
            for (pid, label, idx), plaus in sorted(self._labels.items()):
                writer.writerow([pid, label, idx, "1" if plaus else "0"])


@dataclass(frozen=True)
class RecordFormat:
    """How to interpret raw outputs during ingestion: the language of the
    extracted code and the task kind driving block selection."""

    language: str = "java"
    task: Optional[TaskKind] = None

    def effective_task(self) -> TaskKind:
        if self.task is not None:
            return self.task
        return TaskKind.REPAIR if self.language == "java" else TaskKind.GENERATE


def _trace_from_json(obj: dict, where: str) -> TokenTrace:
    try:
        return TokenTrace(
            nlls=tuple(obj["token_nlls"]),
            entropies=tuple(obj["token_entropies"]),
            vocab_size=int(obj["vocab_size"]),
        )
    except KeyError as exc:
        raise DataError(f"{where}: trace missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise DataError(f"{where}: invalid trace: {exc}") from None


def _record_from_json(obj: dict, fmt: RecordFormat, where: str) -> GenerationRecord:
    required = [
        "problem_id",
        "model",
        "family",
        "size_class",
        "candidate_index",
        "raw_output",
        "token_nlls",
        "token_entropies",
        "vocab_size",
        "cross_traces",
    ]
    for field_name in required:
        if field_name not in obj:
            raise DataError(f"{where}: missing field {field_name!r}")
    try:
        size = SizeClass(obj["size_class"])
    except ValueError:
        raise DataError(
            f"{where}: size_class must be 'small' or 'large', got {obj['size_class']!r}"
        ) from None
    try:
        model = ModelId(label=obj["model"], family=obj["family"], size_class=size)
    except ValueError as exc:
        raise DataError(f"{where}: {exc}") from None

    trace = _trace_from_json(obj, where)

    if not isinstance(obj["cross_traces"], dict):
        raise DataError(f"{where}: cross_traces must be an object")
    cross: dict[str, TokenTrace] = {}
    for label, sub in obj["cross_traces"].items():
        cross[label] = _trace_from_json(sub, f"{where}: cross_traces[{label!r}]")

    raw = obj["raw_output"]
    if not isinstance(raw, str):
        raise DataError(f"{where}: raw_output must be a string")

    if "extracted_code" in obj and obj["extracted_code"] is not None:
        code = obj["extracted_code"]
        if not isinstance(code, str):
            raise DataError(f"{where}: extracted_code must be a string")
    else:
        code = extract_code(raw, fmt.language, fmt.effective_task())

    if obj.get("byte_len") is not None:
        declared = obj["byte_len"]
        if not isinstance(declared, int) or isinstance(declared, bool) or declared < 1:
            raise DataError(f"{where}: byte_len must be a positive integer")
        actual = None if code is None else len(code.encode("utf-8"))
        if declared != actual:
            raise DataError(
                f"{where}: declared byte_len {declared} does not match extracted "
                f"code ({actual} UTF-8 bytes)"
            )

    try:
        idx = int(obj["candidate_index"])
    except (TypeError, ValueError):
        raise DataError(f"{where}: candidate_index must be an integer") from None

    try:
        return GenerationRecord(
            problem_id=obj["problem_id"],
            model=model,
            candidate_index=idx,
            raw_output=raw,
            trace=trace,
            cross_traces=cross,
            extracted_code=code,
        )
    except ValueError as exc:
        raise DataError(f"{where}: {exc}") from None


def ingest_records(
    path: Union[str, Path],
    fmt: RecordFormat = RecordFormat(),
) -> list[GenerationRecord]:
    """Read generation records from a JSONL file.

    Records lacking `extracted_code` get it recovered from `raw_output`
    according to `fmt`. Malformed lines raise DataError naming the line.
    """
    records: list[GenerationRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{where}: invalid JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise DataError(f"{where}: record must be a JSON object")
            records.append(_record_from_json(obj, fmt, where))
    return records


def write_records(records: Sequence[GenerationRecord], path: Union[str, Path]) -> None:
    """Serialize records to JSONL in the shape `ingest_records` reads."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            if rec.trace is None:
                raise DataError(f"record {rec.key} for {rec.problem_id!r} has no trace")
            obj: dict = {
                "problem_id": rec.problem_id,
                "model": rec.model.label,
                "family": rec.model.family,
                "size_class": rec.model.size_class.value,
                "candidate_index": rec.candidate_index,
                "raw_output": rec.raw_output,
                "token_nlls": list(rec.trace.nlls),
                "token_entropies": list(rec.trace.entropies),
                "vocab_size": rec.trace.vocab_size,
                "cross_traces": {
                    label: {
                        "token_nlls": list(t.nlls),
                        "token_entropies": list(t.entropies),
                        "vocab_size": t.vocab_size,
                    }
                    for label, t in sorted(rec.cross_traces.items())
                },
            }
            if rec.extracted_code is not None:
                obj["extracted_code"] = rec.extracted_code
                if rec.extracted_code:
                    obj["byte_len"] = len(rec.extracted_code.encode("utf-8"))
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
