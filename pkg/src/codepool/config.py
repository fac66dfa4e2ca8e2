"""Declarative run configuration for the batch pipeline."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import yaml

from .errors import UsageError

__all__ = [
    "EnsembleConfig",
    "PairSweepConfig",
    "RunConfig",
    "load_config",
    "METRIC_NAMES",
    "STRATEGY_NAMES",
]

METRIC_NAMES = (
    "codebleu",
    "bertscore_f3",
    "nll_per_byte",
    "entropy_per_byte",
    "sum_entropy_norm",
)
STRATEGY_NAMES = ("highest", "lowest", "diverse")
_BASELINES = ("best_single", "naive")


@dataclass(frozen=True)
class EnsembleConfig:
    name: str
    members: tuple[str, ...]
    n_outputs: int = 10
    k: int = 10

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        if not self.name:
            raise UsageError("ensemble name must be non-empty")
        if not self.members:
            raise UsageError(f"ensemble {self.name!r} has no members")
        if len(set(self.members)) != len(self.members):
            raise UsageError(f"ensemble {self.name!r} repeats a member")
        if self.n_outputs < 1 or self.k < 1:
            raise UsageError(f"ensemble {self.name!r}: k and n_outputs must be positive")


@dataclass(frozen=True)
class PairSweepConfig:
    """One pair-sweep report: heuristic is 'naive' or '<metric>:<strategy>'."""

    heuristic: str
    baseline: str = "best_single"

    def __post_init__(self) -> None:
        if self.baseline not in _BASELINES:
            raise UsageError(
                f"pair sweep baseline must be one of {_BASELINES}, got {self.baseline!r}"
            )
        if self.heuristic == "naive":
            return
        parts = self.heuristic.split(":")
        if len(parts) != 2 or parts[0] not in METRIC_NAMES or parts[1] not in STRATEGY_NAMES:
            raise UsageError(
                f"pair sweep heuristic must be 'naive' or '<metric>:<strategy>', "
                f"got {self.heuristic!r}"
            )

    @property
    def file_stem(self) -> str:
        return "pairs_" + self.heuristic.replace(":", "_")


@dataclass(frozen=True)
class RunConfig:
    records: Path
    labels: Path
    out_dir: Path
    ensembles: tuple[EnsembleConfig, ...]
    embeddings: Optional[Path] = None
    embedding_dim: int = 64
    language: str = "java"
    task: Optional[str] = None
    metrics: tuple[str, ...] = METRIC_NAMES
    strategies: tuple[str, ...] = STRATEGY_NAMES
    pair_sweeps: tuple[PairSweepConfig, ...] = ()
    pair_k: int = 10
    jobs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "ensembles", tuple(self.ensembles))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        object.__setattr__(self, "strategies", tuple(self.strategies))
        object.__setattr__(self, "pair_sweeps", tuple(self.pair_sweeps))
        if not self.ensembles:
            raise UsageError("config must define at least one ensemble")
        names = [e.name for e in self.ensembles]
        if len(set(names)) != len(names):
            raise UsageError("ensemble names must be unique")
        for m in self.metrics:
            if m not in METRIC_NAMES:
                raise UsageError(f"unknown metric {m!r} (known: {', '.join(METRIC_NAMES)})")
        for s in self.strategies:
            if s not in STRATEGY_NAMES:
                raise UsageError(
                    f"unknown strategy {s!r} (known: {', '.join(STRATEGY_NAMES)})"
                )
        if self.language not in ("java", "python"):
            raise UsageError(f"unsupported language {self.language!r}")
        if self.task is not None and self.task not in ("repair", "generate"):
            raise UsageError(f"task must be 'repair' or 'generate', got {self.task!r}")
        if self.jobs < 1:
            raise UsageError("jobs must be positive")
        if self.embedding_dim < 1:
            raise UsageError("embedding_dim must be positive")
        if self.pair_k < 1:
            raise UsageError("pair_k must be positive")


_KNOWN_KEYS = {
    "records",
    "labels",
    "out_dir",
    "ensembles",
    "embeddings",
    "embedding_dim",
    "language",
    "task",
    "metrics",
    "strategies",
    "pair_sweeps",
    "pair_k",
    "jobs",
}


def _require(data: dict, key: str, path) -> object:
    if key not in data:
        raise UsageError(f"{path}: config is missing required key {key!r}")
    return data[key]


def load_config(path) -> RunConfig:
    """Parse a YAML run configuration.

    Relative input and output paths resolve against the config file's
    directory.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise UsageError(f"{path}: invalid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}: config must be a mapping")
    unknown = sorted(set(data) - _KNOWN_KEYS)
    if unknown:
        raise UsageError(f"{path}: unknown config keys: {', '.join(unknown)}")

    base = path.parent

    def _path(v) -> Path:
        p = Path(str(v))
        return p if p.is_absolute() else base / p

    raw_ensembles = _require(data, "ensembles", path)
    if not isinstance(raw_ensembles, list):
        raise UsageError(f"{path}: ensembles must be a list")
    ensembles = []
    for ent in raw_ensembles:
        if not isinstance(ent, dict) or "name" not in ent or "members" not in ent:
            raise UsageError(f"{path}: each ensemble needs 'name' and 'members'")
        ensembles.append(
            EnsembleConfig(
                name=str(ent["name"]),
                members=tuple(str(m) for m in ent["members"]),
                n_outputs=int(ent.get("n_outputs", 10)),
                k=int(ent.get("k", 10)),
            )
        )

    sweeps = []
    for ent in data.get("pair_sweeps") or []:
        if not isinstance(ent, dict) or "heuristic" not in ent:
            raise UsageError(f"{path}: each pair sweep needs a 'heuristic'")
        sweeps.append(
            PairSweepConfig(
                heuristic=str(ent["heuristic"]),
                baseline=str(ent.get("baseline", "best_single")),
            )
        )

    embeddings = data.get("embeddings")
    return RunConfig(
        records=_path(_require(data, "records", path)),
        labels=_path(_require(data, "labels", path)),
        out_dir=_path(data.get("out_dir", "out")),
        ensembles=tuple(ensembles),
        embeddings=_path(embeddings) if embeddings else None,
        embedding_dim=int(data.get("embedding_dim", 64)),
        language=str(data.get("language", "java")),
        task=str(data["task"]) if data.get("task") else None,
        metrics=tuple(data.get("metrics", METRIC_NAMES)),
        strategies=tuple(data.get("strategies", STRATEGY_NAMES)),
        pair_sweeps=tuple(sweeps),
        pair_k=int(data.get("pair_k", 10)),
        jobs=int(data.get("jobs", 1)),
    )


def apply_overrides(
    config: RunConfig,
    out: Optional[str] = None,
    jobs: Optional[int] = None,
    ensembles: Optional[Sequence[str]] = None,
    metrics: Optional[Sequence[str]] = None,
    strategies: Optional[Sequence[str]] = None,
) -> RunConfig:
    """Narrow or redirect a loaded config from CLI flags."""
    if out is not None:
        config = replace(config, out_dir=Path(out))
    if jobs is not None:
        config = replace(config, jobs=jobs)
    if ensembles:
        known = {e.name: e for e in config.ensembles}
        missing = [n for n in ensembles if n not in known]
        if missing:
            raise UsageError(f"unknown ensemble names: {', '.join(missing)}")
        config = replace(config, ensembles=tuple(known[n] for n in ensembles))
    if metrics:
        for m in metrics:
            if m not in config.metrics:
                raise UsageError(f"metric {m!r} is not in the configured metric list")
        config = replace(config, metrics=tuple(metrics))
    if strategies:
        chosen = []
        for s in strategies:
            if s == "naive":
                continue  # naive always runs; it is not a scored strategy
            if s not in config.strategies:
                raise UsageError(f"strategy {s!r} is not in the configured strategy list")
            chosen.append(s)
        config = replace(config, strategies=tuple(chosen))
    return config
