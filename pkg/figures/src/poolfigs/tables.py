"""Readers for the report tables the figures consume.

Both readers validate the exact column sets the report stage writes and
fail loudly on anything else, so a schema drift upstream surfaces here
rather than as a silently wrong figure.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .errors import DataError

__all__ = [
    "PairTable",
    "EnsembleSets",
    "read_pair_table",
    "read_contribution_sets",
]

PathLike = Union[str, Path]


def _check_header(fieldnames, expected: list[str], path: Path) -> None:
    got = list(fieldnames or [])
    missing = [c for c in expected if c not in got]
    extra = [c for c in got if c not in expected]
    if missing:
        raise DataError(f"{path}: missing column(s) {missing}")
    if extra:
        raise DataError(f"{path}: unexpected column(s) {extra}")
    if len(got) != len(set(got)):
        raise DataError(f"{path}: duplicate column in header")


@dataclass(frozen=True)
class PairTable:
    """Unordered pair deltas plus the sorted label axis they live on."""

    labels: tuple[str, ...]
    deltas: dict[tuple[str, str], int]  # keyed (a, b) with a < b


def read_pair_table(path: PathLike) -> PairTable:
    path = Path(path)
    deltas: dict[tuple[str, str], int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames, ["model_a", "model_b", "delta"], path)
        for line, row in enumerate(reader, start=2):
            a, b = row["model_a"], row["model_b"]
            if not a or not b:
                raise DataError(f"{path}:{line}: empty model label")
            if a == b:
                raise DataError(f"{path}:{line}: {a!r} paired with itself")
            key = (a, b) if a < b else (b, a)
            if key in deltas:
                raise DataError(
                    f"{path}:{line}: duplicate pair {key[0]!r}/{key[1]!r}"
                )
            try:
                deltas[key] = int(row["delta"])
            except (TypeError, ValueError):
                raise DataError(
                    f"{path}:{line}: delta {row['delta']!r} is not an integer"
                ) from None
    if not deltas:
        raise DataError(f"{path}: no pairs")
    labels = tuple(sorted({lab for key in deltas for lab in key}))
    for i, a in enumerate(labels):
        for b in labels[i + 1 :]:
            if (a, b) not in deltas:
                raise DataError(f"{path}: missing pair {a!r}/{b!r}")
    return PairTable(labels=labels, deltas=deltas)


@dataclass(frozen=True)
class EnsembleSets:
    """Per-model solved sets for one ensemble, members in roster order."""

    name: str
    members: tuple[str, ...]
    solved: dict[str, frozenset[str]]


def read_contribution_sets(
    unique_csv: PathLike, solved_csv: PathLike
) -> list[EnsembleSets]:
    """Join the unique-contributions roster with the solved-sets table.

    A model that solved nothing has no solved-sets rows, so membership
    comes from the roster and only the problem sets from the second file.
    The roster's unique_solved counts must agree with the exclusive region
    sizes implied by the sets; a mismatch means the two files came from
    different runs.
    """
    unique_csv, solved_csv = Path(unique_csv), Path(solved_csv)
    roster: dict[str, list[str]] = {}
    claimed: dict[tuple[str, str], int] = {}
    with open(unique_csv, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _check_header(
            reader.fieldnames, ["ensemble", "model", "unique_solved"], unique_csv
        )
        for line, row in enumerate(reader, start=2):
            ens, mod = row["ensemble"], row["model"]
            if not ens or not mod:
                raise DataError(f"{unique_csv}:{line}: empty ensemble or model")
            if (ens, mod) in claimed:
                raise DataError(
                    f"{unique_csv}:{line}: duplicate row for {mod!r} in {ens!r}"
                )
            try:
                claimed[(ens, mod)] = int(row["unique_solved"])
            except (TypeError, ValueError):
                raise DataError(
                    f"{unique_csv}:{line}: unique_solved "
                    f"{row['unique_solved']!r} is not an integer"
                ) from None
            roster.setdefault(ens, []).append(mod)
    if not roster:
        raise DataError(f"{unique_csv}: no ensembles")

    solved: dict[tuple[str, str], set[str]] = {}
    with open(solved_csv, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _check_header(
            reader.fieldnames, ["ensemble", "model", "problem_id"], solved_csv
        )
        for line, row in enumerate(reader, start=2):
            ens, mod, pid = row["ensemble"], row["model"], row["problem_id"]
            if ens not in roster:
                # single-model ensembles have solved sets but no roster
                # rows and no contribution diagram
                continue
            if mod not in roster[ens]:
                raise DataError(
                    f"{solved_csv}:{line}: model {mod!r} is not in "
                    f"ensemble {ens!r}"
                )
            if not pid:
                raise DataError(f"{solved_csv}:{line}: empty problem_id")
            solved.setdefault((ens, mod), set()).add(pid)

    out = []
    for ens, members in roster.items():
        sets = {m: frozenset(solved.get((ens, m), set())) for m in members}
        for m in members:
            exclusive = set(sets[m])
            for other in members:
                if other != m:
                    exclusive -= sets[other]
            if len(exclusive) != claimed[(ens, m)]:
                raise DataError(
                    f"{unique_csv} and {solved_csv} disagree for {m!r} in "
                    f"{ens!r}: unique_solved {claimed[(ens, m)]} vs "
                    f"{len(exclusive)} exclusive problems"
                )
        out.append(EnsembleSets(name=ens, members=tuple(members), solved=sets))
    return out
