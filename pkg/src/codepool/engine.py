"""Pipeline stages behind the CLI: score, select, report.

Stages hand data to each other through plain files under the output
directory, so each can be rerun or inspected on its own:

    scores/<ensemble>/problems/<problem>.csv      per-candidate scores
    scores/<ensemble>/pairwise_<metric>/<problem>.csv   similarity matrices
    selections/<ensemble>__<metric>__<strategy>.csv
    reports/*.csv

All artifacts are byte-deterministic for a given config and input files,
independent of the parallelism degree: workers only compute, the parent
writes everything in sorted order, and floats are serialized with repr.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence
from urllib.parse import quote

from .analyze import (
    PairBaseline,
    PairDelta,
    fai_z,
    hard_problems,
    pair_sweep,
    solved_set,
    strategy_table,
    theoretical_max,
    unique_contributions,
)
from .config import PairSweepConfig, RunConfig
from .confmetrics import ConfidenceMetric, cross_model_sum
from .errors import DataError
from .extract import TaskKind
from .model import (
    CandidateKey,
    CandidatePool,
    EnsembleSpec,
    GenerationRecord,
    ModelId,
    PlausibilityLabels,
    RecordFormat,
    SizeClass,
    build_pool,
    ingest_records,
)
from .select import (
    Direction,
    MetricFamily,
    ScoredPool,
    Selection,
    Strategy,
    distance_for,
    select_diverse,
    select_highest,
    select_lowest,
    select_naive,
)
from .simmetrics import (
    CodeBleuConfig,
    CodeBleuPairScorer,
    EmbeddingPairScorer,
    HashingEmbedder,
    TableEmbedder,
    pairwise_matrix,
)

__all__ = ["MetricInfo", "METRICS", "Engine"]


@dataclass(frozen=True)
class MetricInfo:
    name: str
    family: MetricFamily
    direction: Direction


METRICS = {
    "codebleu": MetricInfo("codebleu", MetricFamily.OUTPUT, Direction.HIGHER_IS_CONSENSUS),
    "bertscore_f3": MetricInfo(
        "bertscore_f3", MetricFamily.OUTPUT, Direction.HIGHER_IS_CONSENSUS
    ),
    "nll_per_byte": MetricInfo(
        "nll_per_byte", MetricFamily.CONFIDENCE, Direction.LOWER_IS_CONSENSUS
    ),
    "entropy_per_byte": MetricInfo(
        "entropy_per_byte", MetricFamily.CONFIDENCE, Direction.LOWER_IS_CONSENSUS
    ),
    "sum_entropy_norm": MetricInfo(
        "sum_entropy_norm", MetricFamily.CONFIDENCE, Direction.LOWER_IS_CONSENSUS
    ),
}

_STRATEGY_FNS = {
    "highest": select_highest,
    "lowest": select_lowest,
}


def _fsname(name: str) -> str:
    return quote(name, safe="")


def _row_sums(keys: Sequence[CandidateKey], matrix) -> dict[CandidateKey, float]:
    """Left-to-right row sums skipping the diagonal, matching the summation
    order of pairwise_sum_scores bit for bit."""
    sums: dict[CandidateKey, float] = {}
    for i, key in enumerate(keys):
        acc = 0.0
        for j in range(len(keys)):
            if j != i:
                acc += float(matrix[i, j])
        sums[key] = acc
    return sums


# ---------------------------------------------------------------------------
# per-problem scoring, shaped for process-pool workers


@dataclass(frozen=True)
class _ScoreTask:
    """Everything a worker needs; built once and shipped via the pool
    initializer so per-problem submissions stay small."""

    specs: tuple[EnsembleSpec, ...]
    metrics: tuple[str, ...]
    language: str
    embed_spec: tuple  # ("hashing", dim) or ("table", path-str)


@dataclass(frozen=True)
class _ProblemScores:
    problem_id: str
    # ensemble name -> list of (key, scoreable, {metric: value})
    rows: dict
    # (ensemble name, metric) -> (keys, list of row tuples)
    matrices: dict


_TASK: Optional[_ScoreTask] = None
_SCORERS: Optional[dict] = None


def _init_score_worker(task: _ScoreTask) -> None:
    global _TASK, _SCORERS
    _TASK = task
    _SCORERS = None


def _build_scorers(task: _ScoreTask) -> dict:
    scorers: dict = {}
    for name in task.metrics:
        info = METRICS[name]
        if info.family is not MetricFamily.OUTPUT:
            continue
        if name == "codebleu":
            scorers[name] = CodeBleuPairScorer(CodeBleuConfig(language=task.language))
        else:
            kind = task.embed_spec[0]
            if kind == "hashing":
                embedder = HashingEmbedder(dim=task.embed_spec[1])
            else:
                embedder = TableEmbedder.load(task.embed_spec[1])
            scorers[name] = EmbeddingPairScorer(embedder, task.language)
    return scorers


def _score_problem(item: tuple[str, tuple[GenerationRecord, ...]]) -> _ProblemScores:
    global _SCORERS
    task = _TASK
    if _SCORERS is None:
        _SCORERS = _build_scorers(task)
    pid, records = item
    rows: dict = {}
    matrices: dict = {}
    for spec in task.specs:
        member_labels = set(spec.labels)
        mine = [r for r in records if r.model.label in member_labels]
        pool = build_pool(mine, spec, pid)

        sums_by_metric: dict[str, dict[CandidateKey, float]] = {}
        for name in task.metrics:
            info = METRICS[name]
            if info.family is MetricFamily.OUTPUT:
                keys, matrix = pairwise_matrix(pool, _SCORERS[name])
                matrices[(spec.name, name)] = (
                    list(keys),
                    [tuple(float(x) for x in matrix[i]) for i in range(len(keys))],
                )
                sums_by_metric[name] = _row_sums(keys, matrix)
            else:
                metric = ConfidenceMetric(name)
                sums_by_metric[name] = {
                    rec.key: cross_model_sum(rec, metric, spec)
                    for rec in pool.scoreable
                }

        pool_rows = []
        for rec in pool:
            values = {
                name: sums_by_metric[name].get(rec.key) for name in task.metrics
            }
            pool_rows.append((rec.key, rec.scoreable, values))
        rows[spec.name] = pool_rows
    return _ProblemScores(problem_id=pid, rows=rows, matrices=matrices)


# ---------------------------------------------------------------------------


class Engine:
    """Loads inputs once, then runs any subset of the pipeline stages."""

    def __init__(self, config: RunConfig):
        self.config = config
        fmt = RecordFormat(
            language=config.language,
            task=TaskKind(config.task) if config.task else None,
        )
        self.records = ingest_records(config.records, fmt)
        if not self.records:
            raise DataError(f"{config.records}: no records")
        self.registry = self._build_registry(self.records)
        self.specs = tuple(
            EnsembleSpec(
                name=e.name,
                members=tuple(self._resolve(label) for label in e.members),
                n_outputs=e.n_outputs,
                k=e.k,
            )
            for e in config.ensembles
        )
        by_problem: dict[str, list[GenerationRecord]] = {}
        for rec in self.records:
            by_problem.setdefault(rec.problem_id, []).append(rec)
        self.problems = {pid: tuple(recs) for pid, recs in sorted(by_problem.items())}

    @staticmethod
    def _build_registry(records: Iterable[GenerationRecord]) -> dict[str, ModelId]:
        registry: dict[str, ModelId] = {}
        for rec in records:
            model = rec.model
            prior = registry.get(model.label)
            if prior is None:
                registry[model.label] = model
            elif prior != model:
                raise DataError(
                    f"model {model.label!r} appears with conflicting identities"
                )
        return registry

    def _resolve(self, label: str) -> ModelId:
        model = self.registry.get(label)
        if model is None:
            raise DataError(f"configured model {label!r} has no records")
        return model

    @property
    def universe(self) -> tuple[ModelId, ...]:
        """Union of all configured ensembles' members, sorted by label."""
        seen: dict[str, ModelId] = {}
        for spec in self.specs:
            for m in spec.members:
                seen[m.label] = m
        return tuple(seen[label] for label in sorted(seen))

    # -- pools ------------------------------------------------------------

    def pool_for(self, spec: EnsembleSpec, pid: str) -> CandidatePool:
        member_labels = set(spec.labels)
        mine = [r for r in self.problems[pid] if r.model.label in member_labels]
        return build_pool(mine, spec, pid)

    def _universe_spec(self) -> EnsembleSpec:
        n = max(s.n_outputs for s in self.specs)
        return EnsembleSpec(name="universe", members=self.universe, n_outputs=n, k=1)

    # -- score stage -------------------------------------------------------

    def _embed_spec(self) -> tuple:
        if self.config.embeddings is not None:
            return ("table", str(self.config.embeddings))
        return ("hashing", self.config.embedding_dim)

    def _map_problems(self, worker, init, task, items: list):
        """Run worker over items, inline or in a process pool; results are
        returned in submission order either way."""
        if self.config.jobs == 1:
            init(task)
            return [worker(item) for item in items]
        with ProcessPoolExecutor(
            max_workers=self.config.jobs,
            initializer=init,
            initargs=(task,),
        ) as pool:
            return list(pool.map(worker, items))

    def cmd_score(self) -> None:
        """Write per-problem score tables and similarity matrices."""
        task = _ScoreTask(
            specs=self.specs,
            metrics=tuple(self.config.metrics),
            language=self.config.language,
            embed_spec=self._embed_spec(),
        )
        items = list(self.problems.items())
        results = self._map_problems(_score_problem, _init_score_worker, task, items)

        out = Path(self.config.out_dir)
        for spec in self.specs:
            (out / "scores" / _fsname(spec.name) / "problems").mkdir(
                parents=True, exist_ok=True
            )
            for name in self.config.metrics:
                if METRICS[name].family is MetricFamily.OUTPUT:
                    (out / "scores" / _fsname(spec.name) / f"pairwise_{name}").mkdir(
                        parents=True, exist_ok=True
                    )

        for res in results:
            pid_name = _fsname(res.problem_id) + ".csv"
            for spec in self.specs:
                score_path = out / "scores" / _fsname(spec.name) / "problems" / pid_name
                with open(score_path, "w", newline="", encoding="utf-8") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(
                        ["model", "candidate_index", "scoreable", *self.config.metrics]
                    )
                    for key, scoreable, values in res.rows[spec.name]:
                        row = [key[0], key[1], "1" if scoreable else "0"]
                        for name in self.config.metrics:
                            v = values[name]
                            row.append("" if v is None else repr(v))
                        writer.writerow(row)
                for name in self.config.metrics:
                    if METRICS[name].family is not MetricFamily.OUTPUT:
                        continue
                    keys, rows = res.matrices[(spec.name, name)]
                    matrix_path = (
                        out / "scores" / _fsname(spec.name) / f"pairwise_{name}" / pid_name
                    )
                    with open(matrix_path, "w", newline="", encoding="utf-8") as fh:
                        writer = csv.writer(fh)
                        writer.writerow(
                            ["model", "candidate_index"]
                            + [f"c{i}" for i in range(len(keys))]
                        )
                        for key, row in zip(keys, rows):
                            writer.writerow([key[0], key[1], *[repr(x) for x in row]])

    # -- select stage --------------------------------------------------

    def _read_scores(
        self, spec: EnsembleSpec, pid: str, metric: str
    ) -> dict[CandidateKey, float]:
        path = (
            Path(self.config.out_dir)
            / "scores"
            / _fsname(spec.name)
            / "problems"
            / (_fsname(pid) + ".csv")
        )
        if not path.exists():
            raise DataError(
                f"no scores for metric {metric!r}: {path} is missing; "
                f"run the score stage first"
            )
        scores: dict[CandidateKey, float] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if metric not in header:
                raise DataError(f"no scores for metric {metric!r} in {path}")
            col = header.index(metric)
            for row in reader:
                if row[col] == "":
                    continue
                scores[(row[0], int(row[1]))] = float(row[col])
        return scores

    def _read_matrix(
        self, spec: EnsembleSpec, pid: str, metric: str
    ) -> tuple[dict[CandidateKey, int], list[list[float]]]:
        path = (
            Path(self.config.out_dir)
            / "scores"
            / _fsname(spec.name)
            / f"pairwise_{metric}"
            / (_fsname(pid) + ".csv")
        )
        if not path.exists():
            raise DataError(
                f"no scores for metric {metric!r}: {path} is missing; "
                f"run the score stage first"
            )
        index: dict[CandidateKey, int] = {}
        rows: list[list[float]] = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            next(reader)
            for i, row in enumerate(reader):
                index[(row[0], int(row[1]))] = i
                rows.append([float(x) for x in row[2:]])
        return index, rows

    def _diverse_distance(self, spec: EnsembleSpec, pid: str, metric: str, scores):
        info = METRICS[metric]
        if info.family is MetricFamily.CONFIDENCE:
            return distance_for(MetricFamily.CONFIDENCE, scores=scores)
        index, rows = self._read_matrix(spec, pid, metric)

        def pair_metric(a: GenerationRecord, b: GenerationRecord) -> float:
            return rows[index[a.key]][index[b.key]]

        return distance_for(MetricFamily.OUTPUT, pair_metric=pair_metric)

    def _selection_path(self, ens_name: str, metric: str, strategy: str) -> Path:
        stem = f"{_fsname(ens_name)}__{_fsname(metric)}__{_fsname(strategy)}.csv"
        return Path(self.config.out_dir) / "selections" / stem

    def _write_selections(self, path: Path, selections: Sequence[Selection]) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["problem_id", "rank", "model", "candidate_index"])
            for sel in selections:
                for rank, (label, idx) in enumerate(sel.members):
                    writer.writerow([sel.problem_id, rank, label, idx])

    def cmd_select(self) -> None:
        """Write one selections file per (ensemble, metric, strategy) and a
        naive one per ensemble."""
        for spec in self.specs:
            for metric in self.config.metrics:
                info = METRICS[metric]
                for strategy in self.config.strategies:
                    selections = []
                    for pid in self.problems:
                        pool = self.pool_for(spec, pid)
                        scores = self._read_scores(spec, pid, metric)
                        sp = ScoredPool(pool, scores, info.direction)
                        if strategy == "diverse":
                            dist = self._diverse_distance(spec, pid, metric, scores)
                            sel = select_diverse(sp, dist, spec.k)
                        else:
                            sel = _STRATEGY_FNS[strategy](sp, spec.k)
                        selections.append(sel)
                    self._write_selections(
                        self._selection_path(spec.name, metric, strategy), selections
                    )
            naive = [
                select_naive(self.pool_for(spec, pid), spec, spec.k)
                for pid in self.problems
            ]
            self._write_selections(
                self._selection_path(spec.name, "naive", "naive"), naive
            )

    def _read_selections(self, ens_name: str, metric: str, strategy: str) -> list[Selection]:
        path = self._selection_path(ens_name, metric, strategy)
        if not path.exists():
            raise DataError(f"{path} is missing; run the select stage first")
        strat = Strategy.NAIVE if strategy == "naive" else Strategy(strategy)
        grouped: dict[str, list[CandidateKey]] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            next(reader)
            for row in reader:
                grouped.setdefault(row[0], []).append((row[2], int(row[3])))
        return [
            Selection(pid, strat, tuple(members))
            for pid, members in sorted(grouped.items())
        ]

    # -- report stage ---------------------------------------------------

    def _check_label_coverage(self, labels: PlausibilityLabels) -> None:
        universe_labels = {m.label for m in self.universe}
        missing = []
        for rec in self.records:
            if rec.model.label not in universe_labels:
                continue
            key = (rec.problem_id, rec.model.label, rec.candidate_index)
            if key not in labels:
                missing.append(key)
        if missing:
            missing.sort()
            shown = ", ".join(map(str, missing[:10]))
            more = f" and {len(missing) - 10} more" if len(missing) > 10 else ""
            raise DataError(f"labels missing for: {shown}{more}")

    def _pair_selections(
        self, sweep: PairSweepConfig
    ) -> dict[tuple[str, str], list[Selection]]:
        """Per unordered pair (a < b), the heuristic's selections on every
        problem's two-model pool."""
        universe = self.universe
        uspec = self._universe_spec()
        pair_k = min(self.config.pair_k, 2 * uspec.n_outputs)
        if sweep.heuristic == "naive":
            metric = strategy = None
        else:
            metric, strategy = sweep.heuristic.split(":")
            info = METRICS[metric]

        out: dict[tuple[str, str], list[Selection]] = {}
        pairs = [
            (universe[i], universe[j])
            for i in range(len(universe))
            for j in range(i + 1, len(universe))
        ]
        for ma, mb in pairs:
            out[(ma.label, mb.label)] = []

        for pid in self.problems:
            matrix_cache: Optional[tuple[dict, list]] = None
            if metric and info.family is MetricFamily.OUTPUT:
                upool = self.pool_for(uspec, pid)
                task = _ScoreTask(
                    specs=(uspec,),
                    metrics=(metric,),
                    language=self.config.language,
                    embed_spec=self._embed_spec(),
                )
                scorers = _build_scorers(task)
                keys, matrix = pairwise_matrix(upool, scorers[metric])
                matrix_cache = (
                    {key: i for i, key in enumerate(keys)},
                    matrix,
                )
            for ma, mb in pairs:
                spec = EnsembleSpec(
                    name=f"{ma.label}+{mb.label}",
                    members=(ma, mb),
                    n_outputs=uspec.n_outputs,
                    k=pair_k,
                )
                pool = self.pool_for(spec, pid)
                if sweep.heuristic == "naive":
                    sel = select_naive(pool, spec, pair_k)
                else:
                    if info.family is MetricFamily.OUTPUT:
                        index, matrix = matrix_cache
                        skeys = [rec.key for rec in pool.scoreable]
                        scores = {}
                        for key in skeys:
                            acc = 0.0
                            for other in skeys:
                                if other != key:
                                    acc += float(matrix[index[key], index[other]])
                            scores[key] = acc

                        def pair_metric(a, b, _index=index, _matrix=matrix):
                            return float(_matrix[_index[a.key], _index[b.key]])

                        dist = distance_for(MetricFamily.OUTPUT, pair_metric=pair_metric)
                    else:
                        conf = ConfidenceMetric(metric)
                        scores = {
                            rec.key: cross_model_sum(rec, conf, spec)
                            for rec in pool.scoreable
                        }
                        dist = distance_for(MetricFamily.CONFIDENCE, scores=scores)
                    sp = ScoredPool(pool, scores, info.direction)
                    if strategy == "diverse":
                        sel = select_diverse(sp, dist, pair_k)
                    else:
                        sel = _STRATEGY_FNS[strategy](sp, pair_k)
                out[(ma.label, mb.label)].append(sel)
        return out

    def cmd_report(self) -> None:
        """Write the analysis CSVs from labels and the selection files."""
        labels = PlausibilityLabels.from_csv(self.config.labels)
        self._check_label_coverage(labels)
        out = Path(self.config.out_dir) / "reports"
        out.mkdir(parents=True, exist_ok=True)

        # strategy table
        cells_input: dict[tuple[str, str, str], list[Selection]] = {}
        for spec in self.specs:
            for metric in self.config.metrics:
                for strategy in self.config.strategies:
                    cells_input[(spec.name, metric, strategy)] = self._read_selections(
                        spec.name, metric, strategy
                    )
            cells_input[(spec.name, "naive", "naive")] = self._read_selections(
                spec.name, "naive", "naive"
            )
        ensembles = [(spec.name, list(spec.members)) for spec in self.specs]
        cells = strategy_table(ensembles, cells_input, labels)
        with open(out / "strategy_table.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["ensemble", "metric", "strategy", "solved"])
            for cell in cells:
                writer.writerow([cell.ensemble, cell.metric, cell.strategy, cell.solved])

        # theoretical max and best single member
        with open(out / "theoretical_max.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["ensemble", "best_model", "best_single", "theoretical_max"])
            for spec in self.specs:
                counts = {
                    m.label: len(solved_set(labels, m).problems) for m in spec.members
                }
                best_label = min(counts, key=lambda lab: (-counts[lab], lab))
                writer.writerow(
                    [
                        spec.name,
                        best_label,
                        counts[best_label],
                        theoretical_max(list(spec.members), labels),
                    ]
                )

        # unique contributions and full solved sets
        with open(out / "unique.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["ensemble", "model", "unique_solved"])
            for spec in self.specs:
                if len(spec.members) < 2:
                    continue
                unique = unique_contributions(list(spec.members), labels)
                for m in spec.members:
                    writer.writerow([spec.name, m.label, unique[m.label]])

        with open(out / "solved_sets.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["ensemble", "model", "problem_id"])
            for spec in self.specs:
                for m in spec.members:
                    solved = solved_set(labels, m)
                    for pid in sorted(solved.problems):
                        writer.writerow([spec.name, m.label, pid])

        self._write_fai(labels, out)

        for sweep in self.config.pair_sweeps:
            deltas = self._sweep_deltas(sweep, labels)
            with open(
                out / f"{sweep.file_stem}.csv", "w", newline="", encoding="utf-8"
            ) as fh:
                writer = csv.writer(fh)
                writer.writerow(["model_a", "model_b", "delta"])
                for d in deltas:
                    writer.writerow([d.model_a, d.model_b, d.delta])

    def _write_fai(self, labels: PlausibilityLabels, out: Path) -> None:
        universe = self.universe
        smalls = [m for m in universe if m.size_class is SizeClass.SMALL]
        larges = [m for m in universe if m.size_class is SizeClass.LARGE]
        families: dict[str, dict[SizeClass, ModelId]] = {}
        for m in universe:
            families.setdefault(m.family, {})[m.size_class] = m

        with open(out / "fai.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["family", "p_L", "mu", "sigma", "fai_z"])
            if len(smalls) < 2:
                return
            hard = hard_problems(smalls, labels)
            for family in sorted(families):
                pair = families[family]
                if SizeClass.SMALL not in pair or SizeClass.LARGE not in pair:
                    continue
                small, large = pair[SizeClass.SMALL], pair[SizeClass.LARGE]
                other_large = [m for m in larges if m.label != large.label]
                if not other_large:
                    continue
                try:
                    stats = fai_z((small, large), other_large, labels, hard)
                except DataError:
                    writer.writerow([family, "n/a", "n/a", "n/a", "n/a"])
                    continue
                z = "n/a" if stats.fai_z is None else repr(stats.fai_z)
                writer.writerow(
                    [family, repr(stats.p_l), repr(stats.mu), repr(stats.sigma), z]
                )

    def _sweep_deltas(self, sweep: PairSweepConfig, labels) -> list[PairDelta]:
        selections = self._pair_selections(sweep)
        if sweep.baseline == "naive" and sweep.heuristic != "naive":
            naive_selections = self._pair_selections(
                PairSweepConfig(heuristic="naive", baseline="best_single")
            )
        else:
            naive_selections = selections

        def selector(pair: tuple[ModelId, ModelId]):
            return selections[(pair[0].label, pair[1].label)]

        def naive_selector(pair: tuple[ModelId, ModelId]):
            return naive_selections[(pair[0].label, pair[1].label)]

        baseline = PairBaseline(sweep.baseline)
        return pair_sweep(
            list(self.universe),
            labels,
            selector,
            baseline=baseline,
            naive_selector=naive_selector,
        )

    def cmd_all(self) -> None:
        self.cmd_score()
        self.cmd_select()
        self.cmd_report()
