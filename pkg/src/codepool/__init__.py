"""Batch engine for scoring, selecting and analyzing candidate pools
produced by ensembles of code models."""

from .analyze import (
    FamilyStats,
    PairBaseline,
    PairDelta,
    SolvedSet,
    StrategyCell,
    fai_z,
    hard_problems,
    pair_sweep,
    solved_set,
    strategy_table,
    theoretical_max,
    unique_contributions,
)
from .config import EnsembleConfig, PairSweepConfig, RunConfig, load_config
from .confmetrics import (
    ConfidenceMetric,
    ConfidenceScore,
    cross_model_sum,
    entropy_per_byte,
    nll_per_byte,
    sum_entropy_norm,
)
from .errors import DataError, UsageError
from .extract import PromptTask, TaskKind, extract_code, render_prompt
from .model import (
    CandidatePool,
    EnsembleSpec,
    GenerationRecord,
    ModelId,
    PlausibilityLabels,
    RecordFormat,
    SizeClass,
    TokenTrace,
    build_pool,
    ingest_records,
    write_records,
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

__version__ = "0.1.0"
