"""Shared factories: records, pools, and synthetic benchmark datasets."""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

import pytest

from codepool.model import (
    EnsembleSpec,
    GenerationRecord,
    ModelId,
    SizeClass,
    TokenTrace,
    build_pool,
)

JAVA_SNIPPETS = [
    "int add(int a, int b) { return a + b; }",
    "int add(int a, int b) { int s = a + b; return s; }",
    "int add(int a, int b) { return b + a; }",
    "int add(int a, int b) { return a - b; }",
    "int add(int a, int b) { if (a > 0) { return a + b; } return b; }",
]


def model(label: str, family: str = "fam", size: str = "small") -> ModelId:
    return ModelId(label=label, family=family, size_class=SizeClass(size))


def trace(nlls=(1.0, 0.5), entropies=(0.2, 0.3), vocab=32000) -> TokenTrace:
    return TokenTrace(nlls=tuple(nlls), entropies=tuple(entropies), vocab_size=vocab)


def record(
    pid: str = "p1",
    m: ModelId = None,
    idx: int = 0,
    code: str = "int f() { return 1; }",
    cross: dict = None,
) -> GenerationRecord:
    m = m or model("m0")
    raw = "no code" if code is None else f"```java\n{code}\n```"
    return GenerationRecord(
        problem_id=pid,
        model=m,
        candidate_index=idx,
        raw_output=raw,
        trace=trace(),
        cross_traces=cross or {},
        extracted_code=code,
    )


def simple_pool(codes, pid="p1", k=10, n_outputs=None):
    """Pool with one model and one candidate per code (None = unscoreable)."""
    m = model("m0")
    n = n_outputs or max(len(codes), 1)
    recs = [record(pid, m, i, code) for i, code in enumerate(codes)]
    spec = EnsembleSpec(name="e", members=(m,), n_outputs=n, k=min(k, n))
    return build_pool(recs, spec, pid)


# ---------------------------------------------------------------------------
# synthetic benchmark on disk (records + labels + config)

BENCH_MODELS = [
    ("alpha-small", "alpha", "small", 32000),
    ("alpha-large", "alpha", "large", 32000),
    ("beta-small", "beta", "small", 50257),
    ("beta-large", "beta", "large", 50257),
]


def _rand_trace(rng: random.Random, vocab: int) -> dict:
    n = rng.randint(3, 8)
    cap = math.log(vocab)
    return {
        "token_nlls": [round(rng.uniform(0.0, 2.5), 6) for _ in range(n)],
        "token_entropies": [round(rng.uniform(0.0, 0.8 * cap), 6) for _ in range(n)],
        "vocab_size": vocab,
    }


def write_benchmark_files(
    root: Path, n_problems: int = 50, n_outputs: int = 10, seed: int = 2207
) -> dict:
    """Records, labels and a full-pipeline config under root.

    Shape: n_problems x 4 models x n_outputs, with java-style outputs,
    a few fenceless (unscoreable) outputs, and full cross traces.
    """
    rng = random.Random(seed)
    root.mkdir(parents=True, exist_ok=True)
    records_path = root / "records.jsonl"
    labels_path = root / "labels.csv"
    config_path = root / "config.yaml"

    with open(records_path, "w", encoding="utf-8") as rfh, open(
        labels_path, "w", encoding="utf-8"
    ) as lfh:
        lfh.write("problem_id,model,candidate_index,plausible\n")
        for p in range(1, n_problems + 1):
            pid = f"p{p:03d}"
            for label, family, size, vocab in BENCH_MODELS:
                # per (problem, model) solve propensity: large models a bit
                # stronger, with real misses for everyone
                strength = 0.55 if size == "large" else 0.4
                for idx in range(n_outputs):
                    fenceless = rng.random() < 0.04
                    snippet = rng.choice(JAVA_SNIPPETS).replace("add", f"solve{p}")
                    if fenceless:
                        raw = "I could not produce code for this problem."
                    else:
                        raw = f"Here is my fix:\n```java\n{snippet}\n```\nDone."
                    rec = {
                        "problem_id": pid,
                        "model": label,
                        "family": family,
                        "size_class": size,
                        "candidate_index": idx,
                        "raw_output": raw,
                    }
                    rec.update(_rand_trace(rng, vocab))
                    rec["cross_traces"] = {
                        m[0]: _rand_trace(rng, m[3]) for m in BENCH_MODELS
                    }
                    rfh.write(json.dumps(rec) + "\n")
                    plausible = (not fenceless) and rng.random() < strength
                    lfh.write(f"{pid},{label},{idx},{1 if plausible else 0}\n")

    config_path.write_text(
        """\
records: records.jsonl
labels: labels.csv
language: java
out_dir: out
embedding_dim: 16
ensembles:
  - name: all4
    members: [alpha-small, alpha-large, beta-small, beta-large]
    n_outputs: %(n)d
    k: 10
  - name: smalls
    members: [alpha-small, beta-small]
    n_outputs: %(n)d
    k: 10
  - name: larges
    members: [alpha-large, beta-large]
    n_outputs: %(n)d
    k: 10
metrics: [codebleu, bertscore_f3, nll_per_byte, entropy_per_byte, sum_entropy_norm]
strategies: [highest, lowest, diverse]
pair_sweeps:
  - heuristic: naive
    baseline: best_single
  - heuristic: codebleu:diverse
    baseline: naive
pair_k: 10
"""
        % {"n": n_outputs},
        encoding="utf-8",
    )
    return {
        "records": records_path,
        "labels": labels_path,
        "config": config_path,
        "out": root / "out",
    }


@pytest.fixture(scope="session")
def benchmark_dir(tmp_path_factory) -> dict:
    root = tmp_path_factory.mktemp("bench")
    return write_benchmark_files(root)
