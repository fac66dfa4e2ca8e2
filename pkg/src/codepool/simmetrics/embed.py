"""Token embeddings for the cosine-similarity metric.

Embeddings come either from a sidecar table file or from a deterministic
hashing embedder. The hashing embedder exists so the pipeline runs with no
neural model present; swap in a table produced offline for real use.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from ..errors import DataError
from .lexer import TokenSeq

__all__ = [
    "EmbeddingSeq",
    "HashingEmbedder",
    "TableEmbedder",
    "bertscore_f3",
    "write_sidecar",
]

_NORM_TOL = 1e-9


class EmbeddingSeq:
    """One unit vector per token, stacked as an (n, d) float64 array."""

    def __init__(self, vectors: np.ndarray):
        arr = np.asarray(vectors, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d array, got shape {arr.shape}")
        if arr.shape[0] > 0:
            norms = np.linalg.norm(arr, axis=1)
            bad = np.abs(norms - 1.0) > _NORM_TOL
            if bad.any():
                raise ValueError(f"row {int(np.argmax(bad))} is not unit-norm")
        arr = arr.copy()
        arr.setflags(write=False)
        self.vectors = arr

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


class HashingEmbedder:
    """Deterministic per-token unit vectors seeded from a token digest."""

    def __init__(self, dim: int = 64):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}

    def _vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            seed = int.from_bytes(digest[:8], "big")
            rng = np.random.default_rng(seed)
            raw = rng.standard_normal(self.dim)
            vec = raw / np.linalg.norm(raw)
            self._cache[token] = vec
        return vec

    def embed(self, tokens: TokenSeq) -> EmbeddingSeq:
        if len(tokens) == 0:
            return EmbeddingSeq(np.zeros((0, self.dim)))
        return EmbeddingSeq(np.stack([self._vector(t) for t in tokens]))


class TableEmbedder:
    """Embeddings read from a text sidecar: header `d count`, then one row
    per token holding the JSON-encoded token and d floats."""

    def __init__(self, table: dict[str, np.ndarray], dim: int):
        self.dim = dim
        self._table = table

    @classmethod
    def load(cls, path) -> "TableEmbedder":
        decoder = json.JSONDecoder()
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise DataError(f"{path}: bad sidecar header")
            try:
                dim, count = int(header[0]), int(header[1])
            except ValueError:
                raise DataError(f"{path}: bad sidecar header") from None
            table: dict[str, np.ndarray] = {}
            for lineno in range(2, count + 2):
                line = fh.readline()
                if not line:
                    raise DataError(f"{path}: expected {count} rows, file ended early")
                try:
                    token, end = decoder.raw_decode(line)
                except json.JSONDecodeError:
                    raise DataError(f"{path}:{lineno}: malformed token field") from None
                if not isinstance(token, str):
                    raise DataError(f"{path}:{lineno}: token must be a JSON string")
                parts = line[end:].split()
                if len(parts) != dim:
                    raise DataError(
                        f"{path}:{lineno}: expected {dim} floats, got {len(parts)}"
                    )
                vec = np.array([float(p) for p in parts], dtype=np.float64)
                norm = np.linalg.norm(vec)
                if norm == 0.0:
                    raise DataError(f"{path}:{lineno}: zero vector")
                table[token] = vec / norm
        return cls(table, dim)

    def embed(self, tokens: TokenSeq) -> EmbeddingSeq:
        rows = []
        for t in tokens:
            vec = self._table.get(t)
            if vec is None:
                raise DataError(f"no embedding for token {t!r}")
            rows.append(vec)
        if not rows:
            return EmbeddingSeq(np.zeros((0, self.dim)))
        return EmbeddingSeq(np.stack(rows))


def write_sidecar(path, table: dict[str, np.ndarray]) -> None:
    """Write the sidecar format read by TableEmbedder.load."""
    items = sorted(table.items())
    if not items:
        raise ValueError("empty embedding table")
    dim = len(next(iter(table.values())))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{dim} {len(items)}\n")
        for token, vec in items:
            floats = " ".join(repr(float(x)) for x in vec)
            fh.write(f"{json.dumps(token)} {floats}\n")


def bertscore_f3(a: EmbeddingSeq, b: EmbeddingSeq, beta: float = 3.0) -> float:
    """Greedy-max cosine F-score, recall-weighted.

    P averages, over a's tokens, the best cosine against b; R is symmetric.
    Cosines are clamped to [0, 1] before aggregation.
    """
    if len(a) == 0 or len(b) == 0:
        raise ValueError("empty embedding sequence")
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    sims = np.clip(a.vectors @ b.vectors.T, 0.0, 1.0)
    p = float(sims.max(axis=1).mean())
    r = float(sims.max(axis=0).mean())
    if p == 0.0 and r == 0.0:
        return 0.0
    b2 = beta * beta
    return (1.0 + b2) * p * r / (b2 * p + r)
