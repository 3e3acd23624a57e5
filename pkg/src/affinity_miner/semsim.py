"""Embedding-based semantic similarity between per-type corpora.

Pre-trained word vectors are loaded from the standard text layout (token
followed by d numbers per line); a document's vector is the unweighted
mean of its in-vocabulary token vectors, and corpora are compared with
cosine similarity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyFile, MalformedRecord, ZeroVector
from .ingest import ALL_TYPES, MbtiType
from .lexfeat import tokenize


@dataclass(frozen=True)
class EmbeddingTable:
    dimension: int
    vectors: dict[str, np.ndarray]


@dataclass(frozen=True)
class DocVector:
    values: np.ndarray
    in_vocab_fraction: float


def load_embeddings(stream: Iterable[str]) -> EmbeddingTable:
    """Parse token-plus-numbers lines; dimension inferred from the first.

    Tokens are lowercased; a token repeated later wins (last occurrence).
    """
    vectors: dict[str, np.ndarray] = {}
    dimension: int | None = None
    for lineno, line in enumerate(stream, start=1):
        parts = line.split()
        if not parts:
            continue
        token, values = parts[0].lower(), parts[1:]
        if dimension is None:
            if not values:
                raise DimensionMismatch(
                    "first line has no vector components", line=lineno
                )
            dimension = len(values)
        elif len(values) != dimension:
            raise DimensionMismatch(
                f"expected {dimension} components, got {len(values)}",
                line=lineno,
            )
        try:
            vec = np.array([float(v) for v in values])
        except ValueError as exc:
            raise MalformedRecord(f"bad number: {exc}", line=lineno) from None
        vec.setflags(write=False)
        vectors[token] = vec
    if dimension is None:
        raise EmptyFile("embedding file has no vector lines")
    return EmbeddingTable(dimension, vectors)


def doc_vector(tokens: Sequence[str], table: EmbeddingTable) -> DocVector:
    """Mean of in-vocabulary token vectors; OOV tokens are skipped."""
    hits = [table.vectors[t] for t in tokens if t in table.vectors]
    if not hits:
        return DocVector(np.zeros(table.dimension), 0.0)
    return DocVector(
        np.mean(hits, axis=0), len(hits) / len(tokens)
    )


def _values_of(v) -> np.ndarray:
    return np.asarray(v.values if isinstance(v, DocVector) else v, dtype=float)


def cosine(a, b) -> float:
    """Cosine of the angle between two vectors; exact 1.0 for identical input."""
    va, vb = _values_of(a), _values_of(b)
    da = float(va @ va)
    db = float(vb @ vb)
    if da == 0.0 or db == 0.0:
        raise ZeroVector("cosine undefined for a zero vector")
    return float(va @ vb) / math.sqrt(da * db)


def type_similarity_matrix(
    corpora: Mapping[MbtiType, str], table: EmbeddingTable
) -> dict[tuple[MbtiType, MbtiType], float]:
    """Cosine similarity for the 120 cross-type pairs.

    Keys are (row, column) with the row type later in code order, matching
    a lower-triangular layout; same-type cells are omitted.
    """
    missing = [t for t in ALL_TYPES if t not in corpora]
    if missing:
        raise ValueError(
            "all 16 type corpora required; missing: "
            + ", ".join(t.value for t in missing)
        )
    vectors: dict[MbtiType, DocVector] = {}
    for t in ALL_TYPES:
        v = doc_vector(tokenize(corpora[t]), table)
        if not v.values.any():
            raise ZeroVector(f"corpus for {t} has no in-vocabulary tokens")
        vectors[t] = v
    table_out: dict[tuple[MbtiType, MbtiType], float] = {}
    for i, row in enumerate(ALL_TYPES):
        for col in ALL_TYPES[:i]:
            table_out[(row, col)] = cosine(vectors[row], vectors[col])
    return table_out
