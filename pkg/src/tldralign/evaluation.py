"""Mate retrieval rate and mean reciprocal rank over cosine similarity.

A query document's mate is the target-language document with the same
ID; with aligned ID order that is the diagonal of the similarity
matrix. Ties are handled deterministically: argmax breaks toward the
lowest column index, and ranks count only strictly greater scores
(optimistic), so r_d = 1 + |{j != d : S[d,j] > S[d,d]}|.

The `*_bruteforce` twins recompute both metrics with plain double
loops and exist solely as oracles for the vectorized paths.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .linalg import cosine_matrix
from .mappers import Mapper
from .store import EmbeddingMatrix

__all__ = [
    "SimilarityMatrix",
    "RetrievalReport",
    "mate_retrieval_rate",
    "reciprocal_ranks",
    "mate_retrieval_rate_bruteforce",
    "reciprocal_ranks_bruteforce",
    "evaluate_pair",
]


@dataclass
class SimilarityMatrix:
    values: np.ndarray  # q x t cosine similarities
    query_ids: list[str]
    target_ids: list[str]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("similarity values must be 2-D")
        q, t = self.values.shape
        if len(self.query_ids) != q or len(self.target_ids) != t:
            raise ValueError("ID list lengths do not match the matrix shape")
        if self.values.size and (self.values.min() < -1.0 or self.values.max() > 1.0):
            raise ValueError("similarities must lie in [-1, 1]")


def _square_values(sim) -> np.ndarray:
    if isinstance(sim, SimilarityMatrix):
        if sim.query_ids != sim.target_ids:
            raise ValueError("mate metrics need identical query/target ID order")
        values = sim.values
    else:
        values = np.asarray(sim, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"mate metrics need a square matrix, got {values.shape}")
    return values


def mate_retrieval_rate(sim) -> float:
    """Fraction of rows whose argmax sits on the diagonal."""
    values = _square_values(sim)
    hits = np.argmax(values, axis=1) == np.arange(values.shape[0])
    return float(hits.mean())


def reciprocal_ranks(sim) -> tuple[np.ndarray, float]:
    """Per-row mate ranks and their mean reciprocal."""
    values = _square_values(sim)
    diag = np.diagonal(values)
    ranks = 1 + (values > diag[:, None]).sum(axis=1)
    # fsum is correctly rounded, so the MRR is exactly invariant under
    # row permutations (plain summation drifts in the last ulp).
    return ranks, math.fsum(1.0 / r for r in ranks) / len(ranks)


def mate_retrieval_rate_bruteforce(sim) -> float:
    values = _square_values(sim)
    n = values.shape[0]
    hits = 0
    for d in range(n):
        best = 0
        for j in range(1, n):
            if values[d, j] > values[d, best]:
                best = j
        if best == d:
            hits += 1
    return hits / n


def reciprocal_ranks_bruteforce(sim) -> tuple[np.ndarray, float]:
    values = _square_values(sim)
    n = values.shape[0]
    ranks = np.empty(n, dtype=np.int64)
    for d in range(n):
        greater = 0
        for j in range(n):
            if j != d and values[d, j] > values[d, d]:
                greater += 1
        ranks[d] = 1 + greater
    # Ranks are the oracle's output; reduce them exactly like the
    # vectorized path so equal ranks give bit-equal MRR.
    return ranks, math.fsum(1.0 / r for r in ranks) / len(ranks)


@dataclass
class RetrievalReport:
    pair: tuple[str, str]  # (source language, target language)
    method: str
    dim: int
    mate_retrieval_rate: float
    mean_reciprocal_rank: float
    n_queries: int
    model_tag: str = ""

    def __post_init__(self):
        if not 0.0 <= self.mate_retrieval_rate <= 1.0:
            raise ValueError("mate_retrieval_rate out of [0, 1]")
        if not 0.0 < self.mean_reciprocal_rank <= 1.0 + 1e-12:
            raise ValueError("mean_reciprocal_rank out of (0, 1]")
        # Every mate hit is a rank-1 row, so MRR can never trail the rate.
        if self.mean_reciprocal_rank + 1e-12 < self.mate_retrieval_rate:
            raise ValueError("MRR below mate retrieval rate")

    def to_json(self) -> str:
        obj = asdict(self)
        obj["pair"] = list(self.pair)
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RetrievalReport":
        obj = json.loads(text)
        obj["pair"] = tuple(obj["pair"])
        return cls(**obj)


def evaluate_pair(model: Mapper, x_test: EmbeddingMatrix,
                  y_test: EmbeddingMatrix) -> RetrievalReport:
    """Encode all test rows on both sides, build the cosine matrix, and
    score both metrics."""
    if x_test.doc_ids != y_test.doc_ids:
        raise ValueError("test matrices are not ID-aligned")
    queries = model.encode_source(x_test.values.astype(np.float64))
    targets = model.encode_target(y_test.values.astype(np.float64))
    sims = SimilarityMatrix(
        cosine_matrix(queries, targets),
        query_ids=list(x_test.doc_ids),
        target_ids=list(y_test.doc_ids),
    )
    rate = mate_retrieval_rate(sims)
    _, mrr = reciprocal_ranks(sims)
    return RetrievalReport(
        pair=(x_test.language, y_test.language),
        method=model.method,
        dim=model.dim,
        mate_retrieval_rate=rate,
        mean_reciprocal_rank=mrr,
        n_queries=x_test.n_docs,
        model_tag=x_test.model_tag,
    )
