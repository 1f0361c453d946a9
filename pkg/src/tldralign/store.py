"""Embedding matrices, the `.tldr` file format, and the synthetic oracle.

The file format is the bit-exact contract between this toolkit and any
external extractor: little-endian, magic "TLDR", version 1, then
n, k, language, model tag, the n document IDs, and an n*k float32
row-major payload. read(write(m)) reproduces m byte for byte.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ._binio import (
    BadMagicError,
    FormatError,
    Reader,
    TruncatedPayloadError,
    UnsupportedVersionError,
    pack_string,
)
from .rng import Xoshiro256StarStar

__all__ = [
    "EmbeddingMatrix",
    "SyntheticSpec",
    "write_embeddings",
    "read_embeddings",
    "generate_synthetic_pair",
    "FormatError",
    "BadMagicError",
    "UnsupportedVersionError",
    "TruncatedPayloadError",
    "DuplicateIdError",
    "MixingRankError",
]

_MAGIC = b"TLDR"
_VERSION = 1


class DuplicateIdError(FormatError):
    pass


class MixingRankError(RuntimeError):
    """Raised when a random mixing matrix stays rank-deficient after retries."""


@dataclass
class EmbeddingMatrix:
    """n documents by k dimensions, float32, with IDs and provenance tags."""

    values: np.ndarray
    doc_ids: list[str]
    language: str
    model_tag: str

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {self.values.shape}")
        n, k = self.values.shape
        if k < 1:
            raise ValueError("embedding dimension k must be positive")
        if len(self.doc_ids) != n:
            raise ValueError(f"{len(self.doc_ids)} doc_ids for {n} rows")
        if len(set(self.doc_ids)) != n:
            raise DuplicateIdError("doc_ids contain duplicates")
        if not np.isfinite(self.values).all():
            raise ValueError("embedding values contain NaN or Inf")

    @property
    def n_docs(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def write_embeddings(matrix: EmbeddingMatrix, path) -> None:
    n, k = matrix.values.shape
    parts = [
        _MAGIC,
        struct.pack("<HHII", _VERSION, 0, n, k),
        pack_string(matrix.language),
        pack_string(matrix.model_tag),
    ]
    parts.extend(pack_string(doc_id) for doc_id in matrix.doc_ids)
    payload = np.ascontiguousarray(matrix.values, dtype="<f4")
    parts.append(payload.tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def read_embeddings(path) -> EmbeddingMatrix:
    with open(path, "rb") as fh:
        data = fh.read()
    r = Reader(data, str(path))
    r.expect_magic(_MAGIC)
    r.expect_version(_VERSION)
    r.u16("reserved")
    n = r.u32("row count")
    k = r.u32("column count")
    language = r.string("language tag")
    model_tag = r.string("model tag")
    doc_ids = [r.string(f"doc id {i}") for i in range(n)]
    if len(set(doc_ids)) != n:
        raise DuplicateIdError(f"{path}: duplicate document IDs in file")
    raw = r.take(n * k * 4, "float32 payload")
    r.expect_end()
    values = np.frombuffer(raw, dtype="<f4").reshape(n, k).copy()
    return EmbeddingMatrix(values=values, doc_ids=doc_ids, language=language, model_tag=model_tag)


@dataclass
class SyntheticSpec:
    """Recipe for a pair of embedding spaces sharing one latent geometry.

    Rows of the two outputs at the same index encode the same latent
    point through independent random linear mixings, which is exactly
    the premise the mapping methods assume about real bilingual data.
    """

    n_docs: int
    latent_dim: int
    embed_dim: int
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_docs < 1:
            raise ValueError("n_docs must be >= 1")
        if not 1 <= self.latent_dim <= self.embed_dim:
            raise ValueError("need 1 <= latent_dim <= embed_dim")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


_MIXING_REDRAWS = 3  # initial draw plus this many retries, then give up


def _draw_mixing(gen: Xoshiro256StarStar, k: int, p: int) -> np.ndarray:
    for _ in range(1 + _MIXING_REDRAWS):
        a = gen.normals(k * p).reshape(k, p)
        if np.linalg.matrix_rank(a) == p:
            return a
    raise MixingRankError(
        f"mixing matrix {k}x{p} rank-deficient after {_MIXING_REDRAWS} redraws"
    )


def generate_synthetic_pair(
    spec: SyntheticSpec, identity_mixing: bool = False
) -> tuple[EmbeddingMatrix, EmbeddingMatrix, np.ndarray]:
    """Two aligned synthetic "languages" plus the latent matrix behind them.

    Draw order is fixed (latent, mixing x, mixing y, noise x, noise y) so
    equal seeds give bit-identical output. `identity_mixing` is a test
    hook forcing both mixings to the identity (requires p == k), which
    makes the two sides exactly equal at zero noise.
    """
    gen = Xoshiro256StarStar(spec.seed)
    n, p, k = spec.n_docs, spec.latent_dim, spec.embed_dim
    latent = gen.normals(n * p).reshape(n, p)
    if identity_mixing:
        if p != k:
            raise ValueError("identity mixing requires latent_dim == embed_dim")
        mix_x = np.eye(k)
        mix_y = np.eye(k)
    else:
        mix_x = _draw_mixing(gen, k, p)
        mix_y = _draw_mixing(gen, k, p)
    x = latent @ mix_x.T
    y = latent @ mix_y.T
    if spec.noise_sigma > 0:
        x = x + spec.noise_sigma * gen.normals(n * k).reshape(n, k)
        y = y + spec.noise_sigma * gen.normals(n * k).reshape(n, k)
    doc_ids = [f"doc-{i:05d}" for i in range(n)]
    mx = EmbeddingMatrix(x.astype(np.float32), list(doc_ids), "xx", "synthetic")
    my = EmbeddingMatrix(y.astype(np.float32), list(doc_ids), "yy", "synthetic")
    return mx, my, latent
