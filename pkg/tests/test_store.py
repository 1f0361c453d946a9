import struct

import numpy as np
import pytest

from tldralign import store
from tldralign.linalg import least_squares
from tldralign.store import (
    BadMagicError,
    DuplicateIdError,
    EmbeddingMatrix,
    MixingRankError,
    SyntheticSpec,
    TruncatedPayloadError,
    UnsupportedVersionError,
    generate_synthetic_pair,
    read_embeddings,
    write_embeddings,
)


def small_matrix():
    values = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.5]], dtype=np.float32)
    return EmbeddingMatrix(values, ["a", "b"], "en", "unit")


class TestFormat:
    def test_roundtrip_identical_bytes(self, tmp_path):
        path = tmp_path / "m.tldr"
        write_embeddings(small_matrix(), path)
        first = path.read_bytes()
        again = read_embeddings(path)
        write_embeddings(again, path)
        assert path.read_bytes() == first

    def test_roundtrip_random_shapes(self, tmp_path):
        rng = np.random.default_rng(0)
        for trial in range(20):
            n = int(rng.integers(1, 40))
            k = int(rng.integers(1, 60))
            values = rng.normal(size=(n, k)).astype(np.float32)
            m = EmbeddingMatrix(values, [f"id{i}" for i in range(n)], "xx", f"t{trial}")
            path = tmp_path / "r.tldr"
            write_embeddings(m, path)
            back = read_embeddings(path)
            assert back.values.tobytes() == m.values.tobytes()
            assert back.doc_ids == m.doc_ids
            assert (back.language, back.model_tag) == (m.language, m.model_tag)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.tldr"
        write_embeddings(small_matrix(), path)
        data = bytearray(path.read_bytes())
        data[:4] = b"XXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(BadMagicError):
            read_embeddings(path)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "m.tldr"
        write_embeddings(small_matrix(), path)
        data = bytearray(path.read_bytes())
        data[4:6] = struct.pack("<H", 9)
        path.write_bytes(bytes(data))
        with pytest.raises(UnsupportedVersionError):
            read_embeddings(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "m.tldr"
        write_embeddings(small_matrix(), path)
        data = path.read_bytes()
        path.write_bytes(data[:-5])
        with pytest.raises(TruncatedPayloadError):
            read_embeddings(path)

    def test_duplicate_ids_in_file(self, tmp_path):
        path = tmp_path / "m.tldr"
        write_embeddings(small_matrix(), path)
        data = path.read_bytes()
        # Both doc ids are single letters; rewrite "b" to "a".
        path.write_bytes(data.replace(b"\x01\x00b", b"\x01\x00a"))
        with pytest.raises(DuplicateIdError):
            read_embeddings(path)

    def test_trailing_garbage_rejected(self, tmp_path):
        path = tmp_path / "m.tldr"
        write_embeddings(small_matrix(), path)
        path.write_bytes(path.read_bytes() + b"junk")
        with pytest.raises(store.FormatError):
            read_embeddings(path)

    def test_payload_size_at_corpus_scale(self, tmp_path):
        n, k = 6538, 768
        m = EmbeddingMatrix(
            np.zeros((n, k), dtype=np.float32),
            [f"jrc{i:05d}" for i in range(n)], "en", "mbert",
        )
        path = tmp_path / "big.tldr"
        write_embeddings(m, path)
        header = 4 + 2 + 2 + 4 + 4          # magic, version, reserved, n, k
        header += 2 + len("en") + 2 + len("mbert")
        header += sum(2 + len(d) for d in m.doc_ids)
        assert path.stat().st_size == header + n * k * 4


class TestEmbeddingMatrixInvariants:
    def test_rejects_nan(self):
        values = np.array([[np.nan, 0.0]], dtype=np.float32)
        with pytest.raises(ValueError):
            EmbeddingMatrix(values, ["a"], "en", "t")

    def test_rejects_duplicate_ids(self):
        with pytest.raises(DuplicateIdError):
            EmbeddingMatrix(np.zeros((2, 2), np.float32), ["a", "a"], "en", "t")

    def test_rejects_id_count_mismatch(self):
        with pytest.raises(ValueError):
            EmbeddingMatrix(np.zeros((2, 2), np.float32), ["a"], "en", "t")


class TestSynthetic:
    def test_identity_mixing_makes_sides_equal(self):
        spec = SyntheticSpec(n_docs=10, latent_dim=6, embed_dim=6, seed=1)
        x, y, latent = generate_synthetic_pair(spec, identity_mixing=True)
        assert np.array_equal(x.values, y.values)
        np.testing.assert_allclose(x.values, latent.astype(np.float32))

    def test_same_seed_bit_identical(self):
        spec = SyntheticSpec(n_docs=30, latent_dim=5, embed_dim=20,
                             noise_sigma=0.3, seed=99)
        x1, y1, z1 = generate_synthetic_pair(spec)
        x2, y2, z2 = generate_synthetic_pair(spec)
        assert x1.values.tobytes() == x2.values.tobytes()
        assert y1.values.tobytes() == y2.values.tobytes()
        assert np.array_equal(z1, z2)

    def test_rank_equals_latent_dim(self):
        # SVD oracle: 64 dominant singular values, the rest at the
        # float32 storage noise floor (relative ~1e-7), far below 1e-5.
        spec = SyntheticSpec(n_docs=500, latent_dim=64, embed_dim=768, seed=42)
        x, _, _ = generate_synthetic_pair(spec)
        s = np.linalg.svd(x.values.astype(np.float64), compute_uv=False)
        assert (s > 1e-5 * s[0]).sum() == 64
        assert s[63] > 1e-2 * s[0]

    def test_shared_latent_linear_map(self):
        # sigma=0: the least-squares map from X-span to Y-span recovers Y.
        spec = SyntheticSpec(n_docs=200, latent_dim=16, embed_dim=64, seed=3)
        x, y, _ = generate_synthetic_pair(spec)
        xv = x.values.astype(np.float64)
        yv = y.values.astype(np.float64)
        w = least_squares(xv, yv)
        rel = np.linalg.norm(xv @ w - yv) / np.linalg.norm(yv)
        assert rel < 1e-5

    def test_doc_ids_match_across_sides(self):
        spec = SyntheticSpec(n_docs=7, latent_dim=2, embed_dim=5, seed=0)
        x, y, _ = generate_synthetic_pair(spec)
        assert x.doc_ids == y.doc_ids
        assert x.language != y.language

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SyntheticSpec(n_docs=0, latent_dim=1, embed_dim=2)
        with pytest.raises(ValueError):
            SyntheticSpec(n_docs=1, latent_dim=3, embed_dim=2)
        with pytest.raises(ValueError):
            SyntheticSpec(n_docs=1, latent_dim=1, embed_dim=2, noise_sigma=-0.1)

    def test_mixing_redraw_limit(self, monkeypatch):
        monkeypatch.setattr(np.linalg, "matrix_rank", lambda a: 0)
        spec = SyntheticSpec(n_docs=4, latent_dim=2, embed_dim=3, seed=0)
        with pytest.raises(MixingRankError):
            generate_synthetic_pair(spec)
