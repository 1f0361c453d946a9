"""The three mapping methods behind one fit/encode interface.

* LCA represents a document by its least-squares coordinates in the
  span of the aligned training documents; mates get near-identical
  coordinate vectors because both spans encode the same concepts.
* LCC is a closed-form linear autoencoder: truncated SVD of the
  column-concatenated, mean-centered training matrix, whose right
  singular vectors split into one encoder per language.
* NCA trains two directional feed-forward networks (source->target and
  target->source) and compares mapped source vectors against raw
  target vectors.
* NONE is the unmapped baseline.
"""

from __future__ import annotations

import struct
from abc import ABC, abstractmethod

import numpy as np

from ._binio import FormatError, Reader
from .linalg import RCOND, truncated_svd
from .nn import FeedForwardNet, TrainConfig, TrainHistory, init_net, train
from .rng import Xoshiro256StarStar

__all__ = [
    "Mapper",
    "NoMapping",
    "LcaModel",
    "LccModel",
    "NcaModel",
    "fit_lca",
    "fit_lcc",
    "fit_nca",
    "fit_mapper",
    "save_model",
    "load_model",
    "METHODS",
    "NCA_HIDDEN_UNITS",
]

METHODS = ("lca", "lcc", "nca", "none")

# Paper architecture for NCA: one hidden layer of 500 ELU units.
NCA_HIDDEN_UNITS = 500


def _rows(v: np.ndarray, k: int, what: str) -> tuple[np.ndarray, bool]:
    v = np.asarray(v, dtype=np.float64)
    single = v.ndim == 1
    batch = np.atleast_2d(v)
    if batch.shape[1] != k:
        raise ValueError(f"{what}: expected vectors of length {k}, got {batch.shape[1]}")
    return batch, single


class Mapper(ABC):
    """Fitted mapping model; encode_source/encode_target accept a single
    vector or a matrix of row vectors and emit equal-length encodings."""

    method: str
    dim: int

    @abstractmethod
    def encode_source(self, v: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def encode_target(self, v: np.ndarray) -> np.ndarray: ...


class NoMapping(Mapper):
    method = "none"

    def __init__(self, embed_dim: int):
        self.embed_dim = embed_dim
        self.dim = embed_dim

    def encode_source(self, v):
        batch, single = _rows(v, self.embed_dim, "encode_source")
        return batch[0] if single else batch

    def encode_target(self, v):
        batch, single = _rows(v, self.embed_dim, "encode_target")
        return batch[0] if single else batch


class LcaModel(Mapper):
    method = "lca"

    def __init__(self, basis_x: np.ndarray, basis_y: np.ndarray):
        if basis_x.shape != basis_y.shape:
            raise ValueError("basis_x and basis_y must have identical shapes")
        self.basis_x = basis_x  # k x n_basis
        self.basis_y = basis_y
        self.embed_dim, self.dim = basis_x.shape
        # Cached minimum-norm solvers; pinv uses the same cutoff as
        # least_squares so both routes agree.
        self._solve_x = np.linalg.pinv(basis_x, rcond=RCOND)
        self._solve_y = np.linalg.pinv(basis_y, rcond=RCOND)

    def _encode(self, v, solver, what):
        batch, single = _rows(v, self.embed_dim, what)
        coords = batch @ solver.T
        return coords[0] if single else coords

    def encode_source(self, v):
        return self._encode(v, self._solve_x, "encode_source")

    def encode_target(self, v):
        return self._encode(v, self._solve_y, "encode_target")


def fit_lca(x_train: np.ndarray, y_train: np.ndarray, n_basis: int) -> LcaModel:
    """Basis = the first n_basis aligned training rows, as columns."""
    x_train = np.asarray(x_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)
    if x_train.shape != y_train.shape:
        raise ValueError("x_train and y_train must have identical shapes")
    n_train = x_train.shape[0]
    if not 1 <= n_basis <= n_train:
        raise ValueError(f"n_basis={n_basis} out of range for {n_train} training rows")
    return LcaModel(basis_x=x_train[:n_basis].T.copy(), basis_y=y_train[:n_basis].T.copy())


class LccModel(Mapper):
    method = "lcc"

    def __init__(self, enc_x, enc_y, mean_x, mean_y, singular_values):
        self.enc_x = enc_x  # m x k
        self.enc_y = enc_y
        self.mean_x = mean_x
        self.mean_y = mean_y
        self.singular_values = singular_values
        self.dim, self.embed_dim = enc_x.shape

    def _encode(self, v, enc, mean, what):
        batch, single = _rows(v, self.embed_dim, what)
        codes = (batch - mean) @ enc.T
        return codes[0] if single else codes

    def encode_source(self, v):
        return self._encode(v, self.enc_x, self.mean_x, "encode_source")

    def encode_target(self, v):
        return self._encode(v, self.enc_y, self.mean_y, "encode_target")


def fit_lcc(x_train: np.ndarray, y_train: np.ndarray, m: int) -> LccModel:
    """Truncated SVD of the centered [X | Y] training matrix; the split
    right singular vectors become the two encoders."""
    x_train = np.asarray(x_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)
    if x_train.shape != y_train.shape:
        raise ValueError("x_train and y_train must have identical shapes")
    n, k = x_train.shape
    if not 1 <= m <= min(n, 2 * k):
        raise ValueError(f"m={m} out of range (min(n_train, 2k) = {min(n, 2 * k)})")
    z = np.hstack([x_train, y_train])
    mean = z.mean(axis=0)
    _, s, v = truncated_svd(z - mean, m)
    # Singular vectors are sign-ambiguous; pin the largest-magnitude
    # entry of each column positive so refits and other SVD backends
    # produce identical encoders.
    flip = np.sign(v[np.abs(v).argmax(axis=0), np.arange(m)])
    flip[flip == 0] = 1.0  # all-zero column beyond the rank: leave it alone
    v = v * flip
    return LccModel(
        enc_x=v[:k].T.copy(), enc_y=v[k:].T.copy(),
        mean_x=mean[:k], mean_y=mean[k:], singular_values=s,
    )


class NcaModel(Mapper):
    method = "nca"

    def __init__(self, net_xy: FeedForwardNet, net_yx: FeedForwardNet,
                 history_xy: TrainHistory | None = None,
                 history_yx: TrainHistory | None = None):
        if net_xy.input_dim != net_yx.input_dim:
            raise ValueError("both nets must share the embedding width")
        self.net_xy = net_xy
        self.net_yx = net_yx
        self.history_xy = history_xy
        self.history_yx = history_yx
        self.embed_dim = net_xy.input_dim
        self.dim = self.embed_dim

    def encode_source(self, v):
        """Map a source-space vector into the target language's space."""
        batch, single = _rows(v, self.embed_dim, "encode_source")
        out = self.net_xy.forward(batch)
        return out[0] if single else out

    def encode_target(self, v):
        """Targets stay raw: comparison happens in the target space."""
        batch, single = _rows(v, self.embed_dim, "encode_target")
        return batch[0] if single else batch

    def reversed_pair(self) -> "NcaModel":
        """The same fit serving the (target -> source) direction."""
        return NcaModel(self.net_yx, self.net_xy, self.history_yx, self.history_xy)


def fit_nca(
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_val: np.ndarray,
    y_val: np.ndarray,
    cfg: TrainConfig | None = None,
) -> NcaModel:
    """Train the two directional networks with the paper's hyperparameters
    (500 ELU units, Huber loss, lr 5e-4, at most 250 epochs, early stopping)."""
    if cfg is None:
        cfg = TrainConfig()
    x_train = np.asarray(x_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)
    x_val = np.asarray(x_val, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.float64)
    if len(x_val) == 0 or len(y_val) == 0:
        raise ValueError("NCA needs a non-empty validation set for early stopping")
    if x_train.shape != y_train.shape or x_val.shape != y_val.shape:
        raise ValueError("train/val matrices must pair up row for row")
    k = x_train.shape[1]
    net_xy = init_net(k, NCA_HIDDEN_UNITS, Xoshiro256StarStar(cfg.seed))
    net_xy, hist_xy = train(net_xy, x_train, y_train, x_val, y_val, cfg)
    cfg_yx = TrainConfig(
        learning_rate=cfg.learning_rate, max_epochs=cfg.max_epochs,
        patience=cfg.patience, batch_size=cfg.batch_size,
        huber_delta=cfg.huber_delta, seed=cfg.seed + 1,
    )
    net_yx = init_net(k, NCA_HIDDEN_UNITS, Xoshiro256StarStar(cfg_yx.seed))
    net_yx, hist_yx = train(net_yx, y_train, x_train, y_val, x_val, cfg_yx)
    return NcaModel(net_xy, net_yx, hist_xy, hist_yx)


def fit_mapper(
    method: str,
    x_train: np.ndarray,
    y_train: np.ndarray,
    dim: int | None = None,
    x_val: np.ndarray | None = None,
    y_val: np.ndarray | None = None,
    seed: int = 0,
) -> Mapper:
    """Dispatch on method name; `dim` is n_basis for LCA and m for LCC."""
    if method == "none":
        return NoMapping(embed_dim=np.asarray(x_train).shape[1])
    if method == "lca":
        if dim is None:
            raise ValueError("LCA needs dim (number of basis documents)")
        return fit_lca(x_train, y_train, dim)
    if method == "lcc":
        if dim is None:
            raise ValueError("LCC needs dim (shared-space dimension)")
        return fit_lcc(x_train, y_train, dim)
    if method == "nca":
        if x_val is None or y_val is None:
            raise ValueError("NCA needs validation matrices")
        return fit_nca(x_train, y_train, x_val, y_val, TrainConfig(seed=seed))
    raise ValueError(f"unknown method {method!r} (expected one of {METHODS})")


# ---------------------------------------------------------------------------
# Model files: magic "TLDM" | version u16 | method u8 | dims | float64 payload.

_MODEL_MAGIC = b"TLDM"
_MODEL_VERSION = 1
_METHOD_CODES = {"none": 0, "lca": 1, "lcc": 2, "nca": 3}
_CODE_METHODS = {v: k for k, v in _METHOD_CODES.items()}


def _pack_array(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def _read_array(r: Reader, shape: tuple[int, ...], what: str) -> np.ndarray:
    count = int(np.prod(shape))
    raw = r.take(count * 8, what)
    return np.frombuffer(raw, dtype="<f8").reshape(shape).copy()


def save_model(model: Mapper, path) -> None:
    parts = [_MODEL_MAGIC, struct.pack("<HB", _MODEL_VERSION, _METHOD_CODES[model.method])]
    if isinstance(model, NoMapping):
        parts.append(struct.pack("<I", model.embed_dim))
    elif isinstance(model, LcaModel):
        parts.append(struct.pack("<II", model.embed_dim, model.dim))
        parts.append(_pack_array(model.basis_x))
        parts.append(_pack_array(model.basis_y))
    elif isinstance(model, LccModel):
        parts.append(struct.pack("<II", model.embed_dim, model.dim))
        for a in (model.enc_x, model.enc_y, model.mean_x, model.mean_y,
                  model.singular_values):
            parts.append(_pack_array(a))
    elif isinstance(model, NcaModel):
        parts.append(struct.pack("<II", model.embed_dim, model.net_xy.hidden_dim))
        for net in (model.net_xy, model.net_yx):
            for a in (net.w1, net.b1, net.w2, net.b2):
                parts.append(_pack_array(a))
    else:
        raise ValueError(f"cannot serialize mapper of type {type(model).__name__}")
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def load_model(path) -> Mapper:
    with open(path, "rb") as fh:
        data = fh.read()
    r = Reader(data, str(path))
    r.expect_magic(_MODEL_MAGIC)
    r.expect_version(_MODEL_VERSION)
    code = r.take(1, "method code")[0]
    if code not in _CODE_METHODS:
        raise FormatError(f"{path}: unknown method code {code}")
    method = _CODE_METHODS[code]
    if method == "none":
        k = r.u32("embed dim")
        r.expect_end()
        return NoMapping(k)
    if method == "lca":
        k = r.u32("embed dim")
        n_basis = r.u32("basis size")
        basis_x = _read_array(r, (k, n_basis), "basis_x")
        basis_y = _read_array(r, (k, n_basis), "basis_y")
        r.expect_end()
        return LcaModel(basis_x, basis_y)
    if method == "lcc":
        k = r.u32("embed dim")
        m = r.u32("code dim")
        enc_x = _read_array(r, (m, k), "enc_x")
        enc_y = _read_array(r, (m, k), "enc_y")
        mean_x = _read_array(r, (k,), "mean_x")
        mean_y = _read_array(r, (k,), "mean_y")
        s = _read_array(r, (m,), "singular values")
        r.expect_end()
        return LccModel(enc_x, enc_y, mean_x, mean_y, s)
    k = r.u32("embed dim")
    h = r.u32("hidden dim")
    nets = []
    for name in ("net_xy", "net_yx"):
        w1 = _read_array(r, (h, k), f"{name}.w1")
        b1 = _read_array(r, (h,), f"{name}.b1")
        w2 = _read_array(r, (k, h), f"{name}.w2")
        b2 = _read_array(r, (k,), f"{name}.b2")
        nets.append(FeedForwardNet(w1, b1, w2, b2))
    r.expect_end()
    return NcaModel(nets[0], nets[1])
