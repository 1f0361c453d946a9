"""Minimal deterministic feed-forward trainer: one ELU hidden layer,
Huber objective, Adam updates, early stopping on validation loss.

Everything random (weight init, batch order) comes from the seeded
PRNG, so a (data, seed) pair reproduces the final weights bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import Xoshiro256StarStar

__all__ = [
    "FeedForwardNet",
    "TrainConfig",
    "TrainHistory",
    "TrainingDivergedError",
    "elu",
    "elu_grad",
    "huber_loss",
    "init_net",
    "train",
]


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; carries the epoch/batch where it happened."""


def elu(x):
    """ELU with alpha = 1: x for x > 0, exp(x) - 1 otherwise."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def elu_grad(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


def huber_loss(pred, target, delta: float = 1.0) -> float:
    """Mean over coordinates of the Huber penalty on pred - target."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    r = np.abs(pred - target)
    quad = 0.5 * r * r
    lin = delta * (r - 0.5 * delta)
    return float(np.mean(np.where(r <= delta, quad, lin)))


@dataclass
class FeedForwardNet:
    """input k -> hidden h (ELU) -> output k, as W2 @ elu(W1 @ v + b1) + b2."""

    w1: np.ndarray  # h x k
    b1: np.ndarray  # h
    w2: np.ndarray  # k x h
    b2: np.ndarray  # k

    def __post_init__(self):
        h, k = self.w1.shape
        if self.b1.shape != (h,) or self.w2.shape != (k, h) or self.b2.shape != (k,):
            raise ValueError("inconsistent parameter shapes")
        for p in (self.w1, self.b1, self.w2, self.b2):
            if not np.isfinite(p).all():
                raise ValueError("parameters contain NaN or Inf")

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    def forward(self, v: np.ndarray) -> np.ndarray:
        """Apply the net to a vector or to a batch of row vectors."""
        v = np.asarray(v, dtype=np.float64)
        single = v.ndim == 1
        batch = np.atleast_2d(v)
        if batch.shape[1] != self.input_dim:
            raise ValueError(
                f"input width {batch.shape[1]} does not match net width {self.input_dim}"
            )
        out = elu(batch @ self.w1.T + self.b1) @ self.w2.T + self.b2
        return out[0] if single else out

    def copy(self) -> "FeedForwardNet":
        return FeedForwardNet(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())


def init_net(input_dim: int, hidden_dim: int, gen: Xoshiro256StarStar) -> FeedForwardNet:
    """Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases."""
    limit = np.sqrt(6.0 / (input_dim + hidden_dim))
    w1 = (gen.uniforms(hidden_dim * input_dim) * 2.0 - 1.0) * limit
    w2 = (gen.uniforms(input_dim * hidden_dim) * 2.0 - 1.0) * limit
    return FeedForwardNet(
        w1=w1.reshape(hidden_dim, input_dim),
        b1=np.zeros(hidden_dim),
        w2=w2.reshape(input_dim, hidden_dim),
        b2=np.zeros(input_dim),
    )


@dataclass
class TrainConfig:
    learning_rate: float = 5e-4
    max_epochs: int = 250
    patience: int = 10
    batch_size: int = 32
    huber_delta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.huber_delta <= 0:
            raise ValueError("learning_rate and huber_delta must be positive")
        if self.max_epochs < 1 or self.batch_size < 1:
            raise ValueError("max_epochs and batch_size must be positive")
        if self.patience < 0:
            raise ValueError("patience must be nonnegative")


@dataclass
class TrainHistory:
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    best_epoch: int = 0

    @property
    def epochs_run(self) -> int:
        return len(self.val_losses)


# Adam moment decay rates and denominator guard.
_BETA1, _BETA2, _EPS = 0.9, 0.999, 1e-8
# A validation improvement must beat the best loss by this much to
# reset the early-stopping counter.
_MIN_IMPROVEMENT = 1e-6


def _gradients(net, x, y, delta):
    """Batch loss and parameter gradients for the coordinate-mean Huber."""
    z1 = x @ net.w1.T + net.b1
    a1 = elu(z1)
    pred = a1 @ net.w2.T + net.b2
    r = pred - y
    abs_r = np.abs(r)
    loss = float(np.mean(np.where(abs_r <= delta, 0.5 * r * r, delta * (abs_r - 0.5 * delta))))
    g_pred = np.clip(r, -delta, delta) / r.size
    g_w2 = g_pred.T @ a1
    g_b2 = g_pred.sum(axis=0)
    g_z1 = (g_pred @ net.w2) * elu_grad(z1)
    g_w1 = g_z1.T @ x
    g_b1 = g_z1.sum(axis=0)
    return loss, (g_w1, g_b1, g_w2, g_b2)


def train(
    net: FeedForwardNet,
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_val: np.ndarray,
    y_val: np.ndarray,
    cfg: TrainConfig,
) -> tuple[FeedForwardNet, TrainHistory]:
    """Adam mini-batch training with early stopping.

    Stops after `patience` consecutive epochs without a validation
    improvement (or at max_epochs) and restores the parameters of the
    best validation epoch before returning.
    """
    x_train = np.asarray(x_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)
    x_val = np.asarray(x_val, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.float64)
    if len(x_train) == 0 or len(x_val) == 0:
        raise ValueError("training and validation sets must be non-empty")
    if x_train.shape[0] != y_train.shape[0] or x_val.shape[0] != y_val.shape[0]:
        raise ValueError("input/target row counts differ")

    gen = Xoshiro256StarStar(cfg.seed)
    params = [net.w1, net.b1, net.w2, net.b2]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    step = 0

    history = TrainHistory()
    best_val = np.inf
    best_params = [p.copy() for p in params]
    bad_epochs = 0
    n = x_train.shape[0]

    for epoch in range(cfg.max_epochs):
        order = gen.shuffled(range(n))
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grads = _gradients(net, x_train[idx], y_train[idx], cfg.huber_delta)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {n_batches}"
                )
            epoch_loss += loss
            n_batches += 1
            step += 1
            scale = cfg.learning_rate * np.sqrt(1.0 - _BETA2**step) / (1.0 - _BETA1**step)
            for p, mi, vi, g in zip(params, m, v, grads):
                mi *= _BETA1
                mi += (1.0 - _BETA1) * g
                vi *= _BETA2
                vi += (1.0 - _BETA2) * g * g
                p -= scale * mi / (np.sqrt(vi) + _EPS)

        val_loss = huber_loss(net.forward(x_val), y_val, cfg.huber_delta)
        if not np.isfinite(val_loss):
            raise TrainingDivergedError(f"non-finite validation loss at epoch {epoch}")
        history.train_losses.append(epoch_loss / n_batches)
        history.val_losses.append(val_loss)

        if val_loss < best_val - _MIN_IMPROVEMENT:
            best_val = val_loss
            best_params = [p.copy() for p in params]
            history.best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
        if bad_epochs >= cfg.patience:
            break

    net.w1, net.b1, net.w2, net.b2 = best_params
    return net, history
