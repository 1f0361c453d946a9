"""Dense kernels shared by the mappers and the retrieval metrics.

Everything computes in float64 regardless of what the embedding files
carry; 768-dim normal-equation-scale conditioning eats float32.
"""

from __future__ import annotations

import numpy as np

# Singular values below RCOND * sigma_max are treated as zero, which is
# what makes least_squares return the minimum-norm solution on
# rank-deficient systems.
RCOND = 1e-10


def _as_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains NaN or Inf")
    return a


def least_squares(a, b) -> np.ndarray:
    """Minimum-norm least-squares solution of a @ x = b.

    `b` may be a vector or a matrix of stacked right-hand sides.
    """
    a = _as_matrix(a, "a")
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != a.shape[0]:
        raise ValueError(
            f"dimension mismatch: a has {a.shape[0]} rows, b has {b.shape[0]}"
        )
    solution, _, _, _ = np.linalg.lstsq(a, b, rcond=RCOND)
    return solution


def truncated_svd(a, r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Best rank-r factors (U, s, V) with a ~ U @ diag(s) @ V.T.

    s is non-increasing, U is n x r and V is m x r with orthonormal
    columns.
    """
    a = _as_matrix(a, "a")
    n, m = a.shape
    if not 1 <= r <= min(n, m):
        raise ValueError(f"rank r={r} out of range for {n}x{m} matrix")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return u[:, :r], s[:r], vt[:r].T


def cosine_matrix(q, t) -> np.ndarray:
    """Pairwise cosine similarities between rows of q and rows of t.

    Entry (i, j) is clamped into [-1, 1] against rounding. A zero-norm
    row has no direction, so it is an error, reported with its index.
    """
    q = _as_matrix(q, "q")
    t = _as_matrix(t, "t")
    if q.shape[1] != t.shape[1]:
        raise ValueError(
            f"dimension mismatch: q has {q.shape[1]} columns, t has {t.shape[1]}"
        )
    q_norms = np.linalg.norm(q, axis=1)
    t_norms = np.linalg.norm(t, axis=1)
    for name, norms in (("q", q_norms), ("t", t_norms)):
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise ValueError(f"zero-norm row {zero[0]} in {name}: cosine undefined")
    sims = (q @ t.T) / np.outer(q_norms, t_norms)
    return np.clip(sims, -1.0, 1.0)
