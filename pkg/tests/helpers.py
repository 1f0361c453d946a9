"""Shared test utilities: independent oracles and toy corpus builders."""

from __future__ import annotations

import numpy as np


def jacobi_svd(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60):
    """One-sided Jacobi SVD, written independently of the library path.

    Returns (u, s, v) with a ~ u @ diag(s) @ v.T, s sorted descending.
    Orthogonalizes column pairs by plane rotations until the largest
    normalized off-diagonal inner product drops below tol.
    """
    a = np.asarray(a, dtype=np.float64)
    transposed = a.shape[0] < a.shape[1]
    if transposed:
        a = a.T
    work = a.copy()
    n, m = work.shape
    v = np.eye(m)
    for _ in range(max_sweeps):
        rotated = False
        for i in range(m - 1):
            for j in range(i + 1, m):
                alpha = work[:, i] @ work[:, i]
                beta = work[:, j] @ work[:, j]
                gamma = work[:, i] @ work[:, j]
                if alpha == 0.0 or beta == 0.0:
                    continue
                if abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                gi = work[:, i].copy()
                work[:, i] = c * gi - s * work[:, j]
                work[:, j] = s * gi + c * work[:, j]
                vi = v[:, i].copy()
                v[:, i] = c * vi - s * v[:, j]
                v[:, j] = s * vi + c * v[:, j]
        if not rotated:
            break
    sigma = np.linalg.norm(work, axis=0)
    order = np.argsort(sigma)[::-1]
    sigma = sigma[order]
    work = work[:, order]
    v = v[:, order]
    u = np.zeros_like(work)
    nonzero = sigma > 0
    u[:, nonzero] = work[:, nonzero] / sigma[nonzero]
    if transposed:
        return v, sigma, u
    return u, sigma, v


def write_toy_corpus(root_dir, languages=("en", "fr", "de"), extra_ids=()):
    """Write a small aligned XML corpus tree under root_dir/<lang>/docs.xml.

    Every language gets documents d1..d6; `extra_ids` maps a language to
    additional IDs only it has, to exercise the alignment intersection.
    """
    shared = [f"d{i}" for i in range(1, 7)]
    bodies = {
        "en": "The committee adopted the decision",
        "fr": "Le comit%eacute a adopt%eacute la d%eacutecision",
        "de": "Der Ausschuss hat den Beschluss %uuml;bernommen",
        "ro": "Comitetul a adoptat decizia",
        "nl": "Het comit%eacute heeft het besluit aangenomen",
    }
    extra = dict(extra_ids)
    for lang in languages:
        lang_dir = root_dir / lang
        lang_dir.mkdir(parents=True, exist_ok=True)
        doc_ids = shared + list(extra.get(lang, []))
        docs = "\n".join(
            f'  <document id="{doc_id}">\n'
            f"    <p>  {bodies.get(lang, 'text')}   no {doc_id} </p>\n"
            f"  </document>"
            for doc_id in doc_ids
        )
        (lang_dir / "docs.xml").write_text(
            f"<corpus>\n{docs}\n</corpus>\n", encoding="utf-8"
        )
    return shared
