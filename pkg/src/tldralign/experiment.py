"""Experiment grid: ordered language pairs x methods x dimension sweep.

Each cell (model tag, source, target, method, dim) is an independent
pure task: fit on the train split, early-stop on validation (NCA),
evaluate on the test split, write one report file. Existing report
files are reused unless forced, which makes long grids resumable, and
cells may run in a bounded process pool because results never depend
on execution order.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .corpus import SplitAssignment, load_splits
from .evaluation import RetrievalReport, evaluate_pair
from .mappers import fit_mapper
from .store import EmbeddingMatrix, read_embeddings

__all__ = [
    "ExperimentConfig",
    "GridResult",
    "run_grid",
    "aggregate",
    "emit_outputs",
    "default_dims",
    "MisalignmentError",
]

# Log-scale dimension sweep used when a config does not pin its own.
_DEFAULT_DIM_LADDER = (2, 4, 8, 16, 32, 64, 128, 256, 512)
_SWEPT_METHODS = ("lca", "lcc")  # the only methods with a dimension knob


class MisalignmentError(ValueError):
    """Split IDs that are absent from an embedding file."""


@dataclass
class ExperimentConfig:
    languages: list[str]
    embedding_files: dict[str, dict[str, str]]  # model_tag -> language -> path
    methods: list[str]
    split_path: str
    seed: int
    output_dir: str
    dims: list[int] | None = None

    def __post_init__(self):
        if len(self.languages) < 2:
            raise ValueError("need at least 2 languages")
        missing = [
            (tag, lang)
            for tag, files in self.embedding_files.items()
            for lang in self.languages
            if lang not in files
        ]
        if missing:
            raise ValueError(f"embedding files missing for {missing}")
        swept = [m for m in self.methods if m in _SWEPT_METHODS]
        if swept and self.dims is not None and not self.dims:
            raise ValueError(f"dims must be non-empty for methods {swept}")

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        return cls(
            languages=list(obj["languages"]),
            embedding_files={t: dict(f) for t, f in obj["embedding_files"].items()},
            methods=list(obj["methods"]),
            split_path=obj["split_path"],
            seed=int(obj["seed"]),
            output_dir=obj["output_dir"],
            dims=list(obj["dims"]) if obj.get("dims") else None,
        )

    def ordered_pairs(self) -> list[tuple[str, str]]:
        return [(a, b) for a in self.languages for b in self.languages if a != b]


def default_dims(n_train: int, embed_dim: int) -> list[int]:
    ladder = [d for d in _DEFAULT_DIM_LADDER if d <= min(n_train, embed_dim)]
    top = min(n_train, 768, embed_dim)
    if top not in ladder:
        ladder.append(top)
    return sorted(ladder)


@dataclass(frozen=True)
class _Cell:
    model_tag: str
    source: str
    target: str
    method: str
    dim: int | None  # None for dimension-constant methods

    def key(self) -> str:
        suffix = "" if self.dim is None else f"__d{self.dim}"
        return f"{self.model_tag}__{self.source}-{self.target}__{self.method}{suffix}"


@dataclass
class GridResult:
    reports: list[RetrievalReport] = field(default_factory=list)
    failures: dict[str, str] = field(default_factory=dict)
    n_computed: int = 0
    n_skipped: int = 0


@lru_cache(maxsize=32)
def _load_embeddings(path: str) -> EmbeddingMatrix:
    matrix = read_embeddings(path)
    matrix.values.flags.writeable = False
    return matrix


def _select_rows(matrix: EmbeddingMatrix, doc_ids: list[str], path: str) -> np.ndarray:
    index = {doc_id: i for i, doc_id in enumerate(matrix.doc_ids)}
    missing = [d for d in doc_ids if d not in index]
    if missing:
        raise MisalignmentError(
            f"{path}: {len(missing)} split IDs missing from embeddings "
            f"(first: {missing[0]!r})"
        )
    rows = matrix.values[[index[d] for d in doc_ids]]
    return rows.astype(np.float64)


def _cell_seed(grid_seed: int, cell: _Cell) -> int:
    # Stable across runs and processes, unlike Python's salted hash().
    text = f"{grid_seed}|{cell.key()}".encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


def _run_cell(cell: _Cell, cfg: ExperimentConfig, split: SplitAssignment) -> RetrievalReport:
    src_path = cfg.embedding_files[cell.model_tag][cell.source]
    tgt_path = cfg.embedding_files[cell.model_tag][cell.target]
    src = _load_embeddings(src_path)
    tgt = _load_embeddings(tgt_path)
    x_train = _select_rows(src, split.train_ids, src_path)
    y_train = _select_rows(tgt, split.train_ids, tgt_path)
    x_val = _select_rows(src, split.val_ids, src_path)
    y_val = _select_rows(tgt, split.val_ids, tgt_path)
    model = fit_mapper(
        cell.method, x_train, y_train, dim=cell.dim,
        x_val=x_val, y_val=y_val, seed=_cell_seed(cfg.seed, cell),
    )
    x_test = EmbeddingMatrix(
        _select_rows(src, split.test_ids, src_path).astype(np.float32),
        list(split.test_ids), src.language, src.model_tag,
    )
    y_test = EmbeddingMatrix(
        _select_rows(tgt, split.test_ids, tgt_path).astype(np.float32),
        list(split.test_ids), tgt.language, tgt.model_tag,
    )
    return evaluate_pair(model, x_test, y_test)


def _run_cell_to_file(cell: _Cell, cfg: ExperimentConfig, split: SplitAssignment,
                      report_path: Path) -> tuple[str, str, str]:
    """Worker entry point: returns (status, cell key, payload)."""
    try:
        report = _run_cell(cell, cfg, split)
    except Exception as exc:  # recorded per cell; the grid keeps going
        return ("error", cell.key(), f"{type(exc).__name__}: {exc}")
    report_path.write_text(report.to_json() + "\n", encoding="utf-8")
    return ("ok", cell.key(), report.to_json())


def _enumerate_cells(cfg: ExperimentConfig, split: SplitAssignment) -> list[_Cell]:
    if cfg.dims is not None:
        swept_dims = {m: list(cfg.dims) for m in _SWEPT_METHODS}
    else:
        any_tag = sorted(cfg.embedding_files)[0]
        any_path = cfg.embedding_files[any_tag][cfg.languages[0]]
        k = _load_embeddings(any_path).dim
        n_train = len(split.train_ids)
        swept_dims = {
            "lca": [d for d in default_dims(n_train, k) if d <= n_train],
            "lcc": [d for d in default_dims(n_train, k) if d <= min(n_train, 2 * k)],
        }
    cells = []
    for model_tag in sorted(cfg.embedding_files):
        for source, target in cfg.ordered_pairs():
            for method in cfg.methods:
                if method in _SWEPT_METHODS:
                    for dim in swept_dims[method]:
                        cells.append(_Cell(model_tag, source, target, method, dim))
                else:
                    cells.append(_Cell(model_tag, source, target, method, None))
    return cells


def run_grid(cfg: ExperimentConfig, force: bool = False, workers: int = 1) -> GridResult:
    """Run every cell of the grid, reusing reports already on disk."""
    split = load_splits(cfg.split_path)
    reports_dir = Path(cfg.output_dir) / "reports"
    reports_dir.mkdir(parents=True, exist_ok=True)
    cells = _enumerate_cells(cfg, split)

    result = GridResult()
    pending: list[tuple[_Cell, Path]] = []
    for cell in cells:
        report_path = reports_dir / f"{cell.key()}.json"
        if report_path.exists() and not force:
            result.reports.append(
                RetrievalReport.from_json(report_path.read_text(encoding="utf-8"))
            )
            result.n_skipped += 1
        else:
            pending.append((cell, report_path))

    if workers <= 1:
        outcomes = [
            _run_cell_to_file(cell, cfg, split, path) for cell, path in pending
        ]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_cell_to_file, cell, cfg, split, path)
                for cell, path in pending
            ]
            outcomes = [f.result() for f in futures]

    for status, key, payload in outcomes:
        if status == "ok":
            result.reports.append(RetrievalReport.from_json(payload))
            result.n_computed += 1
        else:
            result.failures[key] = payload
            (reports_dir / f"{key}.error.txt").write_text(payload + "\n", encoding="utf-8")
    return result


def aggregate(
    reports: list[RetrievalReport], dims: list[int] | None = None
) -> tuple[dict, dict]:
    """Macro-averages: a Table-1-style table keyed (model_tag, method) and
    a sweep series keyed (method, dim).

    Dimension-constant methods contribute one value replicated across
    the dims axis so every method draws a full line in the sweep.
    """
    if not reports:
        raise ValueError("no reports to aggregate")

    def mean_metrics(items: list[RetrievalReport]) -> tuple[float, float]:
        # fsum: correctly rounded regardless of report order, so
        # aggregation commutes with permutation.
        mrr = math.fsum(r.mean_reciprocal_rank for r in items) / len(items)
        rate = math.fsum(r.mate_retrieval_rate for r in items) / len(items)
        return mrr, rate

    table: dict[tuple[str, str], tuple[float, float]] = {}
    by_row: dict[tuple[str, str], list[RetrievalReport]] = {}
    for r in reports:
        by_row.setdefault((r.model_tag, r.method), []).append(r)
    for key in sorted(by_row):
        table[key] = mean_metrics(by_row[key])

    if dims is None:
        dims = sorted({r.dim for r in reports if r.method in _SWEPT_METHODS})
    sweep: dict[tuple[str, int], tuple[float, float]] = {}
    by_method: dict[str, list[RetrievalReport]] = {}
    for r in reports:
        by_method.setdefault(r.method, []).append(r)
    for method in sorted(by_method):
        items = by_method[method]
        if method in _SWEPT_METHODS:
            by_dim: dict[int, list[RetrievalReport]] = {}
            for r in items:
                by_dim.setdefault(r.dim, []).append(r)
            for dim in sorted(by_dim):
                sweep[(method, dim)] = mean_metrics(by_dim[dim])
        else:
            value = mean_metrics(items)
            for dim in dims or [items[0].dim]:
                sweep[(method, dim)] = value
    return table, sweep


def emit_outputs(table: dict, sweep: dict, output_dir,
                 reports: list[RetrievalReport] | None = None) -> list[Path]:
    """Write table.csv, sweep.csv and (when reports are given) report.jsonl.

    Output is byte-deterministic: rows are sorted and floats fixed to
    six decimals.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    table_path = out / "table.csv"
    lines = ["model,mapping,mrr,mate_rate"]
    for (model_tag, method) in sorted(table):
        mrr, rate = table[(model_tag, method)]
        lines.append(f"{model_tag},{method},{mrr:.6f},{rate:.6f}")
    table_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(table_path)

    sweep_path = out / "sweep.csv"
    lines = ["method,dim,mrr,mate_rate"]
    for (method, dim) in sorted(sweep):
        mrr, rate = sweep[(method, dim)]
        lines.append(f"{method},{dim},{mrr:.6f},{rate:.6f}")
    sweep_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(sweep_path)

    if reports is not None:
        jsonl_path = out / "report.jsonl"
        payload = "".join(
            r.to_json() + "\n"
            for r in sorted(reports, key=lambda r: (r.model_tag, r.pair, r.method, r.dim))
        )
        jsonl_path.write_text(payload, encoding="utf-8")
        written.append(jsonl_path)
    return written
