"""Command-line front end: prep, synth, fit, eval, sweep."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .evaluation import evaluate_pair
from .experiment import ExperimentConfig, aggregate, emit_outputs, run_grid
from .mappers import METHODS, fit_mapper, load_model, save_model
from .store import (
    EmbeddingMatrix,
    SyntheticSpec,
    generate_synthetic_pair,
    read_embeddings,
    write_embeddings,
)

log = logging.getLogger(__name__)


def _cmd_prep(args) -> int:
    corpus_dir = Path(args.corpus_dir)
    languages = [lang.strip() for lang in args.languages.split(",") if lang.strip()]
    per_language = {}
    for lang in languages:
        lang_dir = corpus_dir / lang
        files = sorted(lang_dir.rglob("*.xml"))
        if not files:
            print(f"prep: no XML files under {lang_dir}", file=sys.stderr)
            return 2
        records = []
        for path in files:
            records.extend(corpus_mod.parse_corpus_file(path, lang))
        per_language[lang] = records
    aligned = corpus_mod.align_languages(per_language)
    split = corpus_mod.make_split(aligned, args.seed)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for lang in languages:
        records = [
            corpus_mod.DocumentRecord(doc_id, lang, aligned.texts[(lang, doc_id)])
            for doc_id in aligned.doc_ids
        ]
        corpus_mod.write_corpus_jsonl(records, out_dir / f"{lang}.jsonl")
    corpus_mod.save_splits(split, out_dir / "splits.json")
    print(
        f"prep: {aligned.n_docs} aligned documents across {len(languages)} languages; "
        f"split {len(split.train_ids)}/{len(split.val_ids)}/{len(split.test_ids)}"
    )
    return 0


def _cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n_docs=args.docs, latent_dim=args.latent_dim, embed_dim=args.embed_dim,
        noise_sigma=args.noise, seed=args.seed,
    )
    x, y, _ = generate_synthetic_pair(spec)
    write_embeddings(x, args.out_x)
    write_embeddings(y, args.out_y)
    print(f"synth: wrote {x.n_docs}x{x.dim} pair to {args.out_x} and {args.out_y}")
    return 0


def _split_matrices(embeddings: EmbeddingMatrix, ids: list[str], path: str):
    index = {doc_id: i for i, doc_id in enumerate(embeddings.doc_ids)}
    missing = [d for d in ids if d not in index]
    if missing:
        raise SystemExit(f"{path}: split ID {missing[0]!r} not present in embeddings")
    return embeddings.values[[index[d] for d in ids]].astype(np.float64)


def _cmd_fit(args) -> int:
    source = read_embeddings(args.source)
    target = read_embeddings(args.target)
    split = corpus_mod.load_splits(args.split)
    x_train = _split_matrices(source, split.train_ids, args.source)
    y_train = _split_matrices(target, split.train_ids, args.target)
    x_val = _split_matrices(source, split.val_ids, args.source)
    y_val = _split_matrices(target, split.val_ids, args.target)
    model = fit_mapper(
        args.method, x_train, y_train, dim=args.dim,
        x_val=x_val, y_val=y_val, seed=args.seed,
    )
    save_model(model, args.model_out)
    print(f"fit: {args.method} model (dim {model.dim}) saved to {args.model_out}")
    return 0


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    source = read_embeddings(args.source)
    target = read_embeddings(args.target)
    split = corpus_mod.load_splits(args.split)
    x_test = EmbeddingMatrix(
        _split_matrices(source, split.test_ids, args.source).astype(np.float32),
        list(split.test_ids), source.language, source.model_tag,
    )
    y_test = EmbeddingMatrix(
        _split_matrices(target, split.test_ids, args.target).astype(np.float32),
        list(split.test_ids), target.language, target.model_tag,
    )
    report = evaluate_pair(model, x_test, y_test)
    Path(args.report).write_text(report.to_json() + "\n", encoding="utf-8")
    print(
        f"eval: {report.pair[0]}->{report.pair[1]} {report.method} "
        f"rate={report.mate_retrieval_rate:.4f} mrr={report.mean_reciprocal_rank:.4f}"
    )
    return 0


def _cmd_sweep(args) -> int:
    cfg = ExperimentConfig.from_json_file(args.config)
    result = run_grid(cfg, force=args.force, workers=args.workers)
    if result.reports:
        table, sweep = aggregate(result.reports, dims=cfg.dims)
        emit_outputs(table, sweep, cfg.output_dir, reports=result.reports)
    print(
        f"sweep: {result.n_computed} cells computed, {result.n_skipped} reused, "
        f"{len(result.failures)} failed"
    )
    for key, message in sorted(result.failures.items()):
        print(f"  FAILED {key}: {message}", file=sys.stderr)
    return 1 if result.failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tldralign",
        description="Align monolingual document-embedding spaces and evaluate "
                    "cross-lingual mate retrieval.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="parse, repair, align and split an XML corpus")
    p.add_argument("--corpus-dir", required=True)
    p.add_argument("--languages", required=True, help="comma-separated ISO codes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_prep)

    p = sub.add_parser("synth", help="generate a synthetic aligned embedding pair")
    p.add_argument("--docs", type=int, required=True)
    p.add_argument("--latent-dim", type=int, required=True)
    p.add_argument("--embed-dim", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-x", required=True)
    p.add_argument("--out-y", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("fit", help="fit a mapping model on the train split")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("eval", help="evaluate a fitted model on the test split")
    p.add_argument("--model", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="run the full experiment grid from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
