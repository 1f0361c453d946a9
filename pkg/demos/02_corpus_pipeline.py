"""
From corrupted XML to aligned, split corpus files
=================================================

A miniature three-language corpus in the JRC-Acquis style: per-language
XML files whose accented letters were mangled into entity-like tokens
("%eacute"), with some documents missing from some languages. The
pipeline repairs the text, keeps the documents shared by every
language, and cuts a deterministic 60/20/20 split.
"""

import tempfile
from pathlib import Path

from tldralign.corpus import (
    align_languages,
    make_split,
    parse_corpus_file,
    repair_encoding,
    save_splits,
    write_corpus_jsonl,
    DocumentRecord,
)

# %% Entity repair on its own is a plain string operation.
print(repair_encoding("Le comit%eacute a vot%eacute &agrave; Strasbourg"))

# %% Write a toy corpus: six shared documents, plus one French-only.
workdir = Path(tempfile.mkdtemp(prefix="tldralign-demo-"))
texts = {
    "en": "The committee adopted the %oelig;uvre decision",
    "fr": "Le comit%eacute a adopt%eacute la d%eacutecision",
    "de": "Der Ausschuss %uuml;bernahm den Beschlu%szlig",
}
for lang, body in texts.items():
    lang_dir = workdir / lang
    lang_dir.mkdir(parents=True)
    extra = '<document id="fr-only"><p>seulement</p></document>' if lang == "fr" else ""
    docs = "\n".join(
        f'<document id="doc-{i}"><p>  {body} · {i}  </p></document>' for i in range(6)
    )
    (lang_dir / "2006.xml").write_text(f"<corpus>\n{docs}\n{extra}\n</corpus>")

# %% Parse and repair each language, then align.
per_language = {
    lang: parse_corpus_file(workdir / lang / "2006.xml", lang) for lang in texts
}
for record in per_language["fr"][:2]:
    print(f"{record.doc_id}: {record.text}")

aligned = align_languages(per_language)
print(f"\naligned documents: {aligned.doc_ids} (fr-only dropped)")

# %% Deterministic split and the standard output files.
split = make_split(aligned, seed=7)
print(f"train={split.train_ids} val={split.val_ids} test={split.test_ids}")

out_dir = workdir / "prepped"
out_dir.mkdir()
for lang in aligned.languages:
    records = [
        DocumentRecord(doc_id, lang, aligned.texts[(lang, doc_id)])
        for doc_id in aligned.doc_ids
    ]
    write_corpus_jsonl(records, out_dir / f"{lang}.jsonl")
save_splits(split, out_dir / "splits.json")
print(f"\nwrote {sorted(p.name for p in out_dir.iterdir())} under {out_dir}")
