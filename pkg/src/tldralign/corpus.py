"""Multilingual XML corpus ingestion, entity repair, alignment and splits.

The XML layout is JRC-Acquis-like: a file holds one or more document
elements carrying an `id` attribute, with the body text in `<p>`
paragraphs. Some corpus exports corrupted accented letters into
entity-like tokens ("%eacute", "&agrave;"); a fixed repair table maps
those back to their characters.
"""

from __future__ import annotations

import json
import logging
import re
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass

from .rng import Xoshiro256StarStar

log = logging.getLogger(__name__)

__all__ = [
    "DocumentRecord",
    "AlignedCorpus",
    "SplitAssignment",
    "REPAIR_TABLE",
    "repair_encoding",
    "parse_corpus_file",
    "align_languages",
    "make_split",
    "split_doc_ids",
    "CorpusParseError",
    "DocumentIdError",
    "AlignmentError",
    "SplitError",
    "write_corpus_jsonl",
    "read_corpus_jsonl",
    "save_splits",
    "load_splits",
]


class CorpusParseError(ValueError):
    """Malformed corpus XML, with line/column where available."""


class DocumentIdError(ValueError):
    """A document element is missing its ID attribute."""


class AlignmentError(ValueError):
    """Languages could not be aligned into a shared document set."""


class SplitError(ValueError):
    """The corpus is too small to populate train/val/test."""


# Latin-1 accented-letter entities seen corrupted in the corpus, in both
# "%name" and "&name;" spellings, matched case-sensitively. Covers the
# French/German/Dutch/Romanian character inventory, not just the
# attested "%eacute".
_LOWER = {
    "eacute": "é", "egrave": "è", "agrave": "à", "ecirc": "ê", "ocirc": "ô",
    "ccedil": "ç", "uuml": "ü", "ouml": "ö", "auml": "ä", "szlig": "ß",
    "icirc": "î", "acirc": "â", "ucirc": "û", "ugrave": "ù", "iuml": "ï",
    "euml": "ë", "oelig": "œ",
}
_UPPER = {
    "Eacute": "É", "Egrave": "È", "Agrave": "À", "Ecirc": "Ê", "Ocirc": "Ô",
    "Ccedil": "Ç", "Uuml": "Ü", "Ouml": "Ö", "Auml": "Ä",
    "Icirc": "Î", "Acirc": "Â", "Ucirc": "Û", "Ugrave": "Ù", "Iuml": "Ï",
    "Euml": "Ë", "OElig": "Œ",
}
REPAIR_TABLE: dict[str, str] = {**_LOWER, **_UPPER}

_WS_RUN = re.compile(r"\s+")
_ENTITY_LIKE = re.compile(r"[%&][A-Za-z]{2,8};?")


def _build_repair_pattern(table: dict[str, str]) -> re.Pattern:
    # Longest names first so no table entry shadows a longer one.
    names = sorted(table, key=len, reverse=True)
    return re.compile(r"[%&](" + "|".join(map(re.escape, names)) + r");?")


_REPAIR_PATTERN = _build_repair_pattern(REPAIR_TABLE)


def repair_encoding(raw: str, unknown_tally: Counter | None = None,
                    table: dict[str, str] | None = None) -> str:
    """Replace corrupted entity tokens with their original characters.

    Idempotent: repaired text contains no repair-table token, so a
    second pass is the identity. Entity-like tokens outside the table
    pass through unchanged; when `unknown_tally` is given they are
    counted there so callers can surface a warning.
    """
    if table is None:
        pattern, lookup = _REPAIR_PATTERN, REPAIR_TABLE
    else:
        pattern, lookup = _build_repair_pattern(table), table
    repaired = pattern.sub(lambda m: lookup[m.group(1)], raw)
    if unknown_tally is not None:
        for token in _ENTITY_LIKE.findall(repaired):
            unknown_tally[token] += 1
    return repaired


@dataclass
class DocumentRecord:
    doc_id: str
    language: str
    text: str

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")


def _normalize_whitespace(text: str) -> str:
    return _WS_RUN.sub(" ", text).strip()


def _document_elements(root: ET.Element, path) -> list[ET.Element]:
    if root.get("id") is not None:
        return [root]
    children = list(root)
    if not children:
        raise CorpusParseError(f"{path}: no document elements found")
    missing = [
        f"<{child.tag}> (child #{i})"
        for i, child in enumerate(children)
        if child.get("id") is None
    ]
    if missing:
        raise DocumentIdError(
            f"{path}: document elements missing an 'id' attribute: " + ", ".join(missing)
        )
    return children


def _element_text(elem: ET.Element) -> str:
    paragraphs = elem.findall(".//p")
    if paragraphs:
        parts = ["".join(p.itertext()) for p in paragraphs]
    else:
        parts = ["".join(elem.itertext())]
    return " ".join(parts)


def parse_corpus_file(path, language: str,
                      table: dict[str, str] | None = None) -> list[DocumentRecord]:
    """Parse one corpus XML file into cleaned document records.

    Document text is the single-space join of paragraph text nodes,
    entity-repaired and whitespace-normalized.
    """
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        line, column = exc.position
        raise CorpusParseError(
            f"{path}: malformed XML at line {line}, column {column}: {exc.msg}"
        ) from exc
    tally: Counter = Counter()
    records = []
    for elem in _document_elements(tree.getroot(), path):
        text = repair_encoding(_element_text(elem), unknown_tally=tally, table=table)
        records.append(
            DocumentRecord(doc_id=elem.get("id"), language=language,
                           text=_normalize_whitespace(text))
        )
    if tally:
        log.warning(
            "%s: %d unknown entity-like tokens left as-is (%s)",
            path, sum(tally.values()),
            ", ".join(f"{tok} x{cnt}" for tok, cnt in tally.most_common(5)),
        )
    return records


@dataclass
class AlignedCorpus:
    """Documents present in every language, keyed by (language, doc_id)."""

    languages: list[str]
    doc_ids: list[str]
    texts: dict[tuple[str, str], str]

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)


def align_languages(per_language_records: dict[str, list[DocumentRecord]]) -> AlignedCorpus:
    """Keep exactly the doc_ids present in all languages, sorted for determinism."""
    if len(per_language_records) < 2:
        raise AlignmentError("alignment needs at least 2 languages")
    by_language: dict[str, dict[str, str]] = {}
    for language, records in per_language_records.items():
        texts: dict[str, str] = {}
        for record in records:
            if record.doc_id in texts:
                raise AlignmentError(
                    f"duplicate doc_id {record.doc_id!r} in language {language!r}"
                )
            texts[record.doc_id] = record.text
        by_language[language] = texts
    shared = set.intersection(*(set(t) for t in by_language.values()))
    if not shared:
        counts = ", ".join(f"{lang}={len(t)}" for lang, t in by_language.items())
        raise AlignmentError(f"no documents shared across languages ({counts})")
    doc_ids = sorted(shared)
    texts = {
        (language, doc_id): by_language[language][doc_id]
        for language in by_language
        for doc_id in doc_ids
    }
    return AlignedCorpus(languages=list(by_language), doc_ids=doc_ids, texts=texts)


@dataclass
class SplitAssignment:
    train_ids: list[str]
    val_ids: list[str]
    test_ids: list[str]
    seed: int
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)


def split_doc_ids(doc_ids: list[str], seed: int) -> SplitAssignment:
    """Deterministic 60/20/20 split: seeded shuffle of the sorted IDs,
    cut at floor(0.6 n) and floor(0.8 n)."""
    n = len(doc_ids)
    if n < 5:
        raise SplitError(f"cannot split {n} documents into three non-empty sets")
    if len(set(doc_ids)) != n:
        raise SplitError("doc_ids contain duplicates")
    shuffled = Xoshiro256StarStar(seed).shuffled(sorted(doc_ids))
    n_train = int(0.6 * n)
    n_val = int(0.2 * n)
    return SplitAssignment(
        train_ids=shuffled[:n_train],
        val_ids=shuffled[n_train:n_train + n_val],
        test_ids=shuffled[n_train + n_val:],
        seed=seed,
    )


def make_split(corpus: AlignedCorpus, seed: int) -> SplitAssignment:
    return split_doc_ids(corpus.doc_ids, seed)


def write_corpus_jsonl(records: list[DocumentRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(
                {"id": record.doc_id, "lang": record.language, "text": record.text},
                ensure_ascii=False,
            ))
            fh.write("\n")


def read_corpus_jsonl(path) -> list[DocumentRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            records.append(DocumentRecord(obj["id"], obj["lang"], obj["text"]))
    return records


def save_splits(split: SplitAssignment, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(
            {"seed": split.seed, "train": split.train_ids,
             "val": split.val_ids, "test": split.test_ids},
            fh,
        )


def load_splits(path) -> SplitAssignment:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    return SplitAssignment(
        train_ids=list(obj["train"]), val_ids=list(obj["val"]),
        test_ids=list(obj["test"]), seed=int(obj["seed"]),
    )
