import json
from collections import Counter

import pytest

from tldralign.corpus import (
    AlignmentError,
    CorpusParseError,
    DocumentIdError,
    DocumentRecord,
    SplitError,
    align_languages,
    load_splits,
    make_split,
    parse_corpus_file,
    read_corpus_jsonl,
    repair_encoding,
    save_splits,
    split_doc_ids,
    write_corpus_jsonl,
)
from tldralign.rng import Xoshiro256StarStar

from helpers import write_toy_corpus


class TestRepairEncoding:
    def test_percent_spelling(self):
        assert repair_encoding("d%eacutecision") == "décision"

    def test_clean_text_identity(self):
        assert repair_encoding("plain ascii") == "plain ascii"

    def test_mixed_spellings(self):
        # Table entries applied by hand: agrave, ocirc, eacute.
        assert repair_encoding("&agrave; c%ocirct%eacute") == "à côté"

    def test_uppercase_variants(self):
        assert repair_encoding("%Eacutetat &Ouml;l") == "État Öl"

    def test_semicolon_consumed(self):
        assert repair_encoding("d&eacute;cision") == "décision"

    def test_unknown_tokens_pass_through_and_tally(self):
        tally = Counter()
        text = "5%amp of &nbsp; x"
        assert repair_encoding(text, unknown_tally=tally) == text
        assert tally["%amp"] == 1 and tally["&nbsp;"] == 1

    def test_idempotent_on_random_corruptions(self):
        gen = Xoshiro256StarStar(13)
        entities = ["%eacute", "&agrave;", "%Ouml", "&szlig;", "%oelig", "&Icirc;"]
        words = ["der", "conseil", "acte", "r", "", "2006"]
        for _ in range(300):
            parts = []
            for _ in range(gen.below(12) + 1):
                parts.append(words[gen.below(len(words))])
                if gen.below(2):
                    parts.append(entities[gen.below(len(entities))])
            text = " ".join(parts)
            once = repair_encoding(text)
            assert repair_encoding(once) == once

    def test_custom_table(self):
        assert repair_encoding("%abc", table={"abc": "Z"}) == "Z"


class TestParseCorpusFile:
    def test_document_count_and_ids(self, tmp_path):
        write_toy_corpus(tmp_path, languages=("en",))
        records = parse_corpus_file(tmp_path / "en" / "docs.xml", "en")
        assert len(records) == 6
        assert [r.doc_id for r in records] == [f"d{i}" for i in range(1, 7)]
        assert all(r.language == "en" for r in records)

    def test_whitespace_normalized(self, tmp_path):
        path = tmp_path / "one.xml"
        path.write_text('<corpus><document id="x"><p>  a  b </p></document></corpus>')
        (record,) = parse_corpus_file(path, "en")
        assert record.text == "a b"

    def test_no_residual_corruption(self, tmp_path):
        write_toy_corpus(tmp_path, languages=("fr",))
        records = parse_corpus_file(tmp_path / "fr" / "docs.xml", "fr")
        assert all("%eacute" not in r.text for r in records)
        assert "comité a adopté la décision" in records[0].text

    def test_multiple_paragraphs_joined(self, tmp_path):
        path = tmp_path / "multi.xml"
        path.write_text(
            '<corpus><document id="x"><p>first</p><p>second</p></document></corpus>'
        )
        (record,) = parse_corpus_file(path, "en")
        assert record.text == "first second"

    def test_root_level_document(self, tmp_path):
        path = tmp_path / "root.xml"
        path.write_text('<document id="solo"><p>body</p></document>')
        (record,) = parse_corpus_file(path, "en")
        assert record.doc_id == "solo" and record.text == "body"

    def test_malformed_xml_reports_position(self, tmp_path):
        path = tmp_path / "bad.xml"
        path.write_text("<corpus>\n  <document id='x'>\n</corpus>")
        with pytest.raises(CorpusParseError, match=r"line \d+, column \d+"):
            parse_corpus_file(path, "en")

    def test_missing_id_names_element(self, tmp_path):
        path = tmp_path / "noid.xml"
        path.write_text(
            '<corpus><document id="a"><p>x</p></document>'
            "<document><p>y</p></document></corpus>"
        )
        with pytest.raises(DocumentIdError, match="child #1"):
            parse_corpus_file(path, "en")


class TestAlignment:
    def records(self, lang, ids):
        return [DocumentRecord(i, lang, f"text {i}") for i in ids]

    def test_intersection(self):
        aligned = align_languages({
            "en": self.records("en", ["a", "b", "c"]),
            "fr": self.records("fr", ["b", "c", "d"]),
        })
        assert aligned.doc_ids == ["b", "c"]
        assert aligned.texts[("fr", "b")] == "text b"

    def test_disjoint_sets_error_with_counts(self):
        with pytest.raises(AlignmentError, match="en=2.*fr=2"):
            align_languages({
                "en": self.records("en", ["a", "b"]),
                "fr": self.records("fr", ["c", "d"]),
            })

    def test_order_insensitive(self):
        forward = align_languages({
            "en": self.records("en", ["a", "b", "c"]),
            "fr": self.records("fr", ["c", "a", "b"]),
        })
        backward = align_languages({
            "en": self.records("en", ["c", "b", "a"]),
            "fr": self.records("fr", ["a", "b", "c"]),
        })
        assert forward == backward

    def test_duplicate_id_rejected(self):
        with pytest.raises(AlignmentError, match="duplicate"):
            align_languages({
                "en": self.records("en", ["a", "a"]),
                "fr": self.records("fr", ["a"]),
            })

    def test_needs_two_languages(self):
        with pytest.raises(AlignmentError):
            align_languages({"en": self.records("en", ["a"])})

    def test_three_language_toy_corpus(self, tmp_path):
        write_toy_corpus(tmp_path, languages=("en", "fr", "de"),
                         extra_ids={"en": ["only-en"], "de": ["only-de"]})
        per_language = {
            lang: parse_corpus_file(tmp_path / lang / "docs.xml", lang)
            for lang in ("en", "fr", "de")
        }
        aligned = align_languages(per_language)
        assert aligned.doc_ids == [f"d{i}" for i in range(1, 7)]


class TestSplits:
    def test_exact_sizes_n10(self):
        split = split_doc_ids([f"d{i}" for i in range(10)], seed=1)
        assert (len(split.train_ids), len(split.val_ids), len(split.test_ids)) == (6, 2, 2)

    def test_corpus_scale_sizes(self):
        # floor(0.6 * 6538) = 3922, floor(0.2 * 6538) = 1307, remainder 1309.
        split = split_doc_ids([f"id{i:05d}" for i in range(6538)], seed=0)
        assert len(split.train_ids) == 3922
        assert len(split.val_ids) == 1307
        assert len(split.test_ids) == 1309

    def test_deterministic(self):
        ids = [f"x{i}" for i in range(37)]
        s1 = split_doc_ids(ids, seed=99)
        s2 = split_doc_ids(ids, seed=99)
        assert (s1.train_ids, s1.val_ids, s1.test_ids) == (s2.train_ids, s2.val_ids, s2.test_ids)
        s3 = split_doc_ids(ids, seed=100)
        assert s3.train_ids != s1.train_ids

    def test_input_order_irrelevant(self):
        ids = [f"x{i}" for i in range(25)]
        s1 = split_doc_ids(ids, seed=5)
        s2 = split_doc_ids(list(reversed(ids)), seed=5)
        assert s1 == s2

    def test_too_small(self):
        with pytest.raises(SplitError):
            split_doc_ids(["a", "b", "c", "d"], seed=0)

    def test_partition_property(self):
        gen = Xoshiro256StarStar(21)
        for _ in range(200):
            n = 5 + gen.below(300)
            seed = gen.next_u64()
            ids = [f"doc{i}" for i in range(n)]
            split = split_doc_ids(ids, seed=seed)
            assert len(split.train_ids) == int(0.6 * n)
            assert len(split.val_ids) == int(0.2 * n)
            parts = split.train_ids + split.val_ids + split.test_ids
            assert sorted(parts) == sorted(ids)

    def test_make_split_uses_corpus_ids(self):
        aligned = align_languages({
            "en": [DocumentRecord(f"d{i}", "en", "t") for i in range(8)],
            "fr": [DocumentRecord(f"d{i}", "fr", "t") for i in range(8)],
        })
        split = make_split(aligned, seed=3)
        assert sorted(split.train_ids + split.val_ids + split.test_ids) == aligned.doc_ids


class TestSerialization:
    def test_jsonl_roundtrip(self, tmp_path):
        records = [DocumentRecord("a", "fr", "décision à côté"),
                   DocumentRecord("b", "fr", "autre texte")]
        path = tmp_path / "fr.jsonl"
        write_corpus_jsonl(records, path)
        lines = path.read_text(encoding="utf-8").strip().split("\n")
        assert json.loads(lines[0]) == {"id": "a", "lang": "fr", "text": "décision à côté"}
        assert read_corpus_jsonl(path) == records

    def test_splits_roundtrip(self, tmp_path):
        split = split_doc_ids([f"s{i}" for i in range(12)], seed=7)
        path = tmp_path / "splits.json"
        save_splits(split, path)
        assert load_splits(path) == split
