import json

import pytest
from hypothesis import given, settings, strategies as st

from revpolar.corpus import (CorpusError, ParseStats, Polarity, ReviewDocument, parse_review_records,
                             read_corpus, segment_sentences, split_dataset, split_sentences, write_corpus)


def blitzer_block(text, uid="x"):
    return (f"<review>\n<unique_id>\n{uid}\n</unique_id>\n<rating>\n5.0\n</rating>\n"
            f"<review_text>\n{text}\n</review_text>\n</review>\n")


class TestParse:
    def test_thousand_blocks(self, tmp_path):
        path = tmp_path / "positive.review"
        path.write_text("".join(blitzer_block(f"Review number {i} & more.") for i in range(1000)))
        docs = parse_review_records(path, "beauty", Polarity.POSITIVE)
        assert len(docs) == 1000
        assert all(d.label is Polarity.POSITIVE for d in docs)
        assert len({d.id for d in docs}) == 1000
        assert docs[0].id == "beauty-positive-0"
        assert docs[0].sentences == []

    def test_empty_file(self, tmp_path):
        path = tmp_path / "negative.review"
        path.write_text("")
        stats = ParseStats()
        assert parse_review_records(path, "books", "negative", stats) == []
        assert stats.skipped == 0

    def test_entity_decoding(self, tmp_path):
        path = tmp_path / "positive.review"
        path.write_text(blitzer_block("A &amp; B."))
        [doc] = parse_review_records(path, "kitchen", "positive")
        assert doc.raw_text == "A & B."

    def test_entities_decoded_once(self, tmp_path):
        path = tmp_path / "positive.review"
        path.write_text(blitzer_block("&lt;b&gt; &quot;x&quot; &amp;lt;"))
        [doc] = parse_review_records(path, "kitchen", "positive")
        assert doc.raw_text == '<b> "x" &lt;'

    def test_malformed_blocks_counted(self, tmp_path):
        path = tmp_path / "positive.review"
        path.write_text(blitzer_block("Good.") + "<review>\n<rating>1</rating>\n</review>\n"
                        + "<review>\n<review_text>never closed\n" + blitzer_block("Fine."))
        stats = ParseStats()
        docs = parse_review_records(path, "beauty", "positive", stats)
        assert [d.raw_text for d in docs] == ["Good.", "Fine."]
        assert stats.skipped == 2

    def test_unescaped_ampersand_tolerated(self, tmp_path):
        path = tmp_path / "positive.review"
        path.write_text(blitzer_block("Salt & pepper grinder. Works <well>."))
        [doc] = parse_review_records(path, "kitchen", "positive")
        assert doc.raw_text == "Salt & pepper grinder. Works <well>."

    def test_jsonl_records(self, tmp_path):
        path = tmp_path / "positive.jsonl"
        path.write_text('{"id": "a1", "text": "One."}\n{"text": "Two."}\nnot json\n{"id": 3}\n')
        stats = ParseStats()
        docs = parse_review_records(path, "software", "positive", stats)
        assert [d.id for d in docs] == ["a1", "software-positive-1"]
        assert stats.skipped == 2

    def test_missing_file_names_path(self, tmp_path):
        with pytest.raises(CorpusError, match="nope.review"):
            parse_review_records(tmp_path / "nope.review", "beauty", "positive")

    def test_invalid_utf8_replaced_and_counted(self, tmp_path):
        path = tmp_path / "positive.review"
        path.write_bytes(blitzer_block("caf\xe9 ok.").encode("latin-1"))
        stats = ParseStats()
        [doc] = parse_review_records(path, "beauty", "positive", stats)
        assert doc.raw_text == "caf� ok."
        assert stats.replaced_chars == 1


class TestSegment:
    @pytest.mark.parametrize("text, expected", [
        ("Great blender. Broke in a week!", ["Great blender.", "Broke in a week!"]),
        ("I paid 3.5 stars worth.", ["I paid 3.5 stars worth."]),
        ("no terminator here", ["no terminator here"]),
        ("Ask Dr. Smith. He knows.", ["Ask Dr. Smith.", "He knows."]),
        ("Pots, pans, etc. Were all fine.", ["Pots, pans, etc. Were all fine."]),
        ("Use it e.g. For soup. Good?! Yes.", ["Use it e.g. For soup.", "Good?!", "Yes."]),
        ("He said \"stop.\" Then left.", ["He said \"stop.\"", "Then left."]),
        ("lower case. after period", ["lower case. after period"]),
    ])
    def test_rules(self, text, expected):
        assert split_sentences(text) == expected

    def test_indices_contiguous(self):
        doc = segment_sentences(ReviewDocument("d", "beauty", Polarity.POSITIVE, "A b. C d. E f."))
        assert [s.index for s in doc.sentences] == [0, 1, 2]

    def test_empty_text_rejected(self):
        with pytest.raises(CorpusError):
            segment_sentences(ReviewDocument("d", "beauty", Polarity.POSITIVE, "   "))

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.sampled_from(list("aB3 .!?\n\"'()") + ["Dr.", "etc.", " X", "e.g.", "3.5"]), min_size=1)
           .map("".join))
    def test_segmentation_preserves_characters(self, text):
        pieces = split_sentences(text)
        assert "".join("".join(p.split()) for p in pieces) == "".join(text.split())
        if text.strip():
            assert pieces


def make_corpus(n_pos, n_neg, domain="beauty"):
    docs = [ReviewDocument(f"{domain}-p{i}", domain, Polarity.POSITIVE, f"Good {i}.") for i in range(n_pos)]
    docs += [ReviewDocument(f"{domain}-n{i}", domain, Polarity.NEGATIVE, f"Bad {i}.") for i in range(n_neg)]
    return docs


class TestSplit:
    def test_eighty_twenty_sizes(self):
        split = split_dataset(make_corpus(1000, 1000), 0.8, seed=1)
        for label in Polarity:
            assert sum(d.label is label for d in split.train) == 800
            assert sum(d.label is label for d in split.test) == 200

    def test_small_stratified(self):
        split = split_dataset(make_corpus(5, 5), 0.8, seed=3)
        assert sum(d.label is Polarity.POSITIVE for d in split.train) == 4
        assert sum(d.label is Polarity.NEGATIVE for d in split.train) == 4
        assert len(split.test) == 2

    def test_deterministic(self):
        corpus = make_corpus(50, 40) + make_corpus(10, 12, "books")
        a, b = split_dataset(corpus, 0.8, 11), split_dataset(corpus, 0.8, 11)
        assert [d.id for d in a.train] == [d.id for d in b.train]
        assert [d.id for d in split_dataset(corpus, 0.8, 12).train] != [d.id for d in a.train]

    def test_partition_and_ratio_per_cell(self):
        corpus = make_corpus(37, 23) + make_corpus(11, 9, "books")
        split = split_dataset(corpus, 0.7, 5)
        train_ids, test_ids = {d.id for d in split.train}, {d.id for d in split.test}
        assert not train_ids & test_ids
        assert train_ids | test_ids == {d.id for d in corpus}
        for domain in ("beauty", "books"):
            for label in Polarity:
                n_tr = sum(d.domain == domain and d.label is label for d in split.train)
                n_te = sum(d.domain == domain and d.label is label for d in split.test)
                assert abs(n_tr - 0.7 * (n_tr + n_te)) <= 1

    def test_tiny_cell_rejected(self):
        with pytest.raises(CorpusError, match="stratify"):
            split_dataset(make_corpus(1, 5), 0.8, 0)

    @pytest.mark.parametrize("ratio", [0.0, 1.0, -0.2])
    def test_bad_ratio(self, ratio):
        with pytest.raises(CorpusError):
            split_dataset(make_corpus(5, 5), ratio, 0)


def test_jsonl_round_trip(tmp_path):
    src = tmp_path / "positive.review"
    src.write_text(blitzer_block("Fish &amp; chips. Tasty éclair!") + blitzer_block("Meh."))
    docs = [segment_sentences(d) for d in parse_review_records(src, "other", "positive")]
    out = tmp_path / "corpus.jsonl"
    write_corpus(docs, out)
    again = read_corpus(out)
    key = lambda d: (d.id, d.domain, d.label, d.raw_text)
    assert [key(d) for d in again] == [key(d) for d in docs]
    assert [s.text for s in again[0].sentences] == ["Fish & chips.", "Tasty éclair!"]
    assert json.loads(out.read_text().splitlines()[0])["label"] == "positive"
