import json

import numpy as np
import pytest

from stylokit.corpus import Corpus, Document, preprocess
from stylokit.errors import DataError, InsufficientDataError, StylokitError
from stylokit.stylevec import (
    ScoreTable,
    StyleVector,
    TableScorer,
    dimension_report,
    export_distillation_dataset,
    load_vectors,
    regression_mse,
    save_vectors,
    vectorize,
    vectorize_corpus,
    vectorize_corpus_from_table,
    vectorize_sentences,
)
from stylokit.vocab import StyleAttribute, Vocabulary


def small_vocab(*texts):
    return Vocabulary(
        [StyleAttribute(i, t, 1, "mined") for i, t in enumerate(texts)]
    )


class ConstantScorer:
    def __init__(self, value):
        self.value = value

    def score(self, text, attribute):
        return self.value


class MapScorer:
    """Scores by substring presence: attribute's last word in text -> 1."""

    def score(self, text, attribute):
        needle = attribute.rstrip(".").split()[-1]
        return 1.0 if needle in text else 0.0


class TestStyleVector:
    def test_valid_vector(self):
        vec = StyleVector([0.0, 0.5, 1.0], "vid", "doc", "auth")
        assert vec.dimension == 3
        assert len(vec) == 3
        assert vec.values.dtype == np.float64

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="lie in"):
            StyleVector([0.1, 1.2])
        with pytest.raises(ValueError, match="lie in"):
            StyleVector([-0.1, 0.2])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            StyleVector([0.1, float("nan")])

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            StyleVector([[0.1, 0.2]])
        with pytest.raises(ValueError):
            StyleVector([])


class TestVectorize:
    def test_dimension_order_follows_vocabulary(self):
        vocab = small_vocab("The author is using apples", "The author is using pears")
        vec = vectorize("apples only here", vocab, MapScorer())
        assert vec.values.tolist() == [1.0, 0.0]
        assert vec.vocab_id == vocab.vocab_id

    def test_scores_clamped(self):
        vocab = small_vocab("The author is using x")
        vec = vectorize("text", vocab, ConstantScorer(1.7))
        assert vec.values.tolist() == [1.0]
        vec = vectorize("text", vocab, ConstantScorer(-0.3))
        assert vec.values.tolist() == [0.0]

    def test_scorer_exception_wrapped(self):
        vocab = small_vocab("The author is using x")

        class Boom:
            def score(self, text, attribute):
                raise RuntimeError("kaput")

        with pytest.raises(StylokitError, match="dimension 0"):
            vectorize("text", vocab, Boom())

    def test_non_finite_score_rejected(self):
        vocab = small_vocab("The author is using x")
        with pytest.raises(StylokitError, match="non-finite"):
            vectorize("text", vocab, ConstantScorer(float("inf")))

    def test_vectorize_corpus_keeps_ids(self):
        vocab = small_vocab("The author is using apples")
        corpus = Corpus([Document("d1", "a1", "apples"), Document("d2", "a2", "none")])
        vecs = vectorize_corpus(corpus, vocab, MapScorer())
        assert [v.doc_id for v in vecs] == ["d1", "d2"]
        assert [v.author_id for v in vecs] == ["a1", "a2"]
        assert [v.values.tolist() for v in vecs] == [[1.0], [0.0]]


class TestSentenceReports:
    def test_vectorize_sentences_shape(self):
        vocab = small_vocab("The author is using apples", "The author is using pears")
        acts = vectorize_sentences("I like apples. Pears are fine. Nothing here.", vocab, MapScorer())
        assert len(acts.sentences) == 3
        assert acts.vectors.shape == (3, 2)

    def test_dimension_report_ranks_by_activation(self):
        vocab = small_vocab("The author is using apples")
        text = "No fruit here. Many apples today. Still no fruit."
        report = dimension_report(text, 0, vocab, MapScorer())
        assert report[0] == ("Many apples today.", 1.0)
        assert [s for s, _ in report[1:]] == ["No fruit here.", "Still no fruit."]

    def test_ties_keep_sentence_order(self):
        vocab = small_vocab("The author is using x")
        text = "First sentence. Second sentence. Third sentence."
        report = dimension_report(text, 0, vocab, ConstantScorer(0.5))
        assert [s for s, _ in report] == [
            "First sentence.", "Second sentence.", "Third sentence.",
        ]

    def test_top_k(self):
        vocab = small_vocab("The author is using apples")
        text = "Apples here. apples there. Nothing."
        report = dimension_report(text, 0, vocab, MapScorer(), top_k=1)
        assert len(report) == 1
        with pytest.raises(ValueError):
            dimension_report(text, 0, vocab, MapScorer(), top_k=0)

    def test_dim_out_of_range(self):
        vocab = small_vocab("The author is using x")
        with pytest.raises(ValueError, match="out of range"):
            dimension_report("Text.", 1, vocab, ConstantScorer(0.5))


class TestVectorPersistence:
    def test_round_trip(self, tmp_path):
        vecs = [
            StyleVector([0.25, 0.75], "vid1", "d1", "a1"),
            StyleVector([1.0, 0.0], None, "d2", None),
        ]
        path = tmp_path / "vectors.jsonl"
        save_vectors(vecs, path)
        loaded = load_vectors(path)
        assert [v.doc_id for v in loaded] == ["d1", "d2"]
        assert loaded[0].author_id == "a1"
        assert loaded[0].vocab_id == "vid1"
        assert loaded[1].author_id is None
        assert np.array_equal(loaded[0].values, vecs[0].values)

    def test_load_reports_line_numbers(self, tmp_path):
        path = tmp_path / "vectors.jsonl"
        path.write_text('{"doc_id": "d", "values": [0.5]}\n{"doc_id": "e", "values": [2.5]}\n')
        with pytest.raises(DataError, match="line 2"):
            load_vectors(path)

    def test_save_byte_stable(self, tmp_path):
        vecs = [StyleVector([0.5], "v", "d", "a")]
        one, two = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_vectors(vecs, one)
        save_vectors(vecs, two)
        assert one.read_bytes() == two.read_bytes()


class TestScoreTable:
    def test_doc_id_lookup(self):
        table = ScoreTable({("d1", 0): 0.4})
        assert table.score_for("d1", "whatever", 0) == 0.4

    def test_text_hash_fallback(self):
        key = ScoreTable.text_key("hello")
        table = ScoreTable({(key, 2): 0.9})
        assert table.score_for("unknown-doc", "hello", 2) == 0.9
        assert table.score_for(None, "hello", 2) == 0.9

    def test_missing_entry_raises(self):
        table = ScoreTable({})
        with pytest.raises(DataError, match="no stored score"):
            table.score_for("d", "t", 0)

    def test_from_file(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        rows = [
            {"doc_id": "d1", "dim": 0, "score": 0.25},
            {"doc_id": "d1", "dim": 1, "score": 0.75},
        ]
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))
        table = ScoreTable.from_file(path)
        assert table.score_for("d1", "", 1) == 0.75

    def test_table_scorer_resolves_dimensions(self):
        vocab = small_vocab("The author is using a", "The author is using b")
        key = ScoreTable.text_key("some text")
        table = ScoreTable({(key, 0): 0.1, (key, 1): 0.8})
        scorer = TableScorer(table, vocab)
        assert scorer.score("some text", "The author is using b") == 0.8
        with pytest.raises(DataError, match="not in vocabulary"):
            scorer.score("some text", "The author is using z")

    def test_vectorize_corpus_from_table(self):
        vocab = small_vocab("The author is using a", "The author is using b")
        corpus = Corpus([Document("d1", "a1", "text one")])
        table = ScoreTable({("d1", 0): 0.3, ("d1", 1): 1.4})
        vecs = vectorize_corpus_from_table(corpus, vocab, table)
        assert vecs[0].values.tolist() == [0.3, 1.0]
        assert vecs[0].doc_id == "d1"


class TestDistillationExport:
    def _corpus(self, n=6):
        return Corpus(
            [Document(f"d{i}", f"a{i % 2}", f"Sample apples text {i}.") for i in range(n)]
        )

    def test_split_sizes_and_order(self, tmp_path):
        vocab = small_vocab("The author is using apples")
        train_path, val_path = export_distillation_dataset(
            self._corpus(), vocab, MapScorer(), holdout=2, seed=0, out_dir=tmp_path
        )
        train = [json.loads(line) for line in train_path.read_text().splitlines()]
        val = [json.loads(line) for line in val_path.read_text().splitlines()]
        assert len(train) == 4 and len(val) == 2
        assert all(set(r) == {"text", "targets"} for r in train + val)
        assert all(r["targets"] == [1.0] for r in train + val)

    def test_texts_are_preprocessed(self, tmp_path):
        long_text = " ".join(f"Sentence number {i} runs on." for i in range(40))
        corpus = Corpus([Document("d0", "a", long_text), Document("d1", "a", "Short.")])
        vocab = small_vocab("The author is using x")
        train_path, _ = export_distillation_dataset(
            corpus, vocab, ConstantScorer(0.5), holdout=1, seed=1, out_dir=tmp_path
        )
        rows = [json.loads(line) for line in train_path.read_text().splitlines()]
        texts = {r["text"] for r in rows}
        assert texts <= {preprocess(long_text), preprocess("Short.")}

    def test_deterministic_split(self, tmp_path):
        vocab = small_vocab("The author is using apples")
        a = export_distillation_dataset(
            self._corpus(), vocab, MapScorer(), holdout=2, seed=9, out_dir=tmp_path / "one"
        )
        b = export_distillation_dataset(
            self._corpus(), vocab, MapScorer(), holdout=2, seed=9, out_dir=tmp_path / "two"
        )
        assert a[0].read_bytes() == b[0].read_bytes()
        assert a[1].read_bytes() == b[1].read_bytes()

    def test_holdout_validation(self, tmp_path):
        vocab = small_vocab("The author is using x")
        with pytest.raises(InsufficientDataError):
            export_distillation_dataset(
                self._corpus(3), vocab, ConstantScorer(0.5), holdout=3, seed=0, out_dir=tmp_path
            )
        with pytest.raises(ValueError):
            export_distillation_dataset(
                self._corpus(3), vocab, ConstantScorer(0.5), holdout=0, seed=0, out_dir=tmp_path
            )


class TestRegressionMse:
    def test_known_value(self):
        assert regression_mse([[0.0, 0.5]], [[0.5, 0.5]]) == pytest.approx(0.125)

    def test_accepts_style_vectors(self):
        p = [StyleVector([0.2, 0.4]), StyleVector([0.6, 0.8])]
        t = [StyleVector([0.2, 0.4]), StyleVector([0.6, 0.8])]
        assert regression_mse(p, t) == 0.0

    def test_predictions_may_exceed_unit_range(self):
        assert regression_mse(np.array([[1.5]]), np.array([[0.5]])) == pytest.approx(1.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            regression_mse([[0.1, 0.2]], [[0.1]])
