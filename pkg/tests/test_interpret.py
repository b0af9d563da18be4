import math

import numpy as np
import pytest

import oracles
from stylokit.embedding import DIAGONAL, EmbeddingLayer
from stylokit.interpret import (
    PairExplanation,
    common_scores,
    distinct_scores,
    explain_pair,
    explain_vectors,
    importance,
    importance_weights,
    rank_common,
    rank_distinct,
)
from stylokit.vocab import StyleAttribute, Vocabulary


def small_vocab(*texts):
    return Vocabulary([StyleAttribute(i, t, 1, "mined") for i, t in enumerate(texts)])


class TestImportance:
    def test_matches_oracle_on_seeded_pairs(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            d = int(rng.integers(2, 9))
            v1 = rng.uniform(0, 1, d)
            v2 = rng.uniform(0, 1, d)
            got = importance(v1, v2)
            want = oracles.importance(v1.tolist(), v2.tolist())
            assert np.allclose(got, want, atol=1e-12)

    def test_worked_example(self):
        got = importance([0.8, 0.2], [0.8, 0.9])
        assert got[0] == pytest.approx(0.0, abs=1e-12)
        assert got[1] == pytest.approx(0.7, abs=1e-12)

    def test_identical_vectors_have_zero_importance(self):
        assert np.all(importance([0.3, 0.4], [0.3, 0.4]) == 0.0)

    def test_single_differing_dimension_carries_full_distance(self):
        v1 = np.array([0.1, 0.5, 0.9])
        v2 = np.array([0.1, 0.2, 0.9])
        got = importance(v1, v2)
        assert got[1] == pytest.approx(0.3, abs=1e-12)
        assert got[0] == got[2] == 0.0

    def test_importance_is_non_negative_and_bounded(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            v1, v2 = rng.uniform(0, 1, 6), rng.uniform(0, 1, 6)
            imp = importance(v1, v2)
            full = np.linalg.norm(v2 - v1)
            assert np.all(imp >= 0.0)
            assert np.all(imp <= full + 1e-12)

    def test_symmetry(self):
        v1, v2 = [0.1, 0.9, 0.4], [0.7, 0.3, 0.4]
        assert np.allclose(importance(v1, v2), importance(v2, v1), atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="differ"):
            importance([0.1], [0.1, 0.2])


class TestImportanceWeights:
    def test_sum_to_one(self):
        rng = np.random.default_rng(12)
        v1, v2 = rng.uniform(0, 1, 7), rng.uniform(0, 1, 7)
        assert importance_weights(v1, v2).sum() == pytest.approx(1.0, abs=1e-12)

    def test_identical_vectors_give_zeros(self):
        weights = importance_weights([0.5, 0.5], [0.5, 0.5])
        assert np.all(weights == 0.0)

    def test_matches_oracle(self):
        v1, v2 = [0.2, 0.6, 0.9], [0.8, 0.1, 0.9]
        assert np.allclose(
            importance_weights(v1, v2), oracles.importance_weights(v1, v2), atol=1e-12
        )


class TestScores:
    def test_common_matches_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            v1, v2 = rng.uniform(0, 1, 5), rng.uniform(0, 1, 5)
            assert np.allclose(
                common_scores(v1, v2),
                oracles.common_scores(v1.tolist(), v2.tolist()),
                atol=1e-12,
            )

    def test_distinct_matches_oracle(self):
        rng = np.random.default_rng(22)
        for _ in range(25):
            v1, v2 = rng.uniform(0, 1, 5), rng.uniform(0, 1, 5)
            assert np.allclose(
                distinct_scores(v1, v2),
                oracles.distinct_scores(v1.tolist(), v2.tolist()),
                atol=1e-12,
            )

    def test_common_favors_shared_presence(self):
        v1 = [0.9, 0.9, 0.1]
        v2 = [0.9, 0.1, 0.2]
        scores = common_scores(v1, v2)
        assert scores[1] > scores[0] or scores[0] == 0.0

    def test_distinct_favors_one_sided_presence(self):
        v1 = [0.95, 0.5]
        v2 = [0.05, 0.5]
        scores = distinct_scores(v1, v2)
        assert scores[0] > 0.0
        assert scores[1] == 0.0


class TestRanking:
    def test_rank_order_and_tie_break(self):
        scores_input = ([0.5, 0.9, 0.9, 0.1], [0.5, 0.1, 0.1, 0.9])
        ranked = rank_distinct(*scores_input)
        dims = [r.dim for r in ranked]
        assert dims[0] < dims[1] or not math.isclose(ranked[0].score, ranked[1].score)
        assert dims == sorted(dims, key=lambda d: (-ranked[dims.index(d)].score, d))

    def test_tied_scores_order_by_dimension(self):
        v1 = [0.8, 0.8, 0.2]
        v2 = [0.2, 0.2, 0.2]
        ranked = rank_distinct(v1, v2)
        assert [r.dim for r in ranked[:2]] == [0, 1]

    def test_attribute_labels_from_vocabulary(self):
        vocab = small_vocab("The author is using a", "The author is using b")
        ranked = rank_common([0.9, 0.1], [0.8, 0.3], vocab)
        assert {r.attribute for r in ranked} == set(vocab.texts)

    def test_placeholder_labels_without_vocabulary(self):
        ranked = rank_common([0.9, 0.1], [0.8, 0.3])
        assert ranked[0].attribute.startswith("dim_")

    def test_top_k_clamps(self):
        ranked = rank_common([0.9, 0.1], [0.8, 0.3], top_k=10)
        assert len(ranked) == 2
        with pytest.raises(ValueError):
            rank_common([0.9], [0.8], top_k=0)

    def test_vocabulary_dimension_checked(self):
        vocab = small_vocab("The author is using a")
        with pytest.raises(ValueError, match="does not match"):
            rank_common([0.9, 0.1], [0.8, 0.3], vocab)


class TestExplain:
    def test_explain_vectors_shape(self):
        explanation = explain_vectors([0.9, 0.1, 0.5], [0.1, 0.9, 0.5], top_k=2)
        assert isinstance(explanation, PairExplanation)
        assert len(explanation.common) == 2
        assert len(explanation.distinct) == 2
        assert explanation.raw_distance == pytest.approx(
            np.linalg.norm(np.array([0.1, 0.9, 0.5]) - np.array([0.9, 0.1, 0.5]))
        )
        assert explanation.embedded_distance is None

    def test_embedded_distance_with_layer(self):
        layer = EmbeddingLayer(DIAGONAL, [2.0, 2.0])
        explanation = explain_vectors([0.5, 0.5], [0.0, 0.5], layer=layer)
        assert explanation.embedded_distance == pytest.approx(1.0, abs=1e-12)
        assert explanation.raw_distance == pytest.approx(0.5, abs=1e-12)

    def test_to_json_dict(self):
        explanation = explain_vectors([0.9, 0.1], [0.1, 0.9], top_k=1)
        record = explanation.to_json_dict()
        assert set(record) == {"common", "distinct", "raw_distance"}
        assert set(record["common"][0]) == {"dim", "attribute", "score"}
        layered = explain_vectors(
            [0.9, 0.1], [0.1, 0.9], layer=EmbeddingLayer(DIAGONAL, [1.0, 1.0])
        )
        assert "embedded_distance" in layered.to_json_dict()

    def test_explain_pair_vectorizes(self):
        vocab = small_vocab("The author is using apples", "The author is using pears")

        class MapScorer:
            def score(self, text, attribute):
                return 1.0 if attribute.rsplit(" ", 1)[-1] in text else 0.0

        explanation = explain_pair(
            "apples and pears here", "apples only", vocab, MapScorer(), top_k=1
        )
        assert explanation.common[0].attribute == "The author is using apples"
        assert explanation.distinct[0].attribute == "The author is using pears"

    def test_identical_vectors_all_zero_scores(self):
        explanation = explain_vectors([0.4, 0.6], [0.4, 0.6])
        assert explanation.raw_distance == 0.0
        assert all(r.score == 0.0 for r in explanation.common)
        assert all(r.score == 0.0 for r in explanation.distinct)
