import pytest

import oracles
from stylokit.errors import DataError, InsufficientDataError
from stylokit.vocab import (
    StyleAttribute,
    TrigramTfidfSimilarity,
    Vocabulary,
    frequency_window,
    interpretability_filter,
    reference_similarity,
    select_vocabulary,
    targeted_vocabulary_entries,
    trigrams,
)


class FakeDataset:
    def __init__(self, counts):
        self._counts = counts

    def distinct_attributes(self):
        return sorted(self._counts)

    def author_count(self, attribute):
        return self._counts.get(attribute, 0)


class ConstantSim:
    def __init__(self, value=0.0):
        self.value = value

    def sim(self, a, b):
        return 1.0 if a == b else self.value


class TestTrigramSimilarity:
    def test_trigrams_lowercase(self):
        assert trigrams("AbCd") == ["abc", "bcd"]

    def test_short_text_has_no_trigrams(self):
        assert trigrams("ab") == []

    def test_matches_oracle(self):
        texts = [
            "The author uses exclamation marks.",
            "The author uses exclamation points.",
            "The author writes tersely.",
            "Numbers appear in every clause.",
        ]
        sim = TrigramTfidfSimilarity(texts)
        for a in texts:
            for b in texts:
                if a == b:
                    continue
                assert sim.sim(a, b) == pytest.approx(
                    oracles.tfidf_cosine(a, b, texts), abs=1e-12
                )

    def test_identity_is_exactly_one(self):
        sim = TrigramTfidfSimilarity(["alpha beta", "gamma delta"])
        assert sim.sim("alpha beta", "alpha beta") == 1.0

    def test_disjoint_texts_score_zero(self):
        sim = TrigramTfidfSimilarity(["aaaa", "bbbb"])
        assert sim.sim("aaaa", "bbbb") == 0.0

    def test_symmetry(self):
        texts = ["one fish", "two fish", "red fish swims"]
        sim = TrigramTfidfSimilarity(texts)
        assert sim.sim(texts[0], texts[2]) == pytest.approx(sim.sim(texts[2], texts[0]), abs=1e-15)

    def test_reference_similarity_two_doc_fit(self):
        a, b = "The author is wry.", "The author is dry."
        assert reference_similarity(a, b) == pytest.approx(
            oracles.tfidf_cosine(a, b, [a, b]), abs=1e-12
        )

    def test_near_duplicates_score_high(self):
        texts = ["The author uses frequent exclamation marks.",
                 "The author uses frequent exclamation marks!", "Entirely different."]
        sim = TrigramTfidfSimilarity(texts)
        assert sim.sim(texts[0], texts[1]) > 0.9
        assert sim.sim(texts[0], texts[2]) < 0.3


class TestInterpretabilityFilter:
    def test_length_boundary(self):
        assert interpretability_filter("The author " + "x" * 109)
        assert not interpretability_filter("The author " + "x" * 110)

    def test_non_ascii_rejected(self):
        assert not interpretability_filter("The author uses café words.")

    def test_negation_words_rejected(self):
        assert not interpretability_filter("The author does not use slang.")
        assert not interpretability_filter("The author avoids jargon.")
        assert not interpretability_filter("The author mentions the weather.")

    def test_negation_must_be_whole_word(self):
        assert interpretability_filter("The author writes notable prose.")
        assert interpretability_filter("The author documents things.")

    def test_negation_with_punctuation(self):
        assert not interpretability_filter("The author is terse, not verbose.")

    def test_quotes_rejected(self):
        assert not interpretability_filter('The author writes "like this".')
        assert not interpretability_filter("The author writes “like this”.")

    def test_plain_attribute_passes(self):
        assert interpretability_filter("The author uses short sentences.")

    def test_agrees_with_oracle_on_edge_cases(self):
        cases = [
            "The author is using knots.",
            "The author is using (not) slang.",
            "The author Mentions things.",
            "The author is fine.",
            "x" * 120,
            "x" * 121,
        ]
        for text in cases:
            assert interpretability_filter(text) == oracles.interpretable(text)


class TestFrequencyWindow:
    def test_window_bounds_inclusive(self):
        counts = {"a": 9, "b": 10, "c": 300, "d": 600, "e": 601}
        kept = frequency_window(FakeDataset(counts), 10, 600)
        assert [a.text for a in kept] == ["d", "c", "b"]
        assert [a.author_count for a in kept] == [600, 300, 10]

    def test_sorted_by_count_then_text(self):
        counts = {"beta": 50, "alpha": 50, "gamma": 70}
        kept = frequency_window(FakeDataset(counts), 10, 600)
        assert [a.text for a in kept] == ["gamma", "alpha", "beta"]

    def test_excludes_targeted_entries(self):
        entry = targeted_vocabulary_entries()[0]
        kept = frequency_window(FakeDataset({entry: 50, "mined one": 50}), 10, 600)
        assert [a.text for a in kept] == ["mined one"]

    def test_bad_bounds_rejected(self):
        with pytest.raises(ValueError):
            frequency_window(FakeDataset({}), 0, 600)
        with pytest.raises(ValueError):
            frequency_window(FakeDataset({}), 10, 9)


class TestTargetedEntries:
    def test_count_and_shape(self):
        entries = targeted_vocabulary_entries()
        assert len(entries) == 87
        assert entries[0] == "The author is using figurative language"
        assert all(e.startswith("The author is using ") for e in entries)
        assert all(not e.endswith(".") for e in entries)
        assert len(set(entries)) == 87


class TestSelectVocabulary:
    def test_targeted_prefix_comes_first(self):
        counts = {f"The author is using mined attribute {i}.": 50 for i in range(30)}
        vocab = select_vocabulary(FakeDataset(counts), sim=ConstantSim(), d=100)
        targeted = targeted_vocabulary_entries()
        assert vocab.texts[:87] == targeted
        assert vocab.dimension == 100
        assert all(a.source == "targeted" for a in vocab.attributes[:87])
        assert all(a.source == "mined" for a in vocab.attributes[87:])

    def test_small_d_truncates_targeted_prefix(self):
        vocab = select_vocabulary(FakeDataset({}), sim=ConstantSim(), d=16)
        assert vocab.texts == targeted_vocabulary_entries()[:16]

    def test_matches_greedy_oracle(self):
        counts = {}
        for i in range(40):
            counts[f"The author is using pattern {i:02d} in every sentence."] = 20 + i
        counts["The author is using pattern 00 in every sentence!"] = 580
        counts["The author avoids punctuation."] = 100
        counts["The author is using rare style."] = 5
        counts["The author is using ubiquitous style."] = 2000
        dataset = FakeDataset(counts)
        d = 87 + 10
        vocab = select_vocabulary(dataset, d=d)

        targeted = targeted_vocabulary_entries()
        ordered = sorted(
            (
                (count, text)
                for text, count in counts.items()
                if text not in set(targeted) and 10 <= count <= 600
            ),
            key=lambda item: (-item[0], item[1]),
        )
        candidates = [text for _, text in ordered]
        fitted = TrigramTfidfSimilarity(candidates + targeted)
        expected = oracles.select_vocabulary(targeted, candidates, d, 0.8, fitted.sim)
        assert vocab.texts == expected

    def test_dedup_rejects_near_duplicates(self):
        base = "The author is using extremely distinctive parenthetical asides."
        near = "The author is using extremely distinctive parenthetical asides!!"
        other = "The author is using numbered lists throughout."
        counts = {base: 500, near: 400, other: 300}
        vocab = select_vocabulary(FakeDataset(counts), d=89)
        assert base in vocab.texts
        assert near not in vocab.texts
        assert other in vocab.texts

    def test_shortfall_raises(self):
        counts = {"The author is using one thing.": 50}
        with pytest.raises(InsufficientDataError, match="vocabulary shortfall"):
            select_vocabulary(FakeDataset(counts), sim=ConstantSim(), d=90)

    def test_filtered_attributes_do_not_count(self):
        counts = {
            "The author is using fine style.": 50,
            "The author avoids everything.": 50,
            "The author is using café style.": 50,
        }
        with pytest.raises(InsufficientDataError):
            select_vocabulary(FakeDataset(counts), sim=ConstantSim(), d=89)

    def test_bad_parameters_rejected(self):
        with pytest.raises(ValueError):
            select_vocabulary(FakeDataset({}), d=0)
        with pytest.raises(ValueError):
            select_vocabulary(FakeDataset({}), d=5, dedup_threshold=1.5)


class TestVocabularyContainer:
    def _vocab(self):
        attrs = [
            StyleAttribute(0, "The author is using alpha", 0, "targeted"),
            StyleAttribute(1, "The author is using beta.", 42, "mined"),
        ]
        return Vocabulary(attrs)

    def test_dimension_and_texts(self):
        vocab = self._vocab()
        assert vocab.dimension == 2
        assert vocab.texts == ["The author is using alpha", "The author is using beta."]

    def test_vocab_id_stable_and_content_keyed(self):
        one, two = self._vocab(), self._vocab()
        assert one.vocab_id == two.vocab_id
        assert len(one.vocab_id) == 16
        different = Vocabulary([StyleAttribute(0, "The author is using gamma.", 1, "mined")])
        assert different.vocab_id != one.vocab_id

    def test_misnumbered_ids_rejected(self):
        with pytest.raises(ValueError):
            Vocabulary([StyleAttribute(1, "The author is using x.", 1, "mined")])

    def test_duplicate_texts_rejected(self):
        with pytest.raises(ValueError):
            Vocabulary(
                [
                    StyleAttribute(0, "The author is using x.", 1, "mined"),
                    StyleAttribute(1, "The author is using x.", 2, "mined"),
                ]
            )

    def test_save_load_round_trip(self, tmp_path):
        vocab = self._vocab()
        path = tmp_path / "vocab.jsonl"
        vocab.save(path)
        loaded = Vocabulary.load(path)
        assert loaded.texts == vocab.texts
        assert loaded.vocab_id == vocab.vocab_id
        assert [a.author_count for a in loaded.attributes] == [0, 42]
        assert [a.source for a in loaded.attributes] == ["targeted", "mined"]

    def test_load_rejects_gap_in_dims(self, tmp_path):
        path = tmp_path / "vocab.jsonl"
        path.write_text(
            '{"dim": 0, "text": "The author is using a.", "source": "mined", "author_count": 3}\n'
            '{"dim": 2, "text": "The author is using b.", "source": "mined", "author_count": 3}\n'
        )
        with pytest.raises((DataError, ValueError)):
            Vocabulary.load(path)
