"""Attribute vocabulary selection.

The vocabulary fixes the meaning of every style-vector dimension. Its first
entries are the targeted features rendered as attribute sentences; the rest
are mined attributes admitted greedily by author frequency, subject to an
interpretability filter and near-duplicate rejection under a character
trigram TF-IDF cosine similarity.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Iterable, Protocol

from stylokit import prompts as prompt_defs
from stylokit._jsonl import read_jsonl, write_jsonl
from stylokit.errors import DataError, InsufficientDataError

DEFAULT_DIMENSION = 768
DEFAULT_DEDUP_THRESHOLD = 0.8
DEFAULT_MIN_AUTHORS = 10
DEFAULT_MAX_AUTHORS = 600
MAX_ATTRIBUTE_CHARS = 120

TARGETED_SOURCE = "targeted"
MINED_SOURCE = "mined"

_BANNED_WORDS = ("not", "avoids", "mentions")
_QUOTE_CHARS = "\"'“”‘’"


@dataclass(frozen=True)
class StyleAttribute:
    attr_id: int
    text: str
    author_count: int
    source: str = MINED_SOURCE


class AttributeSimilarityProvider(Protocol):
    def sim(self, a: str, b: str) -> float: ...


def trigrams(text: str) -> list[str]:
    lowered = text.lower()
    return [lowered[i:i + 3] for i in range(len(lowered) - 2)]


class TrigramTfidfSimilarity:
    """Cosine similarity over L2-normalized character-trigram TF-IDF vectors.

    Document frequencies are fitted once over a fixed collection; texts seen
    at query time use the fitted idf table (unseen trigrams get the idf of a
    zero-df trigram). Identical strings always score 1.0.
    """

    def __init__(self, collection: Iterable[str]):
        self._df: dict[str, int] = {}
        n = 0
        for text in collection:
            n += 1
            for gram in set(trigrams(text)):
                self._df[gram] = self._df.get(gram, 0) + 1
        self._n = n
        self._cache: dict[str, dict[str, float]] = {}

    def _idf(self, gram: str) -> float:
        return math.log((1 + self._n) / (1 + self._df.get(gram, 0))) + 1.0

    def _vector(self, text: str) -> dict[str, float]:
        cached = self._cache.get(text)
        if cached is not None:
            return cached
        counts: dict[str, int] = {}
        for gram in trigrams(text):
            counts[gram] = counts.get(gram, 0) + 1
        vec = {gram: tf * self._idf(gram) for gram, tf in counts.items()}
        norm = math.sqrt(sum(w * w for w in vec.values()))
        if norm > 0:
            vec = {gram: w / norm for gram, w in vec.items()}
        self._cache[text] = vec
        return vec

    def sim(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        va, vb = self._vector(a), self._vector(b)
        if len(vb) < len(va):
            va, vb = vb, va
        return sum(w * vb.get(gram, 0.0) for gram, w in va.items())


def reference_similarity(a: str, b: str) -> float:
    """Similarity of two attribute strings under a two-document fit."""
    return TrigramTfidfSimilarity([a, b]).sim(a, b)


def targeted_vocabulary_entries() -> list[str]:
    """The targeted features rendered as vocabulary attribute sentences."""
    return [f"The author is using {f.name}" for f in prompt_defs.targeted_features()]


def interpretability_filter(text: str) -> bool:
    """Keep only attributes a reader can act on: bounded length, ASCII,
    no negations or hedges, no quoted fragments."""
    if len(text) > MAX_ATTRIBUTE_CHARS:
        return False
    if not text.isascii():
        return False
    if any(ch in _QUOTE_CHARS for ch in text):
        return False
    words = {w.strip(".,;:!?()").lower() for w in text.split()}
    if any(banned in words for banned in _BANNED_WORDS):
        return False
    return True


def frequency_window(dataset, min_authors: int = DEFAULT_MIN_AUTHORS,
                     max_authors: int = DEFAULT_MAX_AUTHORS) -> list[StyleAttribute]:
    """Mined attributes within the author-frequency window, ordered by
    descending author count with lexicographic tie-breaks."""
    if min_authors < 1 or max_authors < min_authors:
        raise ValueError("need 1 <= min_authors <= max_authors")
    targeted = set(targeted_vocabulary_entries())
    kept = [
        (dataset.author_count(text), text)
        for text in dataset.distinct_attributes()
        if text not in targeted and min_authors <= dataset.author_count(text) <= max_authors
    ]
    kept.sort(key=lambda item: (-item[0], item[1]))
    return [StyleAttribute(i, text, count) for i, (count, text) in enumerate(kept)]


class Vocabulary:
    """An ordered attribute list; entry i defines style-vector dimension i."""

    def __init__(self, attributes: list[StyleAttribute]):
        seen = set()
        for i, attr in enumerate(attributes):
            if attr.attr_id != i:
                raise ValueError(f"attribute {attr.text!r} has attr_id {attr.attr_id}, expected {i}")
            if attr.text in seen:
                raise ValueError(f"duplicate vocabulary entry {attr.text!r}")
            seen.add(attr.text)
        self.attributes = list(attributes)
        self.texts = [a.text for a in attributes]
        self.vocab_id = hashlib.sha256("\n".join(self.texts).encode("utf-8")).hexdigest()[:16]

    def __len__(self) -> int:
        return len(self.attributes)

    @property
    def dimension(self) -> int:
        return len(self.attributes)

    def save(self, path) -> None:
        write_jsonl(
            path,
            (
                {"dim": a.attr_id, "text": a.text, "source": a.source,
                 "author_count": a.author_count}
                for a in self.attributes
            ),
        )

    @classmethod
    def load(cls, path) -> "Vocabulary":
        attributes = []
        for lineno, rec in read_jsonl(path):
            try:
                attributes.append(
                    StyleAttribute(rec["dim"], rec["text"], rec.get("author_count", 0),
                                   rec.get("source", MINED_SOURCE))
                )
            except KeyError as exc:
                raise DataError(f"{path}: line {lineno}: missing field {exc.args[0]!r}") from None
        attributes.sort(key=lambda a: a.attr_id)
        try:
            return cls(attributes)
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from None


def select_vocabulary(dataset, sim: AttributeSimilarityProvider | None = None,
                      d: int = DEFAULT_DIMENSION,
                      dedup_threshold: float = DEFAULT_DEDUP_THRESHOLD,
                      min_authors: int = DEFAULT_MIN_AUTHORS,
                      max_authors: int = DEFAULT_MAX_AUTHORS) -> Vocabulary:
    """Build a d-dimensional vocabulary: targeted entries first, then mined
    attributes admitted greedily in frequency order.

    A candidate is admitted iff it passes the interpretability filter and its
    similarity to every already-selected entry is at or below the threshold.
    Running out of candidates before reaching d raises, naming the shortfall.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if not 0 <= dedup_threshold <= 1:
        raise ValueError("dedup_threshold must be in [0, 1]")
    targeted = targeted_vocabulary_entries()[: min(87, d)]
    selected: list[tuple[str, str, int]] = [
        (text, TARGETED_SOURCE, dataset.author_count(text)) for text in targeted
    ]
    if d > len(selected):
        candidates = frequency_window(dataset, min_authors, max_authors)
        if sim is None:
            sim = TrigramTfidfSimilarity([c.text for c in candidates] + targeted)
        selected_texts = [text for text, _, _ in selected]
        for cand in candidates:
            if len(selected_texts) == d:
                break
            if not interpretability_filter(cand.text):
                continue
            if any(sim.sim(cand.text, kept) > dedup_threshold for kept in selected_texts):
                continue
            selected.append((cand.text, MINED_SOURCE, cand.author_count))
            selected_texts.append(cand.text)
        if len(selected) < d:
            raise InsufficientDataError(
                f"vocabulary shortfall: need {d} attributes,"
                f" selected {len(selected)} ({d - len(selected)} short)"
            )
    return Vocabulary(
        [StyleAttribute(i, text, count, source) for i, (text, source, count) in enumerate(selected)]
    )
