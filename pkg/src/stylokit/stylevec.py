"""Interpretable style vectors.

A style vector holds one agreement score per vocabulary attribute, so each
dimension reads as the probability that the attribute describes the text.
This module vectorizes texts and corpora, localizes a dimension's evidence
to sentences, and exports distillation training data for downstream
regression models.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from stylokit._jsonl import read_jsonl, write_jsonl
from stylokit.corpus import Corpus, preprocess, split_sentences
from stylokit.errors import DataError, InsufficientDataError, StylokitError


class StyleVector:
    """A [0, 1]^D vector tied to the vocabulary that defines its dimensions."""

    def __init__(self, values, vocab_id: str | None = None, doc_id: str | None = None,
                 author_id: str | None = None):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"style vector must be 1-dimensional, got shape {arr.shape}")
        if arr.size == 0:
            raise ValueError("style vector must have at least one dimension")
        if not np.all(np.isfinite(arr)):
            raise ValueError("style vector values must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("style vector values must lie in [0, 1]")
        self.values = arr
        self.vocab_id = vocab_id
        self.doc_id = doc_id
        self.author_id = author_id

    @property
    def dimension(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.dimension


def _clamp01(value: float) -> float:
    return 0.0 if value < 0.0 else 1.0 if value > 1.0 else value


def _score(scorer, text: str, attribute: str, dim: int) -> float:
    try:
        raw = float(scorer.score(text, attribute))
    except StylokitError:
        raise
    except Exception as exc:
        raise StylokitError(f"scorer failed on dimension {dim} ({attribute!r}): {exc}") from exc
    if not np.isfinite(raw):
        raise StylokitError(f"scorer returned non-finite value on dimension {dim}")
    return _clamp01(raw)


def vectorize(text: str, vocabulary, scorer, doc_id: str | None = None,
              author_id: str | None = None) -> StyleVector:
    """Score the text against every vocabulary attribute, in dimension order."""
    values = np.empty(vocabulary.dimension, dtype=np.float64)
    for dim, attribute in enumerate(vocabulary.texts):
        values[dim] = _score(scorer, text, attribute, dim)
    return StyleVector(values, vocabulary.vocab_id, doc_id, author_id)


def vectorize_corpus(corpus: Corpus, vocabulary, scorer) -> list[StyleVector]:
    """Vectorize every document of an already-preprocessed corpus, in order."""
    return [
        vectorize(doc.text, vocabulary, scorer, doc_id=doc.doc_id, author_id=doc.author_id)
        for doc in corpus.documents
    ]


@dataclass
class SentenceActivations:
    sentences: list[str]
    vectors: np.ndarray  # one row per sentence


def vectorize_sentences(text: str, vocabulary, scorer) -> SentenceActivations:
    sentences = split_sentences(text)
    rows = np.zeros((len(sentences), vocabulary.dimension), dtype=np.float64)
    for i, sentence in enumerate(sentences):
        for dim, attribute in enumerate(vocabulary.texts):
            rows[i, dim] = _score(scorer, sentence, attribute, dim)
    return SentenceActivations(sentences, rows)


def dimension_report(text: str, dim: int, vocabulary, scorer,
                     top_k: int | None = None) -> list[tuple[str, float]]:
    """Sentences of the text ranked by activation on one dimension.

    Ties keep the original sentence order; top_k of None returns all.
    """
    if not 0 <= dim < vocabulary.dimension:
        raise ValueError(f"dimension {dim} out of range for D={vocabulary.dimension}")
    activations = vectorize_sentences(text, vocabulary, scorer)
    order = sorted(
        range(len(activations.sentences)),
        key=lambda i: (-activations.vectors[i, dim], i),
    )
    if top_k is not None:
        if top_k < 1:
            raise ValueError("top_k must be positive")
        order = order[:top_k]
    return [(activations.sentences[i], float(activations.vectors[i, dim])) for i in order]


def save_vectors(vectors: list[StyleVector], path) -> None:
    records = []
    for vec in vectors:
        record = {"doc_id": vec.doc_id, "values": [float(v) for v in vec.values]}
        if vec.author_id is not None:
            record["author_id"] = vec.author_id
        if vec.vocab_id is not None:
            record["vocab_id"] = vec.vocab_id
        records.append(record)
    write_jsonl(path, records)


def load_vectors(path) -> list[StyleVector]:
    vectors = []
    for lineno, rec in read_jsonl(path):
        try:
            vectors.append(
                StyleVector(rec["values"], rec.get("vocab_id"), rec["doc_id"],
                            rec.get("author_id"))
            )
        except KeyError as exc:
            raise DataError(f"{path}: line {lineno}: missing field {exc.args[0]!r}") from None
        except ValueError as exc:
            raise DataError(f"{path}: line {lineno}: {exc}") from None
    return vectors


class ScoreTable:
    """File-backed agreement scores, keyed by document and dimension.

    Rows are {"doc_id", "dim", "score"}. Lookup falls back from the doc id to
    a sha256 of the text, so tables can also key by content.
    """

    def __init__(self, entries: dict[tuple[str, int], float]):
        self._entries = dict(entries)

    @classmethod
    def from_file(cls, path) -> "ScoreTable":
        entries: dict[tuple[str, int], float] = {}
        for lineno, rec in read_jsonl(path):
            try:
                entries[(rec["doc_id"], int(rec["dim"]))] = float(rec["score"])
            except KeyError as exc:
                raise DataError(f"{path}: line {lineno}: missing field {exc.args[0]!r}") from None
        return cls(entries)

    @staticmethod
    def text_key(text: str) -> str:
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def score_for(self, doc_id: str | None, text: str, dim: int) -> float:
        if doc_id is not None and (doc_id, dim) in self._entries:
            return self._entries[(doc_id, dim)]
        key = (self.text_key(text), dim)
        if key in self._entries:
            return self._entries[key]
        raise DataError(f"no stored score for doc {doc_id!r} dimension {dim}")


class TableScorer:
    """Agreement scorer backed by a ScoreTable, resolving attributes to
    dimensions through a vocabulary. Texts are keyed by content hash."""

    def __init__(self, table: ScoreTable, vocabulary):
        self._table = table
        self._dims = {text: i for i, text in enumerate(vocabulary.texts)}

    def score(self, text: str, attribute: str) -> float:
        try:
            dim = self._dims[attribute]
        except KeyError:
            raise DataError(f"attribute not in vocabulary: {attribute!r}") from None
        return self._table.score_for(None, text, dim)


def vectorize_corpus_from_table(corpus: Corpus, vocabulary, table: ScoreTable) -> list[StyleVector]:
    vectors = []
    for doc in corpus.documents:
        values = [
            _clamp01(table.score_for(doc.doc_id, doc.text, dim))
            for dim in range(vocabulary.dimension)
        ]
        vectors.append(StyleVector(values, vocabulary.vocab_id, doc.doc_id, doc.author_id))
    return vectors


def export_distillation_dataset(corpus: Corpus, vocabulary, scorer, holdout: int,
                                seed: int, out_dir) -> tuple[Path, Path]:
    """Write (text, target-vector) training and validation files.

    ``holdout`` documents are drawn with the seed for validation; both files
    keep corpus order. Texts are preprocessed before scoring so targets match
    what the annotation pipeline sees.
    """
    if holdout < 1:
        raise ValueError("holdout must be positive")
    if len(corpus) <= holdout:
        raise InsufficientDataError(
            f"need more than {holdout} documents to hold {holdout} out, have {len(corpus)}"
        )
    rng = random.Random(seed)
    validation_ids = set(rng.sample([d.doc_id for d in corpus.documents], holdout))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_records, val_records = [], []
    for doc in corpus.documents:
        text = preprocess(doc.text)
        vec = vectorize(text, vocabulary, scorer, doc_id=doc.doc_id, author_id=doc.author_id)
        record = {"text": text, "targets": [float(v) for v in vec.values]}
        (val_records if doc.doc_id in validation_ids else train_records).append(record)
    train_path = out_dir / "distill_train.jsonl"
    val_path = out_dir / "distill_val.jsonl"
    write_jsonl(train_path, train_records)
    write_jsonl(val_path, val_records)
    return train_path, val_path


def _as_matrix(rows) -> np.ndarray:
    if isinstance(rows, np.ndarray):
        arr = np.asarray(rows, dtype=np.float64)
    else:
        arr = np.asarray(
            [r.values if isinstance(r, StyleVector) else r for r in rows], dtype=np.float64
        )
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return arr


def regression_mse(predicted, target) -> float:
    """Mean squared error between prediction and target matrices.

    Predictions may fall outside [0, 1]; only shapes are validated.
    """
    p = _as_matrix(predicted)
    t = _as_matrix(target)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: predictions {p.shape} vs targets {t.shape}")
    if p.size == 0:
        raise ValueError("cannot score empty matrices")
    diff = p - t
    return float(np.mean(diff * diff))
