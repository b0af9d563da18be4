"""Closed-form explanations for pairs of style vectors.

The importance of dimension d is how much of the pair's Euclidean distance
would vanish if that dimension's difference were removed:

    I(d) = ||v2 - v1|| - sqrt(sum over k != d of (v2_k - v1_k)^2)

Normalized importances weight two rankings: commonality favors dimensions
strongly present in both texts, distinctiveness favors dimensions strongly
present in exactly one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from stylokit.embedding import EmbeddingLayer, embed
from stylokit.stylevec import StyleVector, vectorize


def _pair_arrays(v1, v2) -> tuple[np.ndarray, np.ndarray]:
    a = v1.values if isinstance(v1, StyleVector) else np.asarray(v1, dtype=np.float64)
    b = v2.values if isinstance(v2, StyleVector) else np.asarray(v2, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("style vectors must be 1-dimensional")
    if a.shape != b.shape:
        raise ValueError(f"vector dimensions differ: {a.size} vs {b.size}")
    return a, b


def importance(v1, v2) -> np.ndarray:
    """Per-dimension importance I(d); non-negative, zero where the vectors
    agree, and equal to the full distance when only one dimension differs."""
    a, b = _pair_arrays(v1, v2)
    sq = (b - a) ** 2
    total = float(sq.sum())
    full = np.sqrt(total)
    remainder = np.sqrt(np.maximum(total - sq, 0.0))
    return np.maximum(full - remainder, 0.0)


def importance_weights(v1, v2) -> np.ndarray:
    """Importances normalized to sum to 1; all zeros for identical vectors."""
    imp = importance(v1, v2)
    total = float(imp.sum())
    if total <= 0.0:
        return np.zeros_like(imp)
    return imp / total


def common_scores(v1, v2) -> np.ndarray:
    """Importance-weighted evidence that a dimension is shared style:
    weight(d) * v1_d * v2_d."""
    a, b = _pair_arrays(v1, v2)
    return importance_weights(a, b) * a * b


def distinct_scores(v1, v2) -> np.ndarray:
    """Importance-weighted evidence that a dimension separates the pair:
    weight(d) * max(v1_d, v2_d) * (1 - min(v1_d, v2_d))."""
    a, b = _pair_arrays(v1, v2)
    return importance_weights(a, b) * np.maximum(a, b) * (1.0 - np.minimum(a, b))


class RankedAttribute(NamedTuple):
    dim: int
    attribute: str
    score: float


def _rank(scores: np.ndarray, vocabulary, top_k: int | None) -> list[RankedAttribute]:
    if vocabulary is not None and vocabulary.dimension != scores.size:
        raise ValueError(
            f"vocabulary dimension {vocabulary.dimension} does not match vectors ({scores.size})"
        )
    if top_k is not None and top_k < 1:
        raise ValueError("top_k must be positive")
    order = sorted(range(scores.size), key=lambda d: (-scores[d], d))
    if top_k is not None:
        order = order[:top_k]
    texts = vocabulary.texts if vocabulary is not None else None
    return [
        RankedAttribute(d, texts[d] if texts else f"dim_{d}", float(scores[d]))
        for d in order
    ]


def rank_common(v1, v2, vocabulary=None, top_k: int | None = None) -> list[RankedAttribute]:
    """Dimensions ranked by commonality, ties broken by dimension index."""
    return _rank(common_scores(v1, v2), vocabulary, top_k)


def rank_distinct(v1, v2, vocabulary=None, top_k: int | None = None) -> list[RankedAttribute]:
    """Dimensions ranked by distinctiveness, ties broken by dimension index."""
    return _rank(distinct_scores(v1, v2), vocabulary, top_k)


@dataclass
class PairExplanation:
    common: list[RankedAttribute]
    distinct: list[RankedAttribute]
    raw_distance: float
    embedded_distance: float | None = None

    def to_json_dict(self) -> dict:
        out = {
            "common": [
                {"dim": r.dim, "attribute": r.attribute, "score": r.score}
                for r in self.common
            ],
            "distinct": [
                {"dim": r.dim, "attribute": r.attribute, "score": r.score}
                for r in self.distinct
            ],
            "raw_distance": self.raw_distance,
        }
        if self.embedded_distance is not None:
            out["embedded_distance"] = self.embedded_distance
        return out


def explain_vectors(v1, v2, vocabulary=None, top_k: int = 7,
                    layer: EmbeddingLayer | None = None) -> PairExplanation:
    """Explain a pair of style vectors: top commonalities, top distinctions,
    and the raw (plus optionally embedded) distance."""
    a, b = _pair_arrays(v1, v2)
    raw_distance = float(np.linalg.norm(b - a))
    embedded = None
    if layer is not None:
        embedded = float(np.linalg.norm(embed(layer, b) - embed(layer, a)))
    return PairExplanation(
        common=rank_common(a, b, vocabulary, top_k),
        distinct=rank_distinct(a, b, vocabulary, top_k),
        raw_distance=raw_distance,
        embedded_distance=embedded,
    )


def explain_pair(text1: str, text2: str, vocabulary, scorer, top_k: int = 7,
                 layer: EmbeddingLayer | None = None) -> PairExplanation:
    """Vectorize two texts and explain their style overlap and differences."""
    v1 = vectorize(text1, vocabulary, scorer)
    v2 = vectorize(text2, vocabulary, scorer)
    return explain_vectors(v1, v2, vocabulary, top_k=top_k, layer=layer)
