"""Evaluation harnesses: STEL-style alignment, authorship verification, and
data-scale ablations.

A representation here is any callable mapping text to a fixed-size vector;
style vectors with or without a trained embedding layer both qualify.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from stylokit import agreement
from stylokit._jsonl import read_jsonl, write_jsonl
from stylokit.embedding import EmbeddingLayer, embed
from stylokit.errors import DataError, InsufficientDataError
from stylokit.stylevec import vectorize
from stylokit.vocab import TrigramTfidfSimilarity

ALIGNED = "aligned"
SWAPPED = "swapped"

Representation = Callable[[str], np.ndarray]


@dataclass(frozen=True)
class StelInstance:
    """Two anchor texts and two candidate texts; gold says whether candidate
    i matches anchor i ("aligned") or the pairing is crossed ("swapped")."""

    anchor1: str
    anchor2: str
    candidate1: str
    candidate2: str
    gold: str

    def __post_init__(self):
        if self.gold not in (ALIGNED, SWAPPED):
            raise ValueError(f"gold must be {ALIGNED!r} or {SWAPPED!r}, got {self.gold!r}")
        for name in ("anchor1", "anchor2", "candidate1", "candidate2"):
            if not getattr(self, name):
                raise ValueError(f"empty {name}")


@dataclass(frozen=True)
class VerificationPair:
    text1: str
    text2: str
    same_author: bool


def make_representation(vocabulary, scorer, layer: EmbeddingLayer | None = None) -> Representation:
    """Text to style vector, optionally pushed through an embedding layer."""

    def represent(text: str) -> np.ndarray:
        vec = vectorize(text, vocabulary, scorer)
        if layer is None:
            return vec.values
        return embed(layer, vec)

    return represent


def _distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b))


@dataclass
class StelResult:
    accuracy: float
    decisions: list[dict]


def run_stel(instances: Sequence[StelInstance], representation: Representation) -> StelResult:
    """Score a representation on alignment instances.

    Predicts "aligned" when the aligned pairing costs strictly less distance
    than the swapped pairing; an exact tie earns half credit. Representations
    are computed once per distinct text.
    """
    if not instances:
        raise InsufficientDataError("no instances to evaluate")
    cache: dict[str, np.ndarray] = {}

    def rep(text: str) -> np.ndarray:
        if text not in cache:
            cache[text] = np.asarray(representation(text), dtype=np.float64)
        return cache[text]

    credit_total = 0.0
    decisions = []
    for inst in instances:
        a1, a2 = rep(inst.anchor1), rep(inst.anchor2)
        c1, c2 = rep(inst.candidate1), rep(inst.candidate2)
        aligned_cost = _distance(a1, c1) + _distance(a2, c2)
        swapped_cost = _distance(a1, c2) + _distance(a2, c1)
        if aligned_cost < swapped_cost:
            predicted = ALIGNED
        elif swapped_cost < aligned_cost:
            predicted = SWAPPED
        else:
            predicted = "tie"
        credit = 0.5 if predicted == "tie" else (1.0 if predicted == inst.gold else 0.0)
        credit_total += credit
        decisions.append(
            {"predicted": predicted, "gold": inst.gold, "credit": credit,
             "aligned_cost": aligned_cost, "swapped_cost": swapped_cost}
        )
    return StelResult(credit_total / len(instances), decisions)


def load_stel_instances(path) -> list[StelInstance]:
    instances = []
    for lineno, rec in read_jsonl(path):
        try:
            instances.append(
                StelInstance(rec["anchor1"], rec["anchor2"], rec["candidate1"],
                             rec["candidate2"], rec["gold"])
            )
        except KeyError as exc:
            raise DataError(f"{path}: line {lineno}: missing field {exc.args[0]!r}") from None
        except ValueError as exc:
            raise DataError(f"{path}: line {lineno}: {exc}") from None
    return instances


def save_stel_instances(instances: Sequence[StelInstance], path) -> None:
    write_jsonl(
        path,
        (
            {"anchor1": i.anchor1, "anchor2": i.anchor2, "candidate1": i.candidate1,
             "candidate2": i.candidate2, "gold": i.gold}
            for i in instances
        ),
    )


def load_verification_pairs(path) -> list[VerificationPair]:
    pairs = []
    for lineno, rec in read_jsonl(path):
        try:
            pairs.append(VerificationPair(rec["text1"], rec["text2"], bool(rec["same_author"])))
        except KeyError as exc:
            raise DataError(f"{path}: line {lineno}: missing field {exc.args[0]!r}") from None
    return pairs


def run_verification(pairs: Sequence[VerificationPair], representation: Representation,
                     threshold: float) -> dict:
    """Same-author verification by thresholding embedding distance.

    A pair is predicted same-author when its distance is strictly below the
    threshold. Returns accuracy plus per-pair decisions.
    """
    if not pairs:
        raise InsufficientDataError("no pairs to evaluate")
    cache: dict[str, np.ndarray] = {}

    def rep(text: str) -> np.ndarray:
        if text not in cache:
            cache[text] = np.asarray(representation(text), dtype=np.float64)
        return cache[text]

    decisions = []
    correct = 0
    for pair in pairs:
        dist = _distance(rep(pair.text1), rep(pair.text2))
        predicted = dist < threshold
        correct += predicted == pair.same_author
        decisions.append(
            {"distance": dist, "predicted_same": predicted, "same_author": pair.same_author}
        )
    return {"accuracy": correct / len(pairs), "threshold": threshold, "decisions": decisions}


def calibrate_threshold(pairs: Sequence[VerificationPair], representation: Representation) -> float:
    """Midpoint between the mean same-author and mean different-author
    distances; needs at least one pair of each kind."""
    same, diff = [], []
    cache: dict[str, np.ndarray] = {}

    def rep(text: str) -> np.ndarray:
        if text not in cache:
            cache[text] = np.asarray(representation(text), dtype=np.float64)
        return cache[text]

    for pair in pairs:
        (same if pair.same_author else diff).append(_distance(rep(pair.text1), rep(pair.text2)))
    if not same or not diff:
        raise InsufficientDataError("calibration needs both same- and different-author pairs")
    return (sum(same) / len(same) + sum(diff) / len(diff)) / 2.0


def lexical_holdout_f1(dataset, holdout_attributes: int = 2, min_examples: int = 1,
                       max_examples: int = agreement.DEFAULT_MAX_EXAMPLES,
                       seed: int = 0, threshold: float = agreement.DEFAULT_THRESHOLD) -> float:
    """F1 of the lexical scorer on a balanced holdout of unseen attributes.

    Positives are the held-out attributes' own documents; each positive gets
    a negative drawn from the attribute's negative pool, mirroring training
    batch construction.
    """
    split = agreement.holdout_split(
        dataset, n_attributes=holdout_attributes,
        min_examples=min_examples, max_examples=max_examples, seed=seed,
    )
    train_attrs = split.train.distinct_attributes()
    if not train_attrs:
        raise InsufficientDataError("holdout consumed every attribute; nothing to sample negatives from")
    sim = TrigramTfidfSimilarity(train_attrs + split.validation_attributes)
    rng = random.Random(seed)
    examples = list(split.validation)
    for pos in split.validation:
        pool = agreement.negative_pool(pos.attribute, train_attrs, sim)
        source = rng.choice(pool)
        neg_docs = split.train.documents_for(source)
        doc_id = rng.choice(neg_docs)
        examples.append(
            agreement.LabeledExample(pos.attribute, split.train.text_of(doc_id), 0,
                                     source_attribute=source)
        )
    return agreement.evaluate_scorer(agreement.LexicalScorer(), examples, threshold)["f1"]


def ablation_sweep(dataset, author_limits: Sequence[int], eval_fn, seed: int = 0) -> list[dict]:
    """Evaluate nested author subsets of growing size.

    Limits must be strictly ascending and within the author count. A single
    seeded shuffle fixes the author order, so each subset contains the
    previous one and the metric isolates the effect of scale.
    """
    limits = list(author_limits)
    if not limits:
        raise ValueError("author_limits must be non-empty")
    if any(b <= a for a, b in zip(limits, limits[1:])):
        raise ValueError("author_limits must be strictly ascending")
    if limits[0] < 1:
        raise ValueError("author_limits must be positive")
    authors = sorted({author for author in dataset.doc_authors.values()})
    if limits[-1] > len(authors):
        raise ValueError(
            f"author limit {limits[-1]} exceeds the {len(authors)} authors in the dataset"
        )
    rng = random.Random(seed)
    rng.shuffle(authors)
    results = []
    for limit in limits:
        subset = dataset.restricted_to_authors(set(authors[:limit]))
        results.append({"authors": limit, "metric": float(eval_fn(subset))})
    return results
