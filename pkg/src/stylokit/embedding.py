"""Trainable linear embeddings over style vectors.

Two layer kinds: "diagonal" learns one weight per dimension (the embedding
stays interpretable, each weight rescales one attribute), "linear" learns a
full D x M projection. Both train with a Euclidean triplet loss where the
anchor and positive come from one author and the negative from another.
Gradients are analytic and come from the kernel backend.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

import numpy as np

from stylokit import _kernels
from stylokit._jsonl import atomic_write_text
from stylokit.errors import DataError, InsufficientDataError
from stylokit.stylevec import StyleVector

DIAGONAL = "diagonal"
LINEAR = "linear"
KINDS = (DIAGONAL, LINEAR)

DEFAULT_LINEAR_DIM = 64
DEFAULT_MARGIN = 1.0
DEFAULT_BATCH_SIZE = 32
DEFAULT_LEARNING_RATE = 0.001
DEFAULT_EARLY_STOP_THRESHOLD = 0.001
DEFAULT_PATIENCE = 20
DEFAULT_MAX_EPOCHS = 200

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8
WEIGHT_DECAY = 0.01


class EmbeddingLayer:
    """A diagonal or full linear map applied to style vectors."""

    def __init__(self, kind: str, weights):
        if kind not in KINDS:
            raise ValueError(f"unknown layer kind {kind!r}")
        arr = np.asarray(weights, dtype=np.float64)
        expected_ndim = 1 if kind == DIAGONAL else 2
        if arr.ndim != expected_ndim:
            raise ValueError(f"{kind} layer needs a {expected_ndim}-dimensional weight array")
        if arr.size == 0 or not np.all(np.isfinite(arr)):
            raise ValueError("layer weights must be non-empty and finite")
        self.kind = kind
        self.weights = arr

    @property
    def input_dim(self) -> int:
        return int(self.weights.shape[0])

    @property
    def output_dim(self) -> int:
        return int(self.weights.shape[0] if self.kind == DIAGONAL else self.weights.shape[1])

    @classmethod
    def initialize(cls, kind: str, d: int, m: int = DEFAULT_LINEAR_DIM,
                   seed: int = 0) -> "EmbeddingLayer":
        """Diagonal layers start at the identity (all-ones weights); linear
        layers draw seeded uniform weights in [-1/sqrt(D), 1/sqrt(D)]."""
        if d < 1:
            raise ValueError("d must be positive")
        if kind == DIAGONAL:
            return cls(DIAGONAL, np.ones(d))
        if kind == LINEAR:
            if m < 1:
                raise ValueError("m must be positive")
            bound = 1.0 / np.sqrt(d)
            rng = np.random.default_rng(seed)
            return cls(LINEAR, rng.uniform(-bound, bound, size=(d, m)))
        raise ValueError(f"unknown layer kind {kind!r}")

    def save(self, path) -> None:
        record = {"kind": self.kind, "weights": self.weights.tolist()}
        atomic_write_text(path, json.dumps(record, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "EmbeddingLayer":
        with open(path, encoding="utf-8") as fh:
            try:
                record = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: invalid JSON ({exc.msg})") from None
        try:
            return cls(record["kind"], record["weights"])
        except KeyError as exc:
            raise DataError(f"{path}: missing field {exc.args[0]!r}") from None
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from None


def _as_array(v) -> np.ndarray:
    if isinstance(v, StyleVector):
        return v.values
    return np.asarray(v, dtype=np.float64)


def embed(layer: EmbeddingLayer, vector) -> np.ndarray:
    arr = _as_array(vector)
    if arr.shape[-1] != layer.input_dim:
        raise ValueError(
            f"vector dimension {arr.shape[-1]} does not match layer input {layer.input_dim}"
        )
    if layer.kind == DIAGONAL:
        return arr * layer.weights
    return arr @ layer.weights


def distance(e1, e2) -> float:
    a = np.asarray(e1, dtype=np.float64)
    b = np.asarray(e2, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"embedding shapes differ: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


@dataclass(frozen=True)
class Triplet:
    """Anchor and positive share an author; the negative comes from another."""

    anchor: StyleVector
    positive: StyleVector
    negative: StyleVector

    def __post_init__(self):
        dims = {self.anchor.dimension, self.positive.dimension, self.negative.dimension}
        if len(dims) != 1:
            raise ValueError(f"triplet members disagree on dimension: {sorted(dims)}")


def _batch_arrays(triplets) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a = np.stack([_as_array(t.anchor) for t in triplets])
    p = np.stack([_as_array(t.positive) for t in triplets])
    n = np.stack([_as_array(t.negative) for t in triplets])
    return a, p, n


def _kernel_for(layer: EmbeddingLayer):
    return _kernels.diagonal_batch if layer.kind == DIAGONAL else _kernels.linear_batch


def triplet_loss(layer: EmbeddingLayer, triplet: Triplet,
                 margin: float = DEFAULT_MARGIN) -> float:
    """Hinge loss max(0, d(anchor, positive) - d(anchor, negative) + margin)."""
    loss, _, _, _ = batch_loss_and_gradient(layer, [triplet], margin)
    return loss


def batch_loss_and_gradient(layer: EmbeddingLayer, triplets, margin: float = DEFAULT_MARGIN):
    """Mean loss, mean subgradient, and per-triplet distances for a batch."""
    if not triplets:
        raise ValueError("empty triplet batch")
    if margin <= 0:
        raise ValueError("margin must be positive")
    a, p, n = _batch_arrays(triplets)
    if a.shape[1] != layer.input_dim:
        raise ValueError(
            f"triplet dimension {a.shape[1]} does not match layer input {layer.input_dim}"
        )
    loss, grad, d_pos, d_neg = _kernel_for(layer)(layer.weights, a, p, n, margin)
    return float(loss), grad, d_pos, d_neg


def loss_gradient(layer: EmbeddingLayer, triplets, margin: float = DEFAULT_MARGIN) -> np.ndarray:
    """Mean analytic subgradient of the batch triplet loss in layer weights."""
    _, grad, _, _ = batch_loss_and_gradient(layer, triplets, margin)
    return grad


def triplet_accuracy(layer: EmbeddingLayer, triplets, margin: float = DEFAULT_MARGIN) -> float:
    """Fraction of triplets where the positive sits strictly closer than the
    negative in the embedded space."""
    if not triplets:
        raise ValueError("empty triplet batch")
    _, _, d_pos, d_neg = batch_loss_and_gradient(layer, triplets, margin)
    return float(np.mean(d_pos < d_neg))


def build_triplets(vectors, seed: int = 0, per_anchor: int = 1) -> list["Triplet"]:
    """Assemble triplets from style vectors carrying author ids.

    Every document with a same-author partner serves as an anchor; positives
    are drawn from the author's other documents and negatives uniformly from
    other authors' documents.
    """
    by_author: dict[str, list[StyleVector]] = {}
    for vec in vectors:
        if vec.author_id is None:
            raise ValueError(f"vector for doc {vec.doc_id!r} lacks an author_id")
        by_author.setdefault(vec.author_id, []).append(vec)
    if len(by_author) < 2:
        raise InsufficientDataError("need documents from at least 2 authors to build triplets")
    if per_anchor < 1:
        raise ValueError("per_anchor must be positive")
    rng = random.Random(seed)
    authors = sorted(by_author)
    triplets = []
    for author in authors:
        own = by_author[author]
        if len(own) < 2:
            continue
        others = [v for other in authors if other != author for v in by_author[other]]
        for anchor in own:
            partners = [v for v in own if v is not anchor]
            for _ in range(per_anchor):
                triplets.append(
                    Triplet(anchor, rng.choice(partners), rng.choice(others))
                )
    if not triplets:
        raise InsufficientDataError("no author has 2 or more documents; cannot form triplets")
    return triplets


@dataclass
class TrainConfig:
    margin: float = DEFAULT_MARGIN
    batch_size: int = DEFAULT_BATCH_SIZE
    learning_rate: float = DEFAULT_LEARNING_RATE
    early_stop_threshold: float = DEFAULT_EARLY_STOP_THRESHOLD
    patience: int = DEFAULT_PATIENCE
    max_epochs: int = DEFAULT_MAX_EPOCHS
    seed: int = 0
    linear_dim: int = DEFAULT_LINEAR_DIM

    def __post_init__(self):
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.patience < 1 or self.max_epochs < 1:
            raise ValueError("patience and max_epochs must be positive")


def train(kind: str, train_triplets, val_triplets, config: TrainConfig | None = None):
    """Train a layer with AdamW, early-stopping on validation loss.

    Validation loss is checked each epoch; an epoch improving the best seen
    loss by less than the early-stop threshold counts against the patience
    budget, and the weights from the best epoch are returned. The history
    records per-epoch losses plus the optimizer settings and backend.
    """
    config = config or TrainConfig()
    if not train_triplets or not val_triplets:
        raise InsufficientDataError("training and validation triplet sets must be non-empty")
    d = train_triplets[0].anchor.dimension
    layer = EmbeddingLayer.initialize(kind, d, m=config.linear_dim, seed=config.seed)
    kernel = _kernel_for(layer)
    a_val, p_val, n_val = _batch_arrays(val_triplets)
    a_tr, p_tr, n_tr = _batch_arrays(train_triplets)

    weights = layer.weights.copy()
    moment1 = np.zeros_like(weights)
    moment2 = np.zeros_like(weights)
    step = 0
    rng = np.random.default_rng(config.seed)
    best_val = float("inf")
    best_weights = weights.copy()
    best_epoch = 0
    stall = 0
    epochs = []
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_triplets))
        epoch_losses = []
        for lo in range(0, len(order), config.batch_size):
            idx = order[lo:lo + config.batch_size]
            loss, grad, _, _ = kernel(
                weights, a_tr[idx], p_tr[idx], n_tr[idx], config.margin
            )
            epoch_losses.append(loss)
            step += 1
            moment1 = ADAM_BETA1 * moment1 + (1 - ADAM_BETA1) * grad
            moment2 = ADAM_BETA2 * moment2 + (1 - ADAM_BETA2) * grad * grad
            m_hat = moment1 / (1 - ADAM_BETA1 ** step)
            v_hat = moment2 / (1 - ADAM_BETA2 ** step)
            weights = weights - config.learning_rate * (
                m_hat / (np.sqrt(v_hat) + ADAM_EPSILON) + WEIGHT_DECAY * weights
            )
        val_loss, _, _, _ = kernel(weights, a_val, p_val, n_val, config.margin)
        epochs.append(
            {"epoch": epoch, "train_loss": float(np.mean(epoch_losses)),
             "val_loss": float(val_loss)}
        )
        if best_val - val_loss >= config.early_stop_threshold:
            stall = 0
        else:
            stall += 1
        if val_loss < best_val:
            best_val = float(val_loss)
            best_weights = weights.copy()
            best_epoch = epoch
        if stall >= config.patience:
            break
    history = {
        "kind": kind,
        "backend": _kernels.BACKEND,
        "epochs": epochs,
        "best_epoch": best_epoch,
        "best_val_loss": best_val,
        "optimizer": {
            "name": "adamw",
            "learning_rate": config.learning_rate,
            "beta1": ADAM_BETA1,
            "beta2": ADAM_BETA2,
            "epsilon": ADAM_EPSILON,
            "weight_decay": WEIGHT_DECAY,
        },
        "config": {
            "margin": config.margin,
            "batch_size": config.batch_size,
            "early_stop_threshold": config.early_stop_threshold,
            "patience": config.patience,
            "max_epochs": config.max_epochs,
            "seed": config.seed,
        },
    }
    return EmbeddingLayer(kind, best_weights), history
