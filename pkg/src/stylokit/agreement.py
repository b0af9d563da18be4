"""Agreement scoring between texts and style attributes.

An agreement scorer maps (text, attribute) to [0, 1]. This module carries
the scorer contract, a deterministic lexical reference scorer, negative-pool
construction, class-balanced batch sampling, attribute-level holdout splits,
training-file export, and threshold-based scorer evaluation.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from stylokit.corpus import emoji_aliases
from stylokit.errors import InsufficientDataError
from stylokit._jsonl import atomic_write_text
from stylokit.annotation import ATTRIBUTE_PREFIX

DEFAULT_BATCH_SIZE = 1440
DEFAULT_POOL_SIZE = 10000
DEFAULT_HOLDOUT_ATTRIBUTES = 50
DEFAULT_MIN_EXAMPLES = 30
DEFAULT_MAX_EXAMPLES = 50
DEFAULT_THRESHOLD = 0.5


class AgreementScorer(Protocol):
    def score(self, text: str, attribute: str) -> float: ...


@dataclass(frozen=True)
class LabeledExample:
    """One (attribute, text, label) training example.

    For negatives, ``source_attribute`` records which dissimilar attribute
    supplied the text; positives leave it None.
    """

    attribute: str
    text: str
    label: int
    source_attribute: str | None = None

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass
class Batch:
    examples: list[LabeledExample]

    def __post_init__(self):
        pos = sum(e.label for e in self.examples)
        if pos * 2 != len(self.examples):
            raise ValueError(
                f"batch is not class-balanced: {pos} positive of {len(self.examples)}"
            )

    def __len__(self) -> int:
        return len(self.examples)


def negative_pool(attribute: str, all_attributes: Sequence[str], sim,
                  k: int = DEFAULT_POOL_SIZE) -> list[str]:
    """The k attributes least similar to the query, most dissimilar first.

    Ties break lexicographically; k larger than the pool clamps to the pool.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if not all_attributes:
        raise InsufficientDataError(f"no candidate attributes for {attribute!r}")
    ranked = sorted(all_attributes, key=lambda text: (sim.sim(attribute, text), text))
    return ranked[: min(k, len(ranked))]


def sample_batch(dataset, sim, batch_size: int = DEFAULT_BATCH_SIZE, seed: int = 0,
                 k: int = DEFAULT_POOL_SIZE) -> Batch:
    """Draw one class-balanced batch of agreement examples.

    Positives pair an attribute (uniform over the distinct attributes) with a
    document it was mined from; each positive's negative keeps the attribute
    and takes text from a document of an attribute in its negative pool.
    """
    if batch_size < 2 or batch_size % 2:
        raise ValueError("batch_size must be an even number of at least 2")
    attributes = dataset.distinct_attributes()
    if len(attributes) < 2:
        raise InsufficientDataError("need at least 2 distinct attributes to sample negatives")
    rng = random.Random(seed)
    pools: dict[str, list[str]] = {}
    examples: list[LabeledExample] = []
    for _ in range(batch_size // 2):
        attribute = rng.choice(attributes)
        text = dataset.text_of(rng.choice(dataset.documents_for(attribute)))
        examples.append(LabeledExample(attribute, text, 1))
        pool = pools.get(attribute)
        if pool is None:
            others = [a for a in attributes if a != attribute]
            pool = negative_pool(attribute, others, sim, k)
            pools[attribute] = pool
        source = rng.choice(pool)
        neg_text = dataset.text_of(rng.choice(dataset.documents_for(source)))
        examples.append(LabeledExample(attribute, neg_text, 0, source_attribute=source))
    return Batch(examples)


@dataclass
class HoldoutSplit:
    train: object
    validation_attributes: list[str]
    validation: list[LabeledExample]


def holdout_split(dataset, n_attributes: int = DEFAULT_HOLDOUT_ATTRIBUTES,
                  min_examples: int = DEFAULT_MIN_EXAMPLES,
                  max_examples: int = DEFAULT_MAX_EXAMPLES,
                  seed: int = 0) -> HoldoutSplit:
    """Hold out whole attributes for validation.

    Eligible attributes have between min_examples and max_examples distinct
    documents; n_attributes of them are drawn with the seed, their examples
    become the validation set (positives), and the training dataset has those
    attributes stripped so no validation attribute leaks into training.
    """
    if n_attributes < 1:
        raise ValueError("n_attributes must be positive")
    if min_examples < 1 or max_examples < min_examples:
        raise ValueError("need 1 <= min_examples <= max_examples")
    eligible = [
        a for a in dataset.distinct_attributes()
        if min_examples <= len(dataset.documents_for(a)) <= max_examples
    ]
    if len(eligible) < n_attributes:
        raise InsufficientDataError(
            f"need {n_attributes} holdout attributes with {min_examples}"
            f"-{max_examples} examples, only {len(eligible)} eligible"
        )
    rng = random.Random(seed)
    chosen = sorted(rng.sample(eligible, n_attributes))
    validation = [
        LabeledExample(a, dataset.text_of(doc_id), 1)
        for a in chosen
        for doc_id in dataset.documents_for(a)
    ]
    return HoldoutSplit(dataset.without_attributes(set(chosen)), chosen, validation)


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\n", "\\n")
        .replace("\t", "\\t")
        .replace("\r", "\\r")
    )


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            mapped = {"\\": "\\", "n": "\n", "t": "\t", "r": "\r"}.get(nxt)
            if mapped is not None:
                out.append(mapped)
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def format_example(example: LabeledExample) -> str:
    return f"{_escape(example.attribute)}|||{_escape(example.text)}\t{example.label}"


def export_training_file(batches: Sequence[Batch], path) -> int:
    """Write batches as training lines: attribute|||text<TAB>label.

    Newlines, tabs, and backslashes inside fields are escaped so each example
    is exactly one line. Returns the number of lines written.
    """
    lines = [format_example(e) for batch in batches for e in batch.examples]
    atomic_write_text(path, "".join(line + "\n" for line in lines))
    return len(lines)


def parse_training_file(path) -> list[LabeledExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            body, tab, label_text = line.rpartition("\t")
            attribute, sep, text = body.partition("|||")
            if not tab or not sep or label_text not in ("0", "1"):
                raise ValueError(f"{path}: line {lineno}: malformed training line")
            examples.append(
                LabeledExample(_unescape(attribute), _unescape(text), int(label_text))
            )
    return examples


def evaluate_scorer(scorer: AgreementScorer, examples: Sequence[LabeledExample],
                    threshold: float = DEFAULT_THRESHOLD) -> dict[str, float]:
    """Threshold the scorer into a classifier and report precision, recall,
    f1, and accuracy. Empty denominators yield 0.0 rather than raising."""
    if not examples:
        raise InsufficientDataError("no examples to evaluate")
    tp = fp = tn = fn = 0
    for ex in examples:
        predicted = scorer.score(ex.text, ex.attribute) >= threshold
        if predicted and ex.label == 1:
            tp += 1
        elif predicted and ex.label == 0:
            fp += 1
        elif not predicted and ex.label == 0:
            tn += 1
        else:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = (tp + tn) / len(examples)
    return {"precision": precision, "recall": recall, "f1": f1, "accuracy": accuracy}


_FRAME_RE = re.compile(
    r"^The author\s+(?:is using|is being|uses|used|is|has|writes)?\s*", re.IGNORECASE
)
_STOPWORDS = frozenset(
    """a an the is are was were be being been has have had uses use used using
    does do did and or of to in on for with as at by that this these those
    their they them it its such like often frequently sometimes occasionally
    very many much some several lot lots author writing writes written style
    tone manner way word words language""".split()
)
_CAPS_RE = re.compile(r"\b[A-Z]{2,}\b")
_ALIAS_RE = re.compile(r":[a-z0-9_]+:")
_EMOJI_CHARS = frozenset(emoji_aliases())


def _keywords(attribute: str) -> list[str]:
    stripped = _FRAME_RE.sub("", attribute)
    tokens = re.findall(r"[a-z0-9]+", stripped.lower())
    return [t for t in tokens if t not in _STOPWORDS]


def lexical_reference_score(text: str, attribute: str) -> float:
    """Deterministic surface-evidence scorer used as the reference
    implementation of the agreement contract.

    Attributes naming punctuation, casing, emoji, or digit usage are checked
    directly against the text; otherwise the score is the fraction of the
    attribute's content keywords present in the text. An attribute with no
    content keywords scores 0.5 (no evidence either way).
    """
    if not attribute.startswith(ATTRIBUTE_PREFIX):
        raise ValueError(f"attribute must start with {ATTRIBUTE_PREFIX!r}: {attribute!r}")
    lowered = attribute.lower()
    if "exclamation" in lowered:
        return 1.0 if "!" in text else 0.0
    if "question mark" in lowered:
        return 1.0 if "?" in text else 0.0
    if "all caps" in lowered or "all-caps" in lowered or "capital" in lowered or "uppercase" in lowered:
        return 1.0 if _CAPS_RE.search(text) else 0.0
    if "emoji" in lowered or "emoticon" in lowered:
        has = bool(_ALIAS_RE.search(text)) or any(ch in _EMOJI_CHARS for ch in text)
        return 1.0 if has else 0.0
    if "number" in lowered or "numeral" in lowered or "digit" in lowered:
        return 1.0 if re.search(r"\d", text) else 0.0
    keywords = _keywords(attribute)
    if not keywords:
        return 0.5
    text_tokens = set(re.findall(r"[a-z0-9]+", text.lower()))
    matched = sum(1 for kw in keywords if kw in text_tokens)
    return matched / len(keywords)


class LexicalScorer:
    """Agreement scorer backed by lexical_reference_score."""

    def score(self, text: str, attribute: str) -> float:
        return lexical_reference_score(text, attribute)
