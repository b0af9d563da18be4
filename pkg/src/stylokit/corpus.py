"""Author-attributed corpora: ingestion, seeded subsampling, preprocessing.

A corpus is an ordered list of documents, each with a stable ``doc_id``, an
``author_id``, and raw UTF-8 text. Preprocessing rewrites emoji as
colon-delimited ASCII aliases and truncates texts to their first 25
sentences. Both steps are deterministic and idempotent, so annotating the
same corpus twice produces the same inputs.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from importlib import resources

from stylokit._jsonl import read_jsonl, write_jsonl
from stylokit.errors import DataError, InsufficientDataError

logger = logging.getLogger(__name__)

MAX_SENTENCES = 25

_VARIATION_SELECTOR = "️"
_QUOTE_CHARS = "\"'“”‘’"
_TERMINALS = ".!?…"


def _data_text(name: str) -> str:
    return resources.files("stylokit").joinpath("data").joinpath(name).read_text("utf-8")


def emoji_aliases() -> dict[str, str]:
    """Mapping from single-codepoint emoji to snake_case alias names."""
    return dict(_EMOJI_ALIASES)


_EMOJI_ALIASES: dict[str, str] = json.loads(_data_text("emoji_aliases.json"))

_ABBREVIATIONS = frozenset(
    line.strip()
    for line in _data_text("abbreviations.txt").splitlines()
    if line.strip() and not line.startswith("#")
)


@dataclass(frozen=True)
class Document:
    doc_id: str
    author_id: str
    text: str


class Corpus:
    """An ordered document collection indexed by author.

    Duplicate doc_ids are rejected at construction; document order is
    preserved everywhere so seeded operations are reproducible.
    """

    def __init__(self, documents: list[Document]):
        by_id: dict[str, Document] = {}
        by_author: dict[str, list[str]] = {}
        for doc in documents:
            if doc.doc_id in by_id:
                raise DataError(f"duplicate doc_id {doc.doc_id!r}")
            by_id[doc.doc_id] = doc
            by_author.setdefault(doc.author_id, []).append(doc.doc_id)
        self.documents = list(documents)
        self._by_id = by_id
        self.by_author = by_author

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def document(self, doc_id: str) -> Document:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise DataError(f"unknown doc_id {doc_id!r}") from None

    @property
    def authors(self) -> list[str]:
        return list(self.by_author)

    def save(self, path) -> None:
        write_jsonl(
            path,
            (
                {"doc_id": d.doc_id, "author_id": d.author_id, "text": d.text}
                for d in self.documents
            ),
        )


def ingest_corpus(path, format: str = "jsonl") -> Corpus:
    """Load a corpus file into memory, validating every record.

    Malformed lines and missing or non-string fields raise DataError naming
    the line number. Unknown extra fields are ignored.
    """
    if format != "jsonl":
        raise ValueError(f"unsupported corpus format {format!r}")
    documents = []
    for lineno, record in read_jsonl(path):
        doc = _parse_document(record, path, lineno)
        documents.append(doc)
    if not documents:
        raise DataError(f"{path}: empty corpus")
    try:
        return Corpus(documents)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def _parse_document(record: dict, path, lineno: int) -> Document:
    for key in ("doc_id", "author_id", "text"):
        if key not in record:
            raise DataError(f"{path}: line {lineno}: missing field {key!r}")
        if not isinstance(record[key], str):
            raise DataError(f"{path}: line {lineno}: field {key!r} must be a string")
    if not record["text"].strip():
        raise DataError(f"{path}: line {lineno}: empty text")
    return Document(record["doc_id"], record["author_id"], record["text"])


def sample_annotation_subset(corpus: Corpus, n_authors: int, posts_per_author: int, seed: int) -> Corpus:
    """Pick a seeded subset: n_authors authors, posts_per_author docs each.

    Authors with too few documents are excluded from the draw (logged, not an
    error); an insufficient number of eligible authors raises.
    """
    if n_authors < 1 or posts_per_author < 1:
        raise ValueError("n_authors and posts_per_author must be positive")
    eligible = [a for a, docs in corpus.by_author.items() if len(docs) >= posts_per_author]
    excluded = len(corpus.by_author) - len(eligible)
    if excluded:
        logger.info(
            "excluding %d authors with fewer than %d documents", excluded, posts_per_author
        )
    if len(eligible) < n_authors:
        raise InsufficientDataError(
            f"need {n_authors} authors with at least {posts_per_author} documents,"
            f" only {len(eligible)} eligible"
        )
    rng = random.Random(seed)
    chosen = rng.sample(eligible, n_authors)
    keep: set[str] = set()
    for author in chosen:
        keep.update(rng.sample(corpus.by_author[author], posts_per_author))
    return Corpus([d for d in corpus.documents if d.doc_id in keep])


def alias_emoji(text: str) -> str:
    """Replace known emoji with :snake_case: aliases.

    Unknown codepoints pass through untouched. A variation selector riding on
    a mapped emoji is consumed with it.
    """
    out = []
    i = 0
    n = len(text)
    while i < n:
        name = _EMOJI_ALIASES.get(text[i])
        if name is None:
            out.append(text[i])
            i += 1
            continue
        out.append(f":{name}:")
        i += 1
        if i < n and text[i] == _VARIATION_SELECTOR:
            i += 1
    return "".join(out)


def _is_abbreviation_period(text: str, run_start: int, run_end: int) -> bool:
    if run_end != run_start or text[run_start] != ".":
        return False
    w = run_start
    while w > 0 and text[w - 1].isalpha():
        w -= 1
    return text[w:run_start] in _ABBREVIATIONS


def _sentence_spans(text: str) -> list[tuple[int, int]]:
    """Half-open (start, end) spans of sentences, whitespace trimmed.

    A sentence ends at a newline, or at a run of terminal punctuation
    followed by whitespace and an uppercase or quote character, unless the
    period belongs to a known abbreviation.
    """
    spans: list[tuple[int, int]] = []
    n = len(text)
    start: int | None = None
    last_nonspace = -1
    i = 0
    while i < n:
        ch = text[i]
        if ch == "\n":
            if start is not None:
                spans.append((start, last_nonspace + 1))
                start = None
            i += 1
            continue
        if not ch.isspace():
            if start is None:
                start = i
            last_nonspace = i
            if ch in _TERMINALS:
                j = i
                while j + 1 < n and text[j + 1] in _TERMINALS:
                    j += 1
                k = j + 1
                if k < n and text[k].isspace():
                    m = k
                    while m < n and text[m].isspace():
                        m += 1
                    nxt = text[m] if m < n else ""
                    boundary = bool(nxt) and (nxt.isupper() or nxt in _QUOTE_CHARS)
                    if boundary and not _is_abbreviation_period(text, i, j):
                        spans.append((start, j + 1))
                        start = None
                        i = m
                        continue
                last_nonspace = j
                i = j + 1
                continue
        i += 1
    if start is not None:
        spans.append((start, last_nonspace + 1))
    return spans


def split_sentences(text: str) -> list[str]:
    return [text[a:b] for a, b in _sentence_spans(text)]


def preprocess(text: str) -> str:
    """Alias emoji, then truncate to the first MAX_SENTENCES sentences.

    Texts already within the limit come back unchanged (after aliasing), so
    the function is idempotent.
    """
    aliased = alias_emoji(text)
    spans = _sentence_spans(aliased)
    if len(spans) <= MAX_SENTENCES:
        return aliased
    return aliased[: spans[MAX_SENTENCES - 1][1]]


def preprocess_corpus(corpus: Corpus) -> Corpus:
    return Corpus(
        [Document(d.doc_id, d.author_id, preprocess(d.text)) for d in corpus.documents]
    )
