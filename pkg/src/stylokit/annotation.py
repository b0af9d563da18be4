"""Two-stage style annotation: completion clients, caching, dataset assembly.

Each document is annotated by 93 stage-1 prompts; every stage-1 description
is rewritten by the standardization prompt and parsed into "The author ..."
attribute sentences. Completions are cached on disk by prompt hash, so
resuming an interrupted run only pays for prompts not yet answered.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import requests

from stylokit import prompts as prompt_defs
from stylokit._jsonl import atomic_write_text, read_jsonl, write_jsonl
from stylokit.corpus import Corpus, Document, preprocess, split_sentences
from stylokit.errors import DataError, InsufficientDataError

logger = logging.getLogger(__name__)

ATTRIBUTE_PREFIX = "The author"
DEFAULT_PRICE_PER_1K = 0.02
DEFAULT_COMPLETION_TOKENS = 100
DEFAULT_RETRY_ATTEMPTS = 3


class CompletionClient(Protocol):
    def complete(self, prompt: str) -> str: ...


def prompt_key(prompt: str) -> str:
    """Stable cache key for a prompt."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class ReplayClient:
    """Replays completions recorded by prompt hash; fully deterministic.

    Transcript files are JSON lines with ``prompt_sha256`` and ``completion``
    fields. An unknown prompt raises DataError rather than inventing output.
    """

    def __init__(self, transcript: dict[str, str]):
        self._transcript = dict(transcript)
        self.calls = 0

    @classmethod
    def from_file(cls, path) -> "ReplayClient":
        transcript = {}
        for lineno, record in read_jsonl(path):
            try:
                transcript[record["prompt_sha256"]] = record["completion"]
            except KeyError as exc:
                raise DataError(f"{path}: line {lineno}: missing field {exc.args[0]!r}") from None
        return cls(transcript)

    def complete(self, prompt: str) -> str:
        self.calls += 1
        key = prompt_key(prompt)
        try:
            return self._transcript[key]
        except KeyError:
            raise DataError(f"no transcript entry for prompt hash {key[:12]}") from None


class HttpCompletionClient:
    """POSTs prompts to a completion endpoint with greedy decoding settings.

    The API key comes from the STYLOKIT_API_KEY environment variable unless
    passed explicitly. Responses may carry the text under ``completion`` or
    under OpenAI-style ``choices[0].text``.
    """

    def __init__(self, url: str, api_key: str | None = None, session=None, timeout: float = 60.0):
        self.url = url
        self._api_key = api_key if api_key is not None else os.environ.get("STYLOKIT_API_KEY")
        self._session = session if session is not None else requests.Session()
        self._timeout = timeout
        self.calls = 0

    def complete(self, prompt: str) -> str:
        self.calls += 1
        headers = {}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        response = self._session.post(
            self.url,
            json={"prompt": prompt, "temperature": 0.0, "top_p": 1.0},
            headers=headers,
            timeout=self._timeout,
        )
        response.raise_for_status()
        payload = response.json()
        if isinstance(payload, dict):
            if isinstance(payload.get("completion"), str):
                return payload["completion"]
            choices = payload.get("choices")
            if isinstance(choices, list) and choices and isinstance(choices[0], dict):
                text = choices[0].get("text")
                if isinstance(text, str):
                    return text
        raise DataError(f"unrecognized completion response from {self.url}")


class CachingClient:
    """Disk cache in front of another client, keyed by prompt hash.

    Cache writes are atomic, so concurrent workers and interrupted runs
    never corrupt entries. ``misses`` counts inner-client calls.
    """

    def __init__(self, inner: CompletionClient, cache_dir):
        self._inner = inner
        self._dir = Path(cache_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def complete(self, prompt: str) -> str:
        entry = self._dir / (prompt_key(prompt) + ".txt")
        try:
            cached = entry.read_text("utf-8")
        except FileNotFoundError:
            pass
        else:
            self.hits += 1
            return cached
        completion = self._inner.complete(prompt)
        atomic_write_text(entry, completion)
        self.misses += 1
        return completion


def client_from_spec(spec: str) -> CompletionClient:
    """Build a client from a CLI-style spec: ``replay:PATH`` or an URL."""
    if spec.startswith("replay:"):
        return ReplayClient.from_file(spec[len("replay:"):])
    if spec.startswith(("http:", "https:")):
        return HttpCompletionClient(spec)
    raise ValueError(f"unrecognized client spec {spec!r}")


def _complete_with_retries(client, prompt, attempts, base_delay, sleep):
    last_exc = None
    for attempt in range(attempts):
        try:
            return client.complete(prompt)
        except Exception as exc:
            last_exc = exc
            if attempt + 1 < attempts:
                delay = base_delay * (2 ** attempt)
                logger.warning("completion attempt %d failed (%s), retrying", attempt + 1, exc)
                sleep(delay)
    raise last_exc


def parse_attributes(stage2_text: str) -> list[str]:
    """Extract attribute sentences from a standardization completion.

    A valid attribute is a sentence starting with "The author"; everything
    else (preamble, stray fragments) is dropped. Order is preserved and
    duplicates within one completion are kept.
    """
    return [s for s in split_sentences(stage2_text) if s.startswith(ATTRIBUTE_PREFIX)]


@dataclass
class AnnotationRecord:
    """Outcome of one (document, stage-1 prompt) annotation."""

    doc_id: str
    author_id: str
    prompt_id: str
    stage1_text: str
    stage2_text: str
    attributes: list[str]
    skipped: bool = False
    skip_reason: str | None = None

    def to_json_dict(self) -> dict:
        out = {
            "doc_id": self.doc_id,
            "author_id": self.author_id,
            "prompt_id": self.prompt_id,
            "stage1_text": self.stage1_text,
            "stage2_text": self.stage2_text,
            "attributes": self.attributes,
        }
        if self.skipped:
            out["skipped"] = True
            out["skip_reason"] = self.skip_reason
        return out

    @classmethod
    def from_json_dict(cls, record: dict) -> "AnnotationRecord":
        try:
            return cls(
                doc_id=record["doc_id"],
                author_id=record["author_id"],
                prompt_id=record["prompt_id"],
                stage1_text=record["stage1_text"],
                stage2_text=record["stage2_text"],
                attributes=list(record["attributes"]),
                skipped=bool(record.get("skipped", False)),
                skip_reason=record.get("skip_reason"),
            )
        except KeyError as exc:
            raise DataError(f"annotation record missing field {exc.args[0]!r}") from None


def _annotate_one(doc: Document, sp, client, attempts, base_delay, sleep) -> AnnotationRecord:
    try:
        stage1 = _complete_with_retries(
            client, prompt_defs.render_stage1(sp.template, doc.text, sp.feature),
            attempts, base_delay, sleep,
        )
        if not stage1.strip():
            raise DataError("empty stage-1 completion")
        stage2 = _complete_with_retries(
            client, prompt_defs.render_standardization(stage1),
            attempts, base_delay, sleep,
        )
        return AnnotationRecord(
            doc.doc_id, doc.author_id, sp.prompt_id, stage1, stage2,
            parse_attributes(stage2),
        )
    except Exception as exc:
        logger.warning("skipping %s/%s: %s", doc.doc_id, sp.prompt_id, exc)
        return AnnotationRecord(
            doc.doc_id, doc.author_id, sp.prompt_id, "", "", [],
            skipped=True, skip_reason=str(exc),
        )


def annotate_document(doc: Document, client: CompletionClient, *,
                      attempts: int = DEFAULT_RETRY_ATTEMPTS,
                      retry_base_delay: float = 0.5,
                      sleep=time.sleep) -> list[AnnotationRecord]:
    """Annotate one (already preprocessed) document with all 93 prompts.

    Client failures that survive the retries mark the record skipped and the
    run continues; nothing raises out of a single bad prompt.
    """
    return [
        _annotate_one(doc, sp, client, attempts, retry_base_delay, sleep)
        for sp in prompt_defs.stage1_prompts()
    ]


class StyleGenomeDataset:
    """Annotation records plus the attribute/author/document indexes.

    ``doc_texts`` carries the preprocessed text of every annotated document;
    datasets loaded from disk without a corpus have empty texts and support
    only index queries.
    """

    def __init__(self, records: list[AnnotationRecord],
                 doc_texts: dict[str, str] | None = None):
        self.records = list(records)
        self.doc_texts = dict(doc_texts or {})
        self.doc_authors: dict[str, str] = {}
        self.attr_to_authors: dict[str, set[str]] = {}
        self.attr_to_docs: dict[str, list[str]] = {}
        self.author_to_attrs: dict[str, set[str]] = {}
        for rec in self.records:
            self.doc_authors[rec.doc_id] = rec.author_id
            if rec.skipped:
                continue
            for attr in rec.attributes:
                self.attr_to_authors.setdefault(attr, set()).add(rec.author_id)
                self.author_to_attrs.setdefault(rec.author_id, set()).add(attr)
                docs = self.attr_to_docs.setdefault(attr, [])
                if rec.doc_id not in docs:
                    docs.append(rec.doc_id)

    def __len__(self) -> int:
        return len(self.records)

    def distinct_attributes(self) -> list[str]:
        return sorted(self.attr_to_authors)

    def author_count(self, attribute: str) -> int:
        return len(self.attr_to_authors.get(attribute, ()))

    def documents_for(self, attribute: str) -> list[str]:
        return list(self.attr_to_docs.get(attribute, ()))

    def text_of(self, doc_id: str) -> str:
        try:
            return self.doc_texts[doc_id]
        except KeyError:
            raise DataError(
                f"no text for doc {doc_id!r}; reload the dataset with its corpus"
            ) from None

    def without_attributes(self, attributes: set[str]) -> "StyleGenomeDataset":
        pruned = [
            AnnotationRecord(
                r.doc_id, r.author_id, r.prompt_id, r.stage1_text, r.stage2_text,
                [a for a in r.attributes if a not in attributes],
                r.skipped, r.skip_reason,
            )
            for r in self.records
        ]
        return StyleGenomeDataset(pruned, self.doc_texts)

    def restricted_to_authors(self, authors: set[str]) -> "StyleGenomeDataset":
        kept = [r for r in self.records if r.author_id in authors]
        texts = {d: t for d, t in self.doc_texts.items()
                 if self.doc_authors.get(d) in authors}
        return StyleGenomeDataset(kept, texts)

    def save(self, path) -> None:
        write_jsonl(path, (r.to_json_dict() for r in self.records))

    @classmethod
    def load(cls, path, corpus: Corpus | None = None) -> "StyleGenomeDataset":
        records = [AnnotationRecord.from_json_dict(rec) for _, rec in read_jsonl(path)]
        texts = None
        if corpus is not None:
            texts = {d.doc_id: preprocess(d.text) for d in corpus.documents}
        return cls(records, texts)


def build_dataset(corpus: Corpus, client: CompletionClient, *,
                  concurrency: int = 1, cache_dir=None,
                  attempts: int = DEFAULT_RETRY_ATTEMPTS,
                  retry_base_delay: float = 0.5,
                  sleep=time.sleep) -> StyleGenomeDataset:
    """Annotate a whole corpus: preprocess, fan out (document, prompt) tasks,
    and assemble records in canonical (doc_id, prompt_id) order.

    Results are deterministic for a deterministic client regardless of
    concurrency, because ordering never depends on completion timing.
    """
    if len(corpus) == 0:
        raise InsufficientDataError("empty corpus")
    if concurrency < 1:
        raise ValueError("concurrency must be positive")
    if cache_dir is not None:
        client = CachingClient(client, cache_dir)
    docs = [Document(d.doc_id, d.author_id, preprocess(d.text)) for d in corpus.documents]
    tasks = [(doc, sp) for doc in docs for sp in prompt_defs.stage1_prompts()]

    def run(task):
        doc, sp = task
        return _annotate_one(doc, sp, client, attempts, retry_base_delay, sleep)

    if concurrency == 1:
        records = [run(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            records = list(pool.map(run, tasks))
    records.sort(key=lambda r: (r.doc_id, r.prompt_id))
    skipped = sum(r.skipped for r in records)
    if skipped:
        logger.warning("%d of %d annotations skipped", skipped, len(records))
    return StyleGenomeDataset(records, {d.doc_id: d.text for d in docs})


@dataclass(frozen=True)
class CostEstimate:
    total_tokens: int
    price_per_1k: float
    total_cost: float
    documents: int = 0
    prompts_per_document: int = 0

    @classmethod
    def from_tokens(cls, total_tokens: int, price_per_1k: float = DEFAULT_PRICE_PER_1K,
                    documents: int = 0, prompts_per_document: int = 0) -> "CostEstimate":
        if total_tokens < 0 or price_per_1k < 0:
            raise ValueError("token count and price must be non-negative")
        return cls(total_tokens, price_per_1k,
                   total_tokens / 1000 * price_per_1k,
                   documents, prompts_per_document)


def _token_estimate(text: str) -> int:
    """Heuristic token count: one token per four characters, rounded up."""
    return math.ceil(len(text) / 4)


def estimate_cost(corpus: Corpus, price_per_1k: float = DEFAULT_PRICE_PER_1K,
                  completion_tokens: int = DEFAULT_COMPLETION_TOKENS) -> CostEstimate:
    """Estimate annotation cost for a corpus before spending anything.

    Per (document, stage-1 prompt): the stage-1 prompt and its completion,
    the standardization prompt (scaffold plus the embedded stage-1 output,
    charged at the completion allowance), and the stage-2 completion. The
    completion allowance is a fixed per-call budget, so the estimate is
    linear in the number of documents for same-sized texts.
    """
    if completion_tokens < 0:
        raise ValueError("completion_tokens must be non-negative")
    stage2_scaffold = _token_estimate(
        prompt_defs.standardization_template().body.replace(prompt_defs.DESCRIPTION_SLOT, "")
    )
    plan = prompt_defs.stage1_prompts()
    total = 0
    for doc in corpus.documents:
        text = preprocess(doc.text)
        for sp in plan:
            stage1_prompt = prompt_defs.render_stage1(sp.template, text, sp.feature)
            total += _token_estimate(stage1_prompt) + completion_tokens
            total += stage2_scaffold + completion_tokens + completion_tokens
    return CostEstimate.from_tokens(total, price_per_1k, len(corpus), len(plan))
