"""Shared test fixtures: a scripted completion client and corpus builders."""

import json
import re

from stylokit import prompts as prompt_defs
from stylokit.annotation import prompt_key
from stylokit.corpus import Document, preprocess

MARKER_ATTRIBUTES = [
    ("relies on exclamation marks", "The author uses exclamation marks."),
    ("asks direct questions", "The author uses question marks."),
    ("cites numbers", "The author is using numbers."),
    ("shouts in capital letters", "The author is using all-caps words."),
    ("scatters emoji", "The author is using emoji."),
    ("keeps sentences short", "The author is using short sentences."),
    ("builds long sentences", "The author is using long sentences."),
    ("leans on contractions", "The author is using contractions."),
]

_STAGE2_PREFIX = "Here's a description of an author's writing style for a passage: "


class ScriptedLLM:
    """Deterministic completion client: stage-1 output depends only on the
    passage's surface features, stage-2 output only on the description."""

    def __init__(self):
        self.calls = 0

    def complete(self, prompt: str) -> str:
        self.calls += 1
        if prompt.startswith(_STAGE2_PREFIX):
            return self._standardize(prompt)
        return self._describe(prompt)

    def _describe(self, prompt: str) -> str:
        start = prompt.index("\n\nPassage: ") + len("\n\nPassage: ")
        end = prompt.rindex("\n\nDescription: ")
        passage = prompt[start:end]
        markers = []
        if "!" in passage:
            markers.append("relies on exclamation marks")
        if "?" in passage:
            markers.append("asks direct questions")
        if re.search(r"\d", passage):
            markers.append("cites numbers")
        if re.search(r"\b[A-Z]{2,}\b", passage):
            markers.append("shouts in capital letters")
        if re.search(r":[a-z0-9_]+:", passage):
            markers.append("scatters emoji")
        markers.append(
            "keeps sentences short" if len(passage.split()) < 30 else "builds long sentences"
        )
        if "'" in passage:
            markers.append("leans on contractions")
        feature = re.search(r"has any (.+)\?\n\nPassage:", prompt)
        if feature and (len(passage) + len(feature.group(1))) % 3 == 0:
            markers.append(f"displays {feature.group(1)}")
        sentences = ". The passage ".join(markers)
        return f"The passage {sentences}. Overall the style is distinctive."

    def _standardize(self, prompt: str) -> str:
        end = prompt.index("\n\nRewrite this description")
        description = prompt[len(_STAGE2_PREFIX):end]
        lines = ["Here is the standardized list:"]
        for marker, attribute in MARKER_ATTRIBUTES:
            if marker in description:
                lines.append(attribute)
        displayed = re.search(r"displays ([^.]+)\.", description)
        if displayed:
            lines.append(f"The author is using {displayed.group(1)}.")
        if len(lines) == 1:
            lines.append("The author is using plain language.")
        return "\n".join(lines)


def build_transcript(documents) -> dict[str, str]:
    """Record every (stage-1, stage-2) completion the pipeline will request
    for these documents, keyed by prompt hash."""
    llm = ScriptedLLM()
    transcript = {}
    for doc in documents:
        text = preprocess(doc.text)
        for sp in prompt_defs.stage1_prompts():
            stage1_prompt = prompt_defs.render_stage1(sp.template, text, sp.feature)
            stage1 = llm.complete(stage1_prompt)
            transcript[prompt_key(stage1_prompt)] = stage1
            stage2_prompt = prompt_defs.render_standardization(stage1)
            transcript[prompt_key(stage2_prompt)] = llm.complete(stage2_prompt)
    return transcript


def write_transcript(transcript: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(transcript):
            fh.write(json.dumps({"prompt_sha256": key, "completion": transcript[key]}) + "\n")


def tiny_documents() -> list[Document]:
    """Three authors with three documents each and recognizably different
    surface styles (exclamations, questions, numbers)."""
    texts = {
        "ann": [
            "What a day! The sun came out and EVERYTHING changed! I ran outside!",
            "Best concert ever! The BAND played for hours! My ears still ring!",
            "I won the raffle! A whole BASKET of fruit! Lucky me!",
        ],
        "ben": [
            "Have you considered the northern route? It's quieter. Why rush anyway?",
            "What's the point of hurrying? The cafe doesn't open early. Shall we walk?",
            "Who left this here? It wasn't me. Could you ask around?",
        ],
        "cara": [
            "The ledger shows 42 entries across 7 columns. Total comes to 1305.",
            "Mixing 250 grams of flour with 3 eggs yields 12 pancakes. Start at 8am.",
            "Route 9 covers 140 kilometers with 2 stops. Fuel budget sits at 60.",
        ],
    }
    return [
        Document(f"{author}-{i}", author, text)
        for author, samples in texts.items()
        for i, text in enumerate(samples, start=1)
    ]


def write_corpus_file(documents, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in documents:
            fh.write(
                json.dumps(
                    {"doc_id": doc.doc_id, "author_id": doc.author_id, "text": doc.text}
                )
                + "\n"
            )
