"""Prompt templates for the two-stage annotation protocol.

Stage 1 asks for a free-form style description of a passage, either through
one of six open-ended templates or through the targeted template
instantiated with one of 87 targeted features (93 stage-1 prompts per
document in total). The standardization template then rewrites a stage-1
description into short "The author ..." sentences.

Templates live in ``data/prompts.toml``, a key/value block file with one
template per block; targeted features live in ``data/targeted_features.txt``.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from importlib import resources

from stylokit.errors import DataError

CATEGORIES = ("open", "targeted", "standardization")

PASSAGE_SLOT = "{{passage}}"
DESCRIPTION_SLOT = "{{description}}"
FEATURE_SLOT = "{{target_feature}}"
DEFINITION_SLOT = "{{target_feature_definition}}"

_ALL_SLOTS = (PASSAGE_SLOT, DESCRIPTION_SLOT, FEATURE_SLOT, DEFINITION_SLOT)
_REQUIRED_SLOTS = {
    "open": frozenset({PASSAGE_SLOT}),
    "targeted": frozenset({PASSAGE_SLOT, FEATURE_SLOT, DEFINITION_SLOT}),
    "standardization": frozenset({DESCRIPTION_SLOT}),
}


@dataclass(frozen=True)
class PromptTemplate:
    prompt_id: str
    category: str
    name: str
    body: str

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown template category {self.category!r}")
        present = {slot for slot in _ALL_SLOTS if slot in self.body}
        required = _REQUIRED_SLOTS[self.category]
        if present != required:
            raise ValueError(
                f"template {self.prompt_id!r} must contain exactly "
                f"{sorted(required)}, found {sorted(present)}"
            )


@dataclass(frozen=True)
class TargetedFeature:
    name: str
    definition: str = ""

    @property
    def slug(self) -> str:
        return slugify(self.name)


@dataclass(frozen=True)
class Stage1Prompt:
    """One of the 93 per-document stage-1 prompts."""

    prompt_id: str
    template: PromptTemplate
    feature: TargetedFeature | None = None


def slugify(name: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")
    if not slug:
        raise ValueError(f"cannot slugify {name!r}")
    return slug


def _parse_blocks(text: str, source: str) -> list[dict[str, str]]:
    """Parse the key/value block format: [header] lines, key = value pairs,
    and triple-quoted multi-line values taken verbatim."""
    blocks: list[dict[str, str]] = []
    current: dict[str, str] | None = None
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        line = lines[i]
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            i += 1
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = {"prompt_id": stripped[1:-1].strip()}
            blocks.append(current)
            i += 1
            continue
        if "=" not in line:
            raise DataError(f"{source}: line {i + 1}: expected 'key = value'")
        if current is None:
            raise DataError(f"{source}: line {i + 1}: key outside a [block]")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if value == '"""':
            body_lines = []
            i += 1
            while i < len(lines) and lines[i] != '"""':
                body_lines.append(lines[i])
                i += 1
            if i >= len(lines):
                raise DataError(f"{source}: unterminated multi-line value for {key!r}")
            current[key] = "\n".join(body_lines)
        else:
            current[key] = value
        i += 1
    return blocks


def _load_data(name: str) -> str:
    return resources.files("stylokit").joinpath("data").joinpath(name).read_text("utf-8")


@functools.lru_cache(maxsize=1)
def load_templates() -> dict[str, PromptTemplate]:
    source = "prompts.toml"
    templates: dict[str, PromptTemplate] = {}
    for block in _parse_blocks(_load_data(source), source):
        for key in ("prompt_id", "category", "name", "body"):
            if key not in block:
                raise DataError(f"{source}: block missing {key!r}")
        prompt_id = block["prompt_id"]
        if prompt_id in templates:
            raise DataError(f"{source}: duplicate template id {prompt_id!r}")
        try:
            templates[prompt_id] = PromptTemplate(
                prompt_id, block["category"], block["name"], block["body"]
            )
        except ValueError as exc:
            raise DataError(f"{source}: {exc}") from None
    return templates


def open_templates() -> list[PromptTemplate]:
    return [t for t in load_templates().values() if t.category == "open"]


def targeted_template() -> PromptTemplate:
    return next(t for t in load_templates().values() if t.category == "targeted")


def standardization_template() -> PromptTemplate:
    return next(t for t in load_templates().values() if t.category == "standardization")


@functools.lru_cache(maxsize=1)
def targeted_features() -> list[TargetedFeature]:
    features = []
    seen = set()
    for line in _load_data("targeted_features.txt").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        name, _, definition = line.partition("\t")
        name = name.strip()
        if name in seen:
            raise DataError(f"targeted_features.txt: duplicate feature {name!r}")
        seen.add(name)
        features.append(TargetedFeature(name, definition.strip()))
    return features


def stage1_prompts() -> list[Stage1Prompt]:
    """All stage-1 prompts in canonical order: open templates in file order,
    then one targeted prompt per feature in roster order."""
    out = [Stage1Prompt(t.prompt_id, t) for t in open_templates()]
    base = targeted_template()
    for feature in targeted_features():
        out.append(Stage1Prompt(f"targeted:{feature.slug}", base, feature))
    return out


def render_stage1(template: PromptTemplate, passage: str, feature: TargetedFeature | None = None) -> str:
    """Fill a stage-1 template. The passage is substituted last so slot-like
    text inside it survives verbatim."""
    if template.category == "standardization":
        raise ValueError("standardization template is not a stage-1 template")
    if (template.category == "targeted") != (feature is not None):
        raise ValueError("feature is required for targeted templates and only for them")
    if not passage:
        raise ValueError("empty passage")
    body = template.body
    if feature is not None:
        if feature.definition:
            body = body.replace(DEFINITION_SLOT, feature.definition)
        else:
            body = body.replace(DEFINITION_SLOT + "\n\n", "").replace(DEFINITION_SLOT, "")
        body = body.replace(FEATURE_SLOT, feature.name)
    return body.replace(PASSAGE_SLOT, passage)


def render_standardization(description: str) -> str:
    if not description.strip():
        raise ValueError("empty description")
    return standardization_template().body.replace(DESCRIPTION_SLOT, description)
