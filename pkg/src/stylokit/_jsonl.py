"""JSON-lines readers and atomic file writers used by every exporter.

All writers go through a temp-file-plus-rename so a crashed run never leaves
a half-written artifact, and all JSON is serialized with sorted keys so
reruns produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Any, Iterable, Iterator

from stylokit.errors import DataError


def read_jsonl(path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, record) pairs, skipping blank lines.

    Line numbers are 1-based and name the offending line in error messages.
    """
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise DataError(f"{path}: line {lineno}: expected a JSON object")
            yield lineno, record


def dumps_canonical(record: Any) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True, separators=(", ", ": "))


def atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_jsonl(path, records: Iterable[Any]) -> None:
    lines = [dumps_canonical(r) for r in records]
    atomic_write_text(path, "".join(line + "\n" for line in lines))


def write_json(path, record: Any) -> None:
    atomic_write_text(path, json.dumps(record, ensure_ascii=False, sort_keys=True, indent=2) + "\n")
