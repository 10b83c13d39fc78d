"""Labeled record input: local CSV or JSONL, no remote dataset hubs."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .errors import JobError

Record = tuple[str, int]


def read_records(path) -> list[Record]:
    """Load (text, label) pairs from a ``.jsonl`` or ``.csv`` file.

    JSONL: one ``{"text": ..., "label": ...}`` object per line.
    CSV: a header row with ``text`` and ``label`` columns.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in (".jsonl", ".ndjson"):
        records = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise JobError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
                records.append(_coerce(obj, f"{path}:{lineno}"))
        return records
    if suffix == ".csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"text", "label"} <= set(reader.fieldnames):
                raise JobError(f"{path}: CSV needs 'text' and 'label' columns")
            return [_coerce(row, f"{path}:{i}") for i, row in enumerate(reader, start=2)]
    raise JobError(f"{path}: unsupported input format {suffix!r} (use .jsonl or .csv)")


def _coerce(obj, where: str) -> Record:
    try:
        text = obj["text"]
        label = int(obj["label"])
    except (KeyError, TypeError, ValueError) as exc:
        raise JobError(f"{where}: record needs a 'text' string and integer 'label'") from exc
    if not isinstance(text, str) or not text:
        raise JobError(f"{where}: 'text' must be a non-empty string")
    if label < 0:
        raise JobError(f"{where}: label must be >= 0, got {label}")
    return text, label


def validate_labels(records: list[Record]) -> int:
    """Labels must form a contiguous 0..N-1 range; returns N."""
    if not records:
        raise JobError("no input records")
    seen = sorted({label for _, label in records})
    n = seen[-1] + 1
    if seen != list(range(n)):
        missing = sorted(set(range(n)) - set(seen))
        raise JobError(f"label gap: labels {missing} have no records (saw {seen})")
    return n
