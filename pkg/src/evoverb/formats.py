"""Bit-exact file formats.

Three artifacts cross the process boundary:

* logits container (``EVSL1``): magic ``EVSL1\\n``, a u64 little-endian
  header length, a UTF-8 JSON header, then raw float32 little-endian
  probability rows in row-major order. Gold labels live in the header so a
  split is always a single file.
* vocabulary: UTF-8 text, one token per line, line index == vocab id.
* verbalizer: a JSON document with per-label words and ids plus run
  metadata, serialized canonically so equal inputs give equal bytes.
"""

from __future__ import annotations

import json
import struct
from contextlib import contextmanager
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .core import LogitSet, Verbalizer, Vocabulary
from .errors import (
    BadMagicError,
    DataError,
    FormatError,
    HeaderError,
    PayloadTooLargeError,
    TruncatedError,
)

MAGIC = b"EVSL1\n"
DEFAULT_PAYLOAD_CAP = 8 * 1024**3  # bytes
_MAX_HEADER_BYTES = 64 * 1024**2


@contextmanager
def _maybe_open(source, mode: str):
    if hasattr(source, "read") or hasattr(source, "write"):
        yield source
    else:
        with open(Path(source), mode) as fh:
            yield fh


def write_logits(logits: LogitSet, sink) -> int:
    """Serialize a LogitSet; returns the number of bytes written.

    The payload is the float32 matrix verbatim, so a read-back reproduces
    the set bitwise.
    """
    header = {
        "num_instances": logits.num_instances,
        "vocab_size": logits.vocab_size,
        "num_labels": logits.num_labels,
        "labels": logits.labels.tolist(),
        "dtype": "f32",
        "layout": "row-major",
    }
    header_bytes = json.dumps(header, separators=(",", ":"), sort_keys=True).encode("utf-8")
    payload = np.ascontiguousarray(logits.probs.astype("<f4", copy=False)).tobytes()
    with _maybe_open(sink, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)
    return len(MAGIC) + 8 + len(header_bytes) + len(payload)


def _read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise TruncatedError(f"{what}: expected {n} bytes, got {len(data)}")
    return data


def _header_count(header: dict, key: str) -> int:
    value = header.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise HeaderError(f"header field {key!r} must be a non-negative integer, got {value!r}")
    return value


def read_logits(source, max_payload_bytes: int = DEFAULT_PAYLOAD_CAP) -> LogitSet:
    """Parse and validate an EVSL1 file.

    Header counts are checked against ``max_payload_bytes`` before any
    payload allocation. Rows failing the sum-to-1 check are rejected with
    the offending row index.
    """
    with _maybe_open(source, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
        (header_len,) = struct.unpack("<Q", _read_exact(fh, 8, "header length"))
        if header_len > _MAX_HEADER_BYTES:
            raise HeaderError(f"declared header length {header_len} exceeds {_MAX_HEADER_BYTES}")
        header_bytes = _read_exact(fh, header_len, "header")
        try:
            header = json.loads(header_bytes.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise HeaderError(f"header is not valid UTF-8 JSON: {exc}") from exc
        if not isinstance(header, dict):
            raise HeaderError("header must be a JSON object")

        num_instances = _header_count(header, "num_instances")
        vocab_size = _header_count(header, "vocab_size")
        num_labels = _header_count(header, "num_labels")
        if header.get("dtype") != "f32":
            raise HeaderError(f"unsupported dtype {header.get('dtype')!r}, expected 'f32'")
        if header.get("layout") != "row-major":
            raise HeaderError(
                f"unsupported layout {header.get('layout')!r}, expected 'row-major'"
            )
        labels = header.get("labels")
        if not isinstance(labels, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in labels
        ):
            raise HeaderError("header field 'labels' must be a list of integers")
        if len(labels) != num_instances:
            raise HeaderError(
                f"labels length {len(labels)} != num_instances {num_instances}"
            )

        payload_len = num_instances * vocab_size * 4
        if payload_len > max_payload_bytes:
            raise PayloadTooLargeError(
                f"declared payload of {payload_len} bytes exceeds cap {max_payload_bytes}"
            )
        payload = fh.read(payload_len)
        if len(payload) != payload_len:
            raise TruncatedError(
                f"payload: expected {payload_len} bytes, got {len(payload)}"
            )
    probs = np.frombuffer(payload, dtype="<f4").reshape(num_instances, vocab_size)
    return LogitSet(probs=probs, labels=np.array(labels, dtype=np.int64), num_labels=num_labels)


def read_vocab(source) -> Vocabulary:
    """One token per line; CRLF tolerated, trailing newline optional."""
    with _maybe_open(source, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"vocabulary is not valid UTF-8: {exc}") from exc
    if text.endswith("\n"):
        text = text[:-1]
    if not text:
        raise DataError("empty vocabulary file")
    lines = [line[:-1] if line.endswith("\r") else line for line in text.split("\n")]
    for i, line in enumerate(lines):
        if not line:
            raise FormatError(f"empty token at vocabulary line {i}")
    return Vocabulary(tokens=lines)


def write_vocab(vocab: Vocabulary, sink) -> None:
    with _maybe_open(sink, "wb") as fh:
        fh.write(("\n".join(vocab.tokens) + "\n").encode("utf-8"))


def write_verbalizer(verbalizer: Verbalizer, metadata: dict, sink) -> None:
    """Verbalizer JSON: per-label words/ids (decoded score descending) + metadata.

    ``metadata`` supplies the remaining top-level keys (typically
    ``fitness``, ``config``, ``seed``). Serialization is canonical
    (sorted keys, fixed separators) so identical inputs give identical
    bytes.
    """
    doc = dict(metadata)
    doc["labels"] = [
        {
            "label": i,
            "words": list(verbalizer.tokens[i]),
            "vocab_ids": verbalizer.vocab_ids[i].tolist(),
        }
        for i in range(verbalizer.num_labels)
    ]
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    with _maybe_open(sink, "wb") as fh:
        fh.write(text.encode("utf-8"))


def read_verbalizer(source) -> tuple[Verbalizer, dict]:
    """Parse a verbalizer JSON file back into a Verbalizer plus its metadata."""
    with _maybe_open(source, "rb") as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"verbalizer file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("labels"), list):
        raise FormatError("verbalizer document must contain a 'labels' array")
    entries = doc["labels"]
    if not entries:
        raise FormatError("verbalizer document has no labels")
    by_label = {}
    for entry in entries:
        if not isinstance(entry, dict) or not {"label", "words", "vocab_ids"} <= set(entry):
            raise FormatError("each label entry needs 'label', 'words' and 'vocab_ids'")
        by_label[entry["label"]] = entry
    if sorted(by_label) != list(range(len(entries))):
        raise FormatError(f"label indices must be exactly 0..{len(entries) - 1}")
    ids = [by_label[i]["vocab_ids"] for i in range(len(entries))]
    tokens = [list(by_label[i]["words"]) for i in range(len(entries))]
    try:
        id_matrix = np.array(ids, dtype=np.int64)
    except (ValueError, TypeError) as exc:
        raise FormatError(f"vocab_ids must be equal-length integer lists: {exc}") from exc
    verbalizer = Verbalizer(vocab_ids=id_matrix, tokens=tokens)
    metadata = {k: v for k, v in doc.items() if k != "labels"}
    return verbalizer, metadata
