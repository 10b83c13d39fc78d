"""Writers for the EVSL1 logits container and the vocabulary file.

This is the producer side of the interchange contract with the search
engine: magic ``EVSL1\\n``, a u64 little-endian header length, a UTF-8 JSON
header (instance/vocab/label counts, per-instance labels, ``dtype`` "f32",
``layout`` "row-major"), then raw float32 little-endian rows.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"EVSL1\n"


def write_logits_file(path, probs: np.ndarray, labels, num_labels: int) -> int:
    """Write probability rows + labels; returns the byte count."""
    probs = np.ascontiguousarray(np.asarray(probs, dtype="<f4"))
    if probs.ndim != 2:
        raise ValueError(f"probs must be 2-D, got shape {probs.shape}")
    labels = [int(x) for x in labels]
    if len(labels) != probs.shape[0]:
        raise ValueError(f"{len(labels)} labels for {probs.shape[0]} rows")
    header = {
        "num_instances": probs.shape[0],
        "vocab_size": probs.shape[1],
        "num_labels": int(num_labels),
        "labels": labels,
        "dtype": "f32",
        "layout": "row-major",
    }
    header_bytes = json.dumps(header, separators=(",", ":"), sort_keys=True).encode("utf-8")
    payload = probs.tobytes()
    with open(Path(path), "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)
    return len(MAGIC) + 8 + len(header_bytes) + len(payload)


def write_vocab_file(path, tokens: list[str]) -> None:
    """One token per line, line index == vocabulary id.

    The format is line-based, so embedded line breaks (which no real
    subword vocabulary contains) are escaped rather than written raw.
    """
    safe = [t.replace("\r", "\\r").replace("\n", "\\n") for t in tokens]
    with open(Path(path), "w", encoding="utf-8") as fh:
        fh.write("\n".join(safe) + "\n")
