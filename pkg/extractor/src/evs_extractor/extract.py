"""Wrap labeled texts with a mask template, run a fill-mask model, and dump
the mask-position probability rows plus the model vocabulary.

The template is an ordinary format string with exactly one ``{text}`` and
one ``{mask}`` placeholder, e.g. ``"{text} All in all it was {mask}."``;
``{mask}`` is replaced by the model's own mask token. One probability row
is written per record, softmax-normalized in float32 after a max
subtraction, so the output always satisfies the consumer's row-sum check.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import JobError, MaskLostError
from .evsl1 import write_logits_file, write_vocab_file
from .records import Record, validate_labels


@dataclass
class ExtractionJob:
    model: str
    template: str
    records: list[Record]
    max_length: int = 256
    batch_size: int = 8

    def __post_init__(self):
        for placeholder in ("{text}", "{mask}"):
            count = self.template.count(placeholder)
            if count != 1:
                raise JobError(
                    f"template must contain exactly one {placeholder} placeholder, "
                    f"found {count}: {self.template!r}"
                )
        if self.max_length < 8:
            raise JobError(f"max_length must be >= 8, got {self.max_length}")
        if self.batch_size < 1:
            raise JobError(f"batch_size must be >= 1, got {self.batch_size}")
        self.num_labels = validate_labels(self.records)


@dataclass
class ExtractionResult:
    out_logits: str
    out_vocab: str
    num_instances: int
    vocab_size: int
    num_labels: int
    byte_count: int


def kshot_sample(records: list[Record], k: int, seed: int) -> tuple[list[Record], list[Record]]:
    """Disjoint k-per-class train/dev splits, deterministic per seed."""
    if k < 1:
        raise JobError(f"k must be >= 1, got {k}")
    num_labels = validate_labels(records)
    by_label: dict[int, list[int]] = {lbl: [] for lbl in range(num_labels)}
    for idx, (_, lbl) in enumerate(records):
        by_label[lbl].append(idx)
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    dev_idx: list[int] = []
    for lbl in range(num_labels):
        pool = by_label[lbl]
        if len(pool) < 2 * k:
            raise JobError(
                f"class {lbl} has {len(pool)} records, need at least {2 * k} for k={k}"
            )
        perm = rng.permutation(len(pool))
        train_idx.extend(pool[i] for i in perm[:k])
        dev_idx.extend(pool[i] for i in perm[k:2 * k])
    return [records[i] for i in train_idx], [records[i] for i in dev_idx]


def _token_for(tokenizer, idx: int) -> str:
    try:
        tok = tokenizer.convert_ids_to_tokens(idx)
    except (IndexError, KeyError, OverflowError):
        tok = None
    if isinstance(tok, str) and tok:
        return tok
    return f"[unused{idx}]"


def extract(job: ExtractionJob, out_logits, out_vocab) -> ExtractionResult:
    """Run the model over every record and write the EVSL1 + vocab files.

    Records whose wrapped text loses the mask token to truncation (or ends
    up with more than one mask, e.g. a text containing the literal mask
    token) are reported together, by record index, after the full scan.
    """
    import torch
    from transformers import AutoModelForMaskedLM, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(job.model)
    model = AutoModelForMaskedLM.from_pretrained(job.model)
    model.eval()
    if tokenizer.mask_token is None or tokenizer.mask_token_id is None:
        raise JobError(f"model {job.model!r} has no mask token; not fill-mask capable")
    mask_id = tokenizer.mask_token_id

    wrapped = [
        job.template.format(text=text, mask=tokenizer.mask_token)
        for text, _ in job.records
    ]
    rows: list[np.ndarray] = []
    lost: list[int] = []
    ambiguous: list[int] = []
    vocab_size = None
    with torch.no_grad():
        for start in range(0, len(wrapped), job.batch_size):
            batch = wrapped[start:start + job.batch_size]
            enc = tokenizer(
                batch,
                return_tensors="pt",
                truncation=True,
                max_length=job.max_length,
                padding=True,
            )
            logits = model(**enc).logits  # [batch, seq, vocab]
            vocab_size = logits.shape[-1]
            mask_hits = enc["input_ids"] == mask_id
            for b in range(len(batch)):
                positions = mask_hits[b].nonzero(as_tuple=True)[0]
                if positions.numel() == 0:
                    lost.append(start + b)
                    continue
                if positions.numel() > 1:
                    ambiguous.append(start + b)
                    continue
                row = logits[b, positions[0]].to(torch.float32)
                row = row - row.max()
                row = torch.exp(row)
                row = row / row.sum()
                rows.append(row.numpy().astype(np.float32))
    if lost or ambiguous:
        parts = []
        if lost:
            parts.append(f"mask token missing after truncation for records {lost}")
        if ambiguous:
            parts.append(f"multiple mask tokens for records {ambiguous}")
        raise MaskLostError("; ".join(parts), lost + ambiguous)

    probs = np.stack(rows)
    labels = [lbl for _, lbl in job.records]
    byte_count = write_logits_file(out_logits, probs, labels, job.num_labels)
    tokens = [_token_for(tokenizer, i) for i in range(vocab_size)]
    write_vocab_file(out_vocab, tokens)
    return ExtractionResult(
        out_logits=str(Path(out_logits)),
        out_vocab=str(Path(out_vocab)),
        num_instances=probs.shape[0],
        vocab_size=int(vocab_size),
        num_labels=job.num_labels,
        byte_count=byte_count,
    )
