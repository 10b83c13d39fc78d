"""Verbalizer mathematics.

Everything downstream of a cached set of mask-position probability rows is
deterministic linear algebra plus top-k selection: average the rows per
label, keep the highest-mass candidate words, decode the candidate values
through a square matrix, read off the top words per label, and score the
resulting verbalizer by dev-set accuracy.

All operations here are pure: arguments are never mutated and identical
inputs always produce identical outputs, so they are safe to call from
multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, RowSumError, ShapeError

# Probability rows must sum to 1 within this (f32 payloads, so not tighter).
ROW_SUM_TOL = 1e-4


@dataclass(eq=False)
class LogitSet:
    """Mask-position probability rows over a vocabulary, with gold labels.

    ``probs`` is ``[num_instances, vocab_size]`` float32, one softmax row per
    instance; ``labels`` holds an index in ``[0, num_labels)`` per instance.
    Every label must occur at least once so that per-label means are defined.
    """

    probs: np.ndarray
    labels: np.ndarray
    num_labels: int

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.probs.ndim != 2:
            raise ShapeError(f"probs must be 2-D, got shape {self.probs.shape}")
        if self.labels.ndim != 1:
            raise ShapeError(f"labels must be 1-D, got shape {self.labels.shape}")
        if self.labels.shape[0] != self.probs.shape[0]:
            raise ShapeError(
                f"{self.labels.shape[0]} labels for {self.probs.shape[0]} probability rows"
            )
        if self.num_labels < 1:
            raise DataError(f"num_labels must be >= 1, got {self.num_labels}")
        if self.probs.shape[0] == 0:
            raise DataError("empty LogitSet: need at least one instance")
        if np.any(self.probs < 0):
            i, j = np.argwhere(self.probs < 0)[0]
            raise DataError(f"negative probability at row {i}, column {j}")
        sums = self.probs.sum(axis=1, dtype=np.float64)
        bad = np.nonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)[0]
        if bad.size:
            raise RowSumError(
                f"row {bad[0]} sums to {sums[bad[0]]:.6f}, expected 1 within {ROW_SUM_TOL}"
            )
        if np.any(self.labels < 0) or np.any(self.labels >= self.num_labels):
            i = np.nonzero((self.labels < 0) | (self.labels >= self.num_labels))[0][0]
            raise DataError(
                f"label {self.labels[i]} at row {i} outside [0, {self.num_labels})"
            )
        present = np.zeros(self.num_labels, dtype=bool)
        present[self.labels] = True
        if not present.all():
            missing = int(np.nonzero(~present)[0][0])
            raise DataError(f"label {missing} has no instances")

    @property
    def num_instances(self) -> int:
        return self.probs.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.probs.shape[1]


@dataclass(eq=False)
class Vocabulary:
    """Ordered token list; position i is vocabulary id i."""

    tokens: list[str]

    def __post_init__(self):
        self.tokens = list(self.tokens)
        if not self.tokens:
            raise DataError("empty vocabulary")
        for i, tok in enumerate(self.tokens):
            if not isinstance(tok, str) or not tok:
                raise DataError(f"vocabulary token {i} is empty or not a string")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(eq=False)
class CandidateSet:
    """Per-label top candidates: mean mask probabilities and their vocab ids.

    Row i holds the ``num_candidates`` largest per-label mean values for
    label i, sorted non-increasing, with the originating vocabulary ids.
    """

    values: np.ndarray
    vocab_ids: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.vocab_ids = np.asarray(self.vocab_ids, dtype=np.int64)
        if self.values.ndim != 2 or self.vocab_ids.shape != self.values.shape:
            raise ShapeError(
                f"values {self.values.shape} and vocab_ids {self.vocab_ids.shape} "
                "must be equal 2-D shapes"
            )
        if self.values.shape[1] == 0:
            raise DataError("candidate set with zero candidates per label")
        if np.any(np.diff(self.values, axis=1) > 0):
            raise DataError("candidate values must be sorted non-increasing per label")
        for i, row in enumerate(self.vocab_ids):
            if len(np.unique(row)) != row.size:
                raise DataError(f"duplicate vocab ids in candidate row {i}")

    @property
    def num_labels(self) -> int:
        return self.values.shape[0]

    @property
    def num_candidates(self) -> int:
        return self.values.shape[1]


@dataclass(eq=False)
class Individual:
    """One member of the search population: a square decoding matrix."""

    genome: np.ndarray
    cached_fitness: float | None = None

    def __post_init__(self):
        self.genome = np.asarray(self.genome, dtype=np.float64)
        if self.genome.ndim != 2 or self.genome.shape[0] != self.genome.shape[1]:
            raise ShapeError(f"genome must be square, got shape {self.genome.shape}")

    @property
    def side(self) -> int:
        return self.genome.shape[0]


@dataclass(eq=False)
class Verbalizer:
    """Per label, an ordered list of (vocab id, token) label words.

    Entry order is highest decoded score first; ids are distinct within a
    label but may repeat across labels.
    """

    vocab_ids: np.ndarray
    tokens: list[list[str]]

    def __post_init__(self):
        self.vocab_ids = np.asarray(self.vocab_ids, dtype=np.int64)
        if self.vocab_ids.ndim != 2:
            raise ShapeError(f"vocab_ids must be 2-D, got shape {self.vocab_ids.shape}")
        if self.vocab_ids.shape[1] == 0:
            raise DataError("verbalizer with zero words per label")
        if np.any(self.vocab_ids < 0):
            raise DataError("negative vocab id in verbalizer")
        if len(self.tokens) != self.vocab_ids.shape[0] or any(
            len(row) != self.vocab_ids.shape[1] for row in self.tokens
        ):
            raise ShapeError("tokens shape does not match vocab_ids")
        for i, row in enumerate(self.vocab_ids):
            if len(np.unique(row)) != row.size:
                raise DataError(f"duplicate label words for label {i}")

    @property
    def num_labels(self) -> int:
        return self.vocab_ids.shape[0]

    @property
    def n_label_words(self) -> int:
        return self.vocab_ids.shape[1]

    def entries(self, label: int) -> list[tuple[int, str]]:
        return list(zip(self.vocab_ids[label].tolist(), self.tokens[label]))


def _require_multiclass(num_labels: int) -> None:
    if num_labels < 2:
        raise DataError(
            f"need at least 2 labels, got {num_labels} (single-label classification is vacuous)"
        )


def _topk_stable(row: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest entries, ties broken by smaller index."""
    return np.argsort(-row, kind="stable")[:k]


def label_means(logits: LogitSet) -> np.ndarray:
    """Mean probability row per label, ``[num_labels, vocab_size]`` float64.

    Row i is the arithmetic mean of the probability rows whose gold label is
    i; each output row therefore still sums to 1 (within tolerance).
    """
    _require_multiclass(logits.num_labels)
    means = np.empty((logits.num_labels, logits.vocab_size), dtype=np.float64)
    for lbl in range(logits.num_labels):
        rows = logits.probs[logits.labels == lbl]
        if rows.shape[0] == 0:
            raise DataError(f"label {lbl} has no instances; mean undefined")
        means[lbl] = rows.mean(axis=0, dtype=np.float64)
    return means


def encode(means: np.ndarray, n_candidates: int) -> CandidateSet:
    """Keep the ``n_candidates`` largest mean values per label, with their ids.

    Output rows are sorted non-increasing; value ties go to the smaller
    vocabulary id so the result is platform-independent.
    """
    means = np.asarray(means, dtype=np.float64)
    if means.ndim != 2:
        raise ShapeError(f"means must be 2-D, got shape {means.shape}")
    vocab_size = means.shape[1]
    if n_candidates < 1:
        raise ConfigError(f"n_candidates must be >= 1, got {n_candidates}")
    if n_candidates > vocab_size:
        raise ConfigError(
            f"number of candidates exceeds vocabulary size ({n_candidates} > {vocab_size})"
        )
    ids = np.empty((means.shape[0], n_candidates), dtype=np.int64)
    vals = np.empty((means.shape[0], n_candidates), dtype=np.float64)
    for i, row in enumerate(means):
        top = _topk_stable(row, n_candidates)
        ids[i] = top
        vals[i] = row[top]
    return CandidateSet(values=vals, vocab_ids=ids)


def decode(candidates: CandidateSet, individual: Individual) -> np.ndarray:
    """Matrix product of the candidate values with the genome; no re-sorting."""
    if individual.side != candidates.num_candidates:
        raise ShapeError(
            f"genome side {individual.side} != number of candidates {candidates.num_candidates}"
        )
    return candidates.values @ individual.genome


def extract_verbalizer(
    decoded: np.ndarray,
    candidates: CandidateSet,
    vocab: Vocabulary,
    n_label_words: int,
) -> Verbalizer:
    """Top ``n_label_words`` decoded positions per label, mapped back to words.

    Positions index into the candidate row; ties go to the smaller position
    (i.e. the higher-ranked candidate). Each position is translated through
    ``candidates.vocab_ids`` into a vocabulary id and then a token.
    """
    decoded = np.asarray(decoded, dtype=np.float64)
    if decoded.shape != candidates.values.shape:
        raise ShapeError(
            f"decoded shape {decoded.shape} != candidate shape {candidates.values.shape}"
        )
    if n_label_words < 1:
        raise ConfigError(f"n_label_words must be >= 1, got {n_label_words}")
    if n_label_words > candidates.num_candidates:
        raise ConfigError(
            f"number of label words exceeds number of candidates "
            f"({n_label_words} > {candidates.num_candidates})"
        )
    if int(candidates.vocab_ids.max()) >= len(vocab):
        raise DataError(
            f"candidate vocab id {int(candidates.vocab_ids.max())} outside vocabulary "
            f"of size {len(vocab)}"
        )
    ids = np.empty((candidates.num_labels, n_label_words), dtype=np.int64)
    tokens: list[list[str]] = []
    for i in range(candidates.num_labels):
        pos = _topk_stable(decoded[i], n_label_words)
        ids[i] = candidates.vocab_ids[i, pos]
        tokens.append([vocab.tokens[j] for j in ids[i]])
    return Verbalizer(vocab_ids=ids, tokens=tokens)


def classify(verbalizer: Verbalizer, prob_row: np.ndarray) -> int:
    """Label whose words have the highest mean probability in ``prob_row``.

    Ties go to the smaller label index.
    """
    _require_multiclass(verbalizer.num_labels)
    prob_row = np.asarray(prob_row)
    if prob_row.ndim != 1:
        raise ShapeError(f"prob_row must be 1-D, got shape {prob_row.shape}")
    if int(verbalizer.vocab_ids.max()) >= prob_row.shape[0]:
        raise ShapeError(
            f"verbalizer vocab id {int(verbalizer.vocab_ids.max())} outside row "
            f"of length {prob_row.shape[0]}"
        )
    scores = prob_row[verbalizer.vocab_ids].astype(np.float64).mean(axis=1)
    return int(np.argmax(scores))


def fitness(verbalizer: Verbalizer, dev: LogitSet) -> float:
    """Fraction of dev instances classified as their gold label, in [0, 1]."""
    _require_multiclass(verbalizer.num_labels)
    if verbalizer.num_labels != dev.num_labels:
        raise ShapeError(
            f"verbalizer has {verbalizer.num_labels} labels, dev set has {dev.num_labels}"
        )
    if dev.num_instances == 0:
        raise DataError("fitness undefined on an empty dev set")
    if int(verbalizer.vocab_ids.max()) >= dev.vocab_size:
        raise ShapeError(
            f"verbalizer vocab id {int(verbalizer.vocab_ids.max())} outside vocabulary "
            f"of size {dev.vocab_size}"
        )
    # [instances, labels, words] gather, mean over words, argmax over labels.
    scores = dev.probs[:, verbalizer.vocab_ids].astype(np.float64).mean(axis=2)
    preds = np.argmax(scores, axis=1)
    return float(np.mean(preds == dev.labels))
