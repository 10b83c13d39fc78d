"""Desk-scale verification instruments.

``generate_planted`` builds synthetic logit sets whose best verbalizer is
known by construction; ``exhaustive_best`` brute-forces the true optimum
over every joint choice of label words, giving an independent ceiling for
the evolutionary search (whose reachable verbalizers are a subset of the
enumerated space).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .core import CandidateSet, LogitSet, Verbalizer, Vocabulary, _require_multiclass
from .errors import ConfigError, DataError

DEFAULT_ENUMERATION_CAP = 10**6


@dataclass
class PlantedSpec:
    """Synthetic instance: each label owns a disjoint block of signal words.

    Every instance row of label i puts ``signal_mass`` (split evenly) on
    label i's block, spreads the remaining mass uniformly over the whole
    vocabulary, adds seeded per-instance jitter of relative amplitude
    ``noise_scale``, and renormalizes. ``noise_scale=0`` gives identical
    rows per label.
    """

    num_labels: int
    vocab_size: int
    instances_per_label: int
    signal_words_per_label: int
    signal_mass: float
    noise_seed: int = 0
    noise_scale: float = 1.0

    def __post_init__(self):
        if self.num_labels < 2:
            raise DataError(f"need at least 2 labels, got {self.num_labels}")
        if self.instances_per_label < 1:
            raise ConfigError("instances_per_label must be >= 1")
        if self.signal_words_per_label < 1:
            raise ConfigError("signal_words_per_label must be >= 1")
        if self.num_labels * self.signal_words_per_label > self.vocab_size:
            raise ConfigError(
                f"{self.num_labels} x {self.signal_words_per_label} signal words do not fit "
                f"in a vocabulary of {self.vocab_size} (blocks must be disjoint)"
            )
        if not 0.0 < self.signal_mass <= 1.0:
            raise ConfigError(f"signal_mass must be in (0, 1], got {self.signal_mass}")
        if self.noise_scale < 0.0:
            raise ConfigError(f"noise_scale must be >= 0, got {self.noise_scale}")


def generate_planted(spec: PlantedSpec) -> tuple[LogitSet, Vocabulary, Verbalizer]:
    """Instance rows, synthetic vocabulary ("tok0", "tok1", ...), and the
    planted answer (each label's signal block, smallest id first)."""
    n, v, k, s = (
        spec.num_labels,
        spec.vocab_size,
        spec.instances_per_label,
        spec.signal_words_per_label,
    )
    rng = np.random.default_rng(spec.noise_seed)
    rows = np.empty((n * k, v), dtype=np.float64)
    labels = np.repeat(np.arange(n, dtype=np.int64), k)
    base_uniform = (1.0 - spec.signal_mass) / v
    for idx, lbl in enumerate(labels):
        row = np.full(v, base_uniform)
        block = np.arange(lbl * s, (lbl + 1) * s)
        row[block] += spec.signal_mass / s
        if spec.noise_scale > 0.0:
            row += spec.noise_scale / v * rng.random(v)
        rows[idx] = row / row.sum()
    vocab = Vocabulary(tokens=[f"tok{i}" for i in range(v)])
    answer_ids = np.arange(n * s, dtype=np.int64).reshape(n, s)
    answer = Verbalizer(
        vocab_ids=answer_ids,
        tokens=[[vocab.tokens[j] for j in row] for row in answer_ids],
    )
    return LogitSet(probs=rows, labels=labels, num_labels=n), vocab, answer


def combination_count(num_labels: int, n_candidates: int, n_label_words: int) -> int:
    """Number of joint verbalizers ``exhaustive_best`` would evaluate."""
    return comb(n_candidates, n_label_words) ** num_labels


def exhaustive_best(
    dev: LogitSet,
    candidates: CandidateSet,
    vocab: Vocabulary,
    n_label_words: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> tuple[float, Verbalizer]:
    """True optimum over every joint choice of ``n_label_words`` per label.

    Word order within a label is irrelevant under mean aggregation, so the
    enumeration runs over combinations, not permutations. Joint choices are
    visited in lexicographic order and the incumbent is replaced only on a
    strict improvement, so ties resolve to the smallest assignment and the
    result is deterministic.
    """
    _require_multiclass(dev.num_labels)
    n = candidates.num_labels
    if n != dev.num_labels:
        raise DataError(
            f"candidate set has {n} labels, dev set has {dev.num_labels}"
        )
    if n_label_words < 1 or n_label_words > candidates.num_candidates:
        raise ConfigError(
            f"n_label_words must be in [1, {candidates.num_candidates}], got {n_label_words}"
        )
    total = combination_count(n, candidates.num_candidates, n_label_words)
    if total > cap:
        raise ConfigError(
            f"enumeration of {total} joint verbalizers exceeds cap {cap}"
        )

    combos = list(itertools.combinations(range(candidates.num_candidates), n_label_words))
    combo_arr = np.array(combos, dtype=np.int64)  # [C, n_label_words]
    gold = dev.labels
    # Per label: mean word probability for every combination, [instances, C].
    combo_scores = []
    for i in range(n):
        picked = dev.probs[:, candidates.vocab_ids[i]].astype(np.float64)
        combo_scores.append(picked[:, combo_arr].mean(axis=2))

    best_acc = -1.0
    best_assignment: tuple[int, ...] | None = None
    last = combo_scores[n - 1]
    gold_col = gold[:, None]
    for prefix in itertools.product(range(len(combos)), repeat=n - 1):
        # Fold labels 0..n-2 into a running (max score, argmax label) pair;
        # strict > keeps the smaller label on ties.
        part_max = combo_scores[0][:, prefix[0]]
        part_arg = np.zeros(dev.num_instances, dtype=np.int64)
        for i in range(1, n - 1):
            s = combo_scores[i][:, prefix[i]]
            better = s > part_max
            part_max = np.where(better, s, part_max)
            part_arg = np.where(better, i, part_arg)
        # Vectorize the last label's choices: it wins only on strict >.
        preds = np.where(last > part_max[:, None], n - 1, part_arg[:, None])
        accs = np.mean(preds == gold_col, axis=0)
        c = int(np.argmax(accs))  # first max: lexicographically smallest
        if accs[c] > best_acc:
            best_acc = float(accs[c])
            best_assignment = prefix + (c,)

    assert best_assignment is not None
    ids = np.empty((n, n_label_words), dtype=np.int64)
    tokens: list[list[str]] = []
    for i, ci in enumerate(best_assignment):
        ids[i] = candidates.vocab_ids[i, combo_arr[ci]]
        tokens.append([vocab.tokens[j] for j in ids[i]])
    return best_acc, Verbalizer(vocab_ids=ids, tokens=tokens)
