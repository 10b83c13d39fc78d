"""Gradient-free verbalizer search over cached mask-position distributions.

Given per-instance probability rows at the mask position of a prompted
language model plus gold labels, this package evolves a square decoding
matrix whose induced top-k label-word sets maximize dev-set accuracy, and
emits the winning verbalizer.
"""

from .core import (
    CandidateSet,
    Individual,
    LogitSet,
    Verbalizer,
    Vocabulary,
    classify,
    decode,
    encode,
    extract_verbalizer,
    fitness,
    label_means,
)
from .errors import (
    BadMagicError,
    ConfigError,
    DataError,
    EvoverbError,
    FormatError,
    HeaderError,
    PayloadTooLargeError,
    RowSumError,
    ShapeError,
    TruncatedError,
)
from .evolution import (
    EvolutionConfig,
    GenerationStats,
    Population,
    crossover,
    evolve,
    init_population,
    mutate,
    roulette_select,
)
from .formats import (
    read_logits,
    read_verbalizer,
    read_vocab,
    write_logits,
    write_verbalizer,
    write_vocab,
)
from .testkit import PlantedSpec, combination_count, exhaustive_best, generate_planted

__version__ = "0.1.0"

__all__ = [
    "BadMagicError",
    "CandidateSet",
    "ConfigError",
    "DataError",
    "EvolutionConfig",
    "EvoverbError",
    "FormatError",
    "GenerationStats",
    "HeaderError",
    "Individual",
    "LogitSet",
    "PayloadTooLargeError",
    "PlantedSpec",
    "Population",
    "RowSumError",
    "ShapeError",
    "TruncatedError",
    "Verbalizer",
    "Vocabulary",
    "classify",
    "combination_count",
    "crossover",
    "decode",
    "encode",
    "evolve",
    "exhaustive_best",
    "extract_verbalizer",
    "fitness",
    "generate_planted",
    "init_population",
    "label_means",
    "mutate",
    "read_logits",
    "read_verbalizer",
    "read_vocab",
    "roulette_select",
    "write_logits",
    "write_verbalizer",
    "write_vocab",
]
