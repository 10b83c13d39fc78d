"""Evolutionary search over decoding matrices.

A population of square matrices is evolved generationally: fitness is
dev-set accuracy of the verbalizer each matrix induces, parents are drawn
by roulette-wheel selection, offspring come from row-wise crossover and a
multiplicative mutation, and survivors are the elitist top M of the union
of the previous population and its offspring (mu+lambda).

All stochastic decisions are drawn from one seeded master generator in a
fixed serial order; fitness evaluation is a pure function, so runs are
bit-reproducible for a given seed no matter how many threads evaluate
fitness.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import core
from .core import CandidateSet, Individual, LogitSet, Verbalizer, Vocabulary
from .errors import ConfigError, DataError, ShapeError

MUTATION_STRATEGIES = ("hadamard", "matmul")


@dataclass
class EvolutionConfig:
    """Search hyperparameters; defaults follow the reference setting."""

    population_size: int = 30
    max_iterations: int = 5
    crossover_prob: float = 0.8
    mutation_prob: float = 0.1
    n_candidates: int = 1000
    n_label_words: int = 100
    seed: int = 0
    mutation_strategy: str = "hadamard"

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigError(f"population_size must be >= 2, got {self.population_size}")
        if self.max_iterations < 0:
            raise ConfigError(f"max_iterations must be >= 0, got {self.max_iterations}")
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {p}")
        if self.n_candidates < 1:
            raise ConfigError(f"n_candidates must be >= 1, got {self.n_candidates}")
        if self.n_label_words < 1:
            raise ConfigError(f"n_label_words must be >= 1, got {self.n_label_words}")
        if self.n_label_words > self.n_candidates:
            raise ConfigError(
                f"n_label_words ({self.n_label_words}) exceeds n_candidates ({self.n_candidates})"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.mutation_strategy not in MUTATION_STRATEGIES:
            raise ConfigError(
                f"mutation_strategy must be one of {MUTATION_STRATEGIES}, "
                f"got {self.mutation_strategy!r}"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EvolutionConfig":
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class Population:
    members: list[Individual]
    generation: int = 0


@dataclass
class GenerationStats:
    """One history entry: the evaluated pool immediately before selection."""

    generation: int
    pool_size: int
    best_fitness: float
    mean_fitness: float
    wall_time_s: float

    def to_dict(self) -> dict:
        return asdict(self)


def init_population(config: EvolutionConfig, rng) -> Population:
    """Population of ``population_size`` matrices of side ``n_candidates``.

    Member 0 is the identity (so the plain top-k verbalizer is reachable at
    generation 0); the rest have i.i.d. entries uniform on [0, 1).
    ``rng`` may be a seed or a ``numpy.random.Generator``.
    """
    rng = np.random.default_rng(rng)
    side = config.n_candidates
    members = [Individual(np.eye(side))]
    for _ in range(config.population_size - 1):
        members.append(Individual(rng.random((side, side))))
    return Population(members=members, generation=0)


def roulette_select(population: Population, rng) -> tuple[Individual, Individual]:
    """Two independent fitness-proportional draws (repeats allowed).

    Every member must carry a cached fitness. When total fitness is 0 the
    wheel is undefined and sampling falls back to uniform.
    """
    members = population.members
    if not members:
        raise DataError("cannot select from an empty population")
    weights = np.empty(len(members), dtype=np.float64)
    for i, m in enumerate(members):
        if m.cached_fitness is None:
            raise DataError(f"member {i} has no cached fitness; evaluate before selecting")
        weights[i] = m.cached_fitness
    rng = np.random.default_rng(rng)
    total = weights.sum()
    if total <= 0.0:
        picks = rng.integers(0, len(members), size=2)
    else:
        cum = np.cumsum(weights)
        picks = np.searchsorted(cum, rng.random(2) * total, side="right")
    return members[int(picks[0])], members[int(picks[1])]


def crossover(a: Individual, b: Individual, rng) -> Individual:
    """Row-wise recombination: each row comes from ``a`` or ``b`` with prob 1/2.

    For sides >= 2 the row mask is resampled until at least one row comes
    from each parent. Parents are left untouched.
    """
    if a.side != b.side:
        raise ShapeError(f"parent sides differ: {a.side} != {b.side}")
    rng = np.random.default_rng(rng) if isinstance(rng, (int, np.integer)) else rng
    side = a.side
    take_b = rng.random(side) < 0.5
    if side >= 2:
        while take_b.all() or not take_b.any():
            take_b = rng.random(side) < 0.5
    child = np.where(take_b[:, None], b.genome, a.genome)
    return Individual(child)


def mutate(x: Individual, rng, strategy: str = "hadamard") -> Individual:
    """Multiplicative perturbation of a genome; the input is left untouched.

    "hadamard" (default): elementwise product with fresh factors uniform on
    [0.5, 1.5), a unit-mean local jitter that preserves the sign pattern.
    "matmul": right-multiplication by a fresh matrix uniform on [0, 1), the
    alternative reading of multiplying two matrices together.
    """
    rng = np.random.default_rng(rng) if isinstance(rng, (int, np.integer)) else rng
    if strategy == "hadamard":
        factors = 0.5 + rng.random(x.genome.shape)
        return Individual(x.genome * factors)
    if strategy == "matmul":
        other = rng.random(x.genome.shape)
        return Individual(x.genome @ other)
    raise ConfigError(f"unknown mutation strategy {strategy!r}")


def _check_dimensions(
    dev: LogitSet, candidates: CandidateSet, vocab: Vocabulary, config: EvolutionConfig
) -> None:
    if dev.num_labels < 2:
        raise DataError(
            f"need at least 2 labels to search, got {dev.num_labels}"
        )
    if candidates.num_labels != dev.num_labels:
        raise ShapeError(
            f"candidate set has {candidates.num_labels} labels, dev set has {dev.num_labels}"
        )
    if len(vocab) != dev.vocab_size:
        raise ShapeError(
            f"vocabulary has {len(vocab)} tokens, dev set vocab size is {dev.vocab_size}"
        )
    if candidates.num_candidates != config.n_candidates:
        raise ConfigError(
            f"candidate set width {candidates.num_candidates} != config n_candidates "
            f"{config.n_candidates}"
        )
    if int(candidates.vocab_ids.max()) >= len(vocab):
        raise DataError("candidate vocab id outside vocabulary")


def _evaluate_uncached(pool: list[Individual], evaluate, n_jobs: int) -> None:
    todo = [m for m in pool if m.cached_fitness is None]
    if not todo:
        return
    if n_jobs <= 1 or len(todo) == 1:
        for m in todo:
            m.cached_fitness = evaluate(m)
        return
    with ThreadPoolExecutor(max_workers=n_jobs) as pool_exec:
        for m, fit in zip(todo, pool_exec.map(evaluate, todo)):
            m.cached_fitness = fit


def evolve(
    dev: LogitSet,
    candidates: CandidateSet,
    vocab: Vocabulary,
    config: EvolutionConfig,
    n_jobs: int = 1,
) -> tuple[Individual, Verbalizer, list[GenerationStats]]:
    """Run the generational search and return the best individual found.

    Each of the ``max_iterations`` generations: (1) evaluate every member
    without a cached fitness, (2) keep the top ``population_size`` members
    (stable under ties, so insertion order wins), (3) breed exactly
    ``population_size`` offspring — select two parents by roulette, cross
    them with probability ``crossover_prob`` (otherwise the first parent is
    cloned), then pass the result through the mutation gate — and (4)
    append the offspring, doubling the pool for the next generation's
    evaluation. Offspring bred in the final generation are never evaluated;
    the returned individual is the best ever scored, which elitism keeps in
    the pool throughout.

    Returns ``(best, verbalizer_of_best, history)`` where history has one
    entry per generation, recorded after step (1) on the full pool.
    """
    _check_dimensions(dev, candidates, vocab, config)

    def evaluate(ind: Individual) -> float:
        verb = core.extract_verbalizer(
            core.decode(candidates, ind), candidates, vocab, config.n_label_words
        )
        return core.fitness(verb, dev)

    rng = np.random.default_rng(config.seed)
    pool = init_population(config, rng).members
    m_size = config.population_size
    history: list[GenerationStats] = []
    best: Individual | None = None

    for gen in range(config.max_iterations):
        t0 = time.perf_counter()
        _evaluate_uncached(pool, evaluate, n_jobs)
        fits = np.array([m.cached_fitness for m in pool], dtype=np.float64)
        gen_best = int(np.argmax(fits))  # first max: earliest-inserted wins ties
        if best is None or fits[gen_best] > best.cached_fitness:
            best = pool[gen_best]
        history.append(
            GenerationStats(
                generation=gen,
                pool_size=len(pool),
                best_fitness=float(fits[gen_best]),
                mean_fitness=float(fits.mean()),
                wall_time_s=0.0,  # filled below, after breeding
            )
        )
        survivors = sorted(pool, key=lambda m: -m.cached_fitness)[:m_size]
        parents = Population(members=survivors, generation=gen)
        offspring: list[Individual] = []
        while len(offspring) < m_size:
            p1, p2 = roulette_select(parents, rng)
            if rng.random() < config.crossover_prob:
                child = crossover(p1, p2, rng)
            else:
                child = Individual(p1.genome.copy())
            if rng.random() < config.mutation_prob:
                child = mutate(child, rng, config.mutation_strategy)
            offspring.append(child)
        pool = survivors + offspring
        history[-1].wall_time_s = time.perf_counter() - t0

    if best is None:
        # max_iterations == 0: score the initial population and report its best.
        _evaluate_uncached(pool, evaluate, n_jobs)
        best = max(pool, key=lambda m: m.cached_fitness)

    verbalizer = core.extract_verbalizer(
        core.decode(candidates, best), candidates, vocab, config.n_label_words
    )
    return best, verbalizer, history
