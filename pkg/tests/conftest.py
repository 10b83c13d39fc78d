import numpy as np
import pytest

from evoverb import LogitSet, PlantedSpec, Vocabulary, generate_planted


def random_logitset(rng, num_instances=8, vocab_size=10, num_labels=2):
    """Valid random LogitSet: positive rows normalized to 1, all labels present."""
    probs = rng.random((num_instances, vocab_size)) + 0.05
    probs /= probs.sum(axis=1, keepdims=True)
    labels = np.concatenate(
        [np.arange(num_labels), rng.integers(0, num_labels, size=num_instances - num_labels)]
    )
    return LogitSet(probs=probs, labels=labels, num_labels=num_labels)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_planted():
    """2-label planted instance small enough for exhaustive enumeration."""
    spec = PlantedSpec(
        num_labels=2,
        vocab_size=12,
        instances_per_label=8,
        signal_words_per_label=2,
        signal_mass=0.8,
        noise_seed=1,
        noise_scale=1.0,
    )
    return generate_planted(spec)


@pytest.fixture
def small_vocab():
    return Vocabulary(tokens=[f"w{i}" for i in range(10)])
