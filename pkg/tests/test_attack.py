"""Label flipping: exact counts, class-change guarantee, determinism."""

from __future__ import annotations

import math

import numpy as np
import pytest

from fedtab.attack import AttackConfig, flip_count, flip_labels
from fedtab.errors import InvalidFractionError, SingleClassError


@pytest.mark.parametrize("fraction", [0.0, 0.25, 0.5, 1.0])
@pytest.mark.parametrize("n", [1, 2, 10, 101])
def test_flip_count_is_exact(fraction, n):
    rng = np.random.default_rng(5)
    labels = rng.integers(0, 3, n)
    poisoned, mask = flip_labels(labels, 3, AttackConfig(flip_fraction=fraction, seed=9))
    expected = math.floor(fraction * n + 0.5)  # round half up
    assert flip_count(n, fraction) == expected
    assert int(mask.sum()) == expected
    assert int(np.sum(poisoned != labels)) == expected


def test_flipped_rows_always_change_class():
    rng = np.random.default_rng(0)
    for n_classes in (2, 3, 5):
        labels = rng.integers(0, n_classes, 500)
        poisoned, mask = flip_labels(labels, n_classes, AttackConfig(flip_fraction=1.0, seed=3))
        assert np.all(poisoned[mask] != labels[mask])
        assert np.all(poisoned >= 0) and np.all(poisoned < n_classes)


def test_unflipped_rows_and_input_are_untouched():
    labels = np.array([0, 1, 2, 0, 1, 2, 0, 1])
    original = labels.copy()
    poisoned, mask = flip_labels(labels, 3, AttackConfig(flip_fraction=0.5, seed=17))
    assert np.array_equal(labels, original), "input must not be mutated"
    assert np.array_equal(poisoned[~mask], labels[~mask])


def test_binary_flip_is_complement():
    labels = np.array([0, 1] * 20)
    poisoned, mask = flip_labels(labels, 2, AttackConfig(flip_fraction=1.0, seed=2))
    assert np.array_equal(poisoned, 1 - labels)
    assert mask.all()


def test_flips_are_deterministic_per_seed():
    labels = np.arange(60) % 3
    a1, m1 = flip_labels(labels, 3, AttackConfig(flip_fraction=0.5, seed=42))
    a2, m2 = flip_labels(labels, 3, AttackConfig(flip_fraction=0.5, seed=42))
    b, mb = flip_labels(labels, 3, AttackConfig(flip_fraction=0.5, seed=43))
    assert np.array_equal(a1, a2) and np.array_equal(m1, m2)
    assert not np.array_equal(a1, b) or not np.array_equal(m1, mb)


def test_replacement_covers_all_other_classes():
    labels = np.zeros(4000, dtype=np.int64)
    poisoned, mask = flip_labels(labels, 4, AttackConfig(flip_fraction=1.0, seed=1))
    seen = set(np.unique(poisoned[mask]).tolist())
    assert seen == {1, 2, 3}, "uniform replacement should hit every other class"


def test_attack_validation():
    with pytest.raises(InvalidFractionError):
        AttackConfig(flip_fraction=1.5)
    with pytest.raises(InvalidFractionError):
        AttackConfig(flip_fraction=-0.1)
    with pytest.raises(SingleClassError):
        flip_labels(np.zeros(5, dtype=np.int64), 1, AttackConfig(flip_fraction=0.5))
