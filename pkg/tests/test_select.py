import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgegrid.errors import DegenerateDataError
from edgegrid.select import (
    FeatureSubset,
    best_first_select,
    cfs_merit,
    read_subset,
    write_subset,
)

import oracles


def random_dataset(seed, max_features=10):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(30, 80))
    p = int(rng.integers(3, max_features + 1))
    y = rng.integers(0, int(rng.integers(2, 5)), n)
    X = rng.normal(size=(n, p))
    X += np.outer(y, rng.normal(size=p) * rng.integers(0, 2, p))
    if rng.random() < 0.5:
        X[:, 0] = X[:, 1] + 0.1 * rng.normal(size=n)  # redundant pair
    return X, y


def test_singleton_is_abs_correlation():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, 50)
    X = rng.normal(size=(50, 3)) + y[:, None]
    expected = abs(np.corrcoef(X[:, 1], y)[0, 1])
    assert cfs_merit([1], X, y) == pytest.approx(expected, rel=1e-12)
    assert cfs_merit([1], X, y, class_encoding="codes") == pytest.approx(expected, rel=1e-12)


def test_duplicate_features_lower_merit():
    rng = np.random.default_rng(1)
    y = rng.integers(0, 3, 60)
    f = y + rng.normal(size=60)
    X = np.column_stack([f, f])
    single = cfs_merit([0], X, y)
    # r_ff = 1 gives 2 r / sqrt(2 + 2) = r: the copy adds nothing
    assert cfs_merit([0, 1], X, y) == pytest.approx(single, rel=1e-12)
    # a redundant copy never beats an independent feature of the same relevance
    g = y + rng.normal(size=60)
    independent = cfs_merit([0, 1], np.column_stack([f, g]), y)
    assert independent > single


def test_deterministic_feature_merit_one():
    y = np.repeat([0, 1], 20)
    X = np.column_stack([2.0 * y + 1.0, np.random.default_rng(2).normal(size=40)])
    assert cfs_merit([0], X, y) == pytest.approx(1.0)
    assert cfs_merit([0], X, y, class_encoding="codes") == pytest.approx(1.0)


def test_merit_matches_textbook_formula():
    for seed in range(20):
        X, y = random_dataset(seed)
        for subset in ([0], [0, 1], list(range(X.shape[1]))):
            assert cfs_merit(subset, X, y) == pytest.approx(oracles.cfs_merit(subset, X, y), abs=1e-10)


def test_empty_subset_and_single_class():
    X, y = random_dataset(0)
    assert cfs_merit([], X, y) == 0.0
    with pytest.raises(DegenerateDataError):
        best_first_select(X, np.zeros(len(X)))


def test_perfect_feature_selected():
    rng = np.random.default_rng(4)
    y = rng.integers(0, 4, 120)
    X = rng.normal(size=(120, 8))
    X[:, 0] = y
    sel = best_first_select(X, y)
    assert 0 in sel.indices
    assert sel.merit == pytest.approx(oracles.best_subset_merit(X, y), abs=1e-9)


def test_noise_dataset():
    # CFS merit grows like sqrt(k) over nearly uncorrelated noise, so pure
    # noise yields a mid-sized subset with a low merit, far below one real feature.
    for seed in range(5):
        rng = np.random.default_rng(seed)
        y = rng.integers(0, 3, 200)
        X = rng.normal(size=(200, 50))
        noise = best_first_select(X, y)
        assert noise.merit < 0.35
        assert len(noise) < 25
        X[:, 7] = y + 0.5 * rng.normal(size=200)
        signal = best_first_select(X, y)
        assert 7 in signal.indices and signal.merit > noise.merit


def test_matches_exhaustive_optimum():
    for seed in range(40):
        X, y = random_dataset(seed)
        assert best_first_select(X, y).merit == pytest.approx(oracles.best_subset_merit(X, y), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_selection_invariants(seed):
    X, y = random_dataset(seed, max_features=14)
    a = best_first_select(X, y)
    assert a == best_first_select(X, y)
    assert len(set(a.indices)) == len(a.indices)
    assert all(0 <= i < X.shape[1] for i in a.indices)
    assert a.merit >= max(cfs_merit([f], X, y) for f in range(X.shape[1])) - 1e-12
    assert a.merit == pytest.approx(cfs_merit(a.indices, X, y), abs=1e-9)


def test_wrapper_evaluator_uses_scorer():
    X, y = random_dataset(3)
    calls = []

    def scorer(Xs, _y):
        calls.append(Xs.shape[1])
        return -abs(Xs.shape[1] - 2)  # prefers exactly two features

    sel = best_first_select(X, y, evaluator="wrapper", scorer=scorer)
    assert len(sel) == 2 and calls
    with pytest.raises(ValueError):
        best_first_select(X, y, evaluator="wrapper")


def test_max_features_limit():
    X, y = random_dataset(6)
    assert len(best_first_select(X, y, max_features=1)) == 1


def test_subset_file_round_trip(tmp_path):
    subset = FeatureSubset((3, 1, 7), 0.123456789)
    write_subset(tmp_path / "s.txt", subset)
    assert read_subset(tmp_path / "s.txt") == subset
    with pytest.raises(ValueError):
        FeatureSubset((1, 1))
