import numpy as np
import pytest

from edgegrid.classes import CLASSES, canonical_label
from edgegrid.config import RunConfig
from edgegrid.errors import FormatError
from edgegrid.pipeline import extract_corpus, labeled_only, run, select_features, to_arrays


def test_config_defaults_and_validation():
    config = RunConfig()
    assert (config.grid, config.divisions, config.edge_threshold, config.window,
            config.keep_every, config.slack_c, config.folds) == (20, 5, 0.4, 8, 3, 0.4, 10)
    assert config.grid_spec().n_features == 400
    for bad in [dict(edge_threshold=0.0), dict(divisions=30), dict(window=1), dict(keep_every=0),
                dict(reference="median"), dict(slack_c=-1.0), dict(train_fraction=1.0),
                dict(class_encoding="onehot"), dict(gamma=0.0)]:
        with pytest.raises(ValueError):
            RunConfig(**bad)


def test_canonical_labels():
    assert canonical_label("Angry") == "anger"
    assert canonical_label(" surprised ") == "surprise"
    with pytest.raises(FormatError):
        canonical_label("bored")
    assert len(CLASSES) == 7


def test_run_on_corpus(corpus):
    vectors = extract_corpus(corpus, RunConfig())
    assert len(vectors) == 70 and all(len(v) == 400 for v in vectors)
    result = run(vectors, RunConfig())
    groups = np.array([v.sequence_id for v in labeled_only(vectors)])
    assert not set(groups[result.train_idx]) & set(groups[result.test_idx])
    assert len(result.train_idx) == 49 and len(result.test_idx) == 21
    assert result.confusion.accuracy >= 0.85
    again = run(vectors, RunConfig())
    np.testing.assert_array_equal(again.confusion.counts, result.confusion.counts)


def test_wrapper_selection(corpus):
    X, labels, groups = to_arrays(extract_corpus(corpus, RunConfig(grid=5)))
    X = X[:, ::10]  # 10 columns keep the CV-scored search quick
    subset = select_features(X, labels, groups, RunConfig(grid=5, folds=3, max_stale=2), "wrapper")
    assert len(subset) >= 1 and 0.0 < subset.merit <= 1.0
