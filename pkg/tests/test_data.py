import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from edgegrid.classes import CLASSES
from edgegrid.config import RunConfig
from edgegrid.data import (
    EPISODE,
    Annotation,
    SyntheticClassSpec,
    generate_synthetic,
    read_annotations,
    resolve_labels,
    sequence_dirs,
    window_label,
    write_annotations,
)
from edgegrid.edges import canny
from edgegrid.errors import FormatError
from edgegrid.imaging import downsample, load_sequence
from edgegrid.pipeline import extract_corpus, labeled_only, to_arrays

import oracles


def _votes(*labels, key=("s", 0)):
    return [Annotation(key[0], key[1], f"o{i}", label) for i, label in enumerate(labels)]


def test_resolve_examples(caplog):
    resolved, excluded = resolve_labels(
        _votes("happy", "happy", "surprised", key=("a", 0))
        + _votes("happy", "sad", "fear", key=("b", 0))
        + _votes("neutral", "neutral", "neutral", key=("c", EPISODE))
    )
    assert resolved == {("a", 0): "happy", ("c", EPISODE): "neutral"}
    assert excluded == [("b", 0)]
    assert "observer tie" in caplog.text


@given(st.lists(st.tuples(st.integers(0, 5), st.sampled_from(CLASSES)), max_size=60))
def test_resolve_invariants(votes):
    annotations = [Annotation(f"s{k}", 0, f"o{i}", label) for i, (k, label) in enumerate(votes)]
    resolved, excluded = resolve_labels(annotations)
    keys = {(a.sequence_id, a.start_index) for a in annotations}
    assert len(resolved) == len(keys) - len(excluded)
    for key, label in resolved.items():
        counts = {}
        for a in annotations:
            if (a.sequence_id, a.start_index) == key:
                counts[a.label] = counts.get(a.label, 0) + 1
        assert all(counts[label] > n for other, n in counts.items() if other != label)


def test_window_label_prefers_window_annotation():
    resolved = {("s", EPISODE): "sad", ("s", 8): "happy"}
    assert window_label(resolved, "s", 8) == "happy"
    assert window_label(resolved, "s", 0) == "sad"
    assert window_label(resolved, "t", 0) is None


def test_annotation_file_round_trip(tmp_path):
    annotations = _votes("angry", "happy", "happy")
    write_annotations(tmp_path / "labels.csv", annotations)
    back = read_annotations(tmp_path / "labels.csv")
    assert back == annotations and back[0].label == "anger"
    (tmp_path / "bad.csv").write_text("sequence,label\nx,happy\n")
    with pytest.raises(FormatError):
        read_annotations(tmp_path / "bad.csv")
    with pytest.raises(FormatError):
        Annotation("s", 0, "o", "bored")


def test_corpus_counts(corpus):
    dirs = sequence_dirs(corpus)
    assert len(dirs) == 70
    assert sum(len(list(d.glob("*.pgm"))) for d in dirs) == 1680
    resolved, excluded = resolve_labels(read_annotations(corpus / "labels.csv"))
    assert not excluded and len(resolved) == 70
    assert sorted(set(resolved.values())) == sorted(CLASSES)


def test_generation_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    specs = [SyntheticClassSpec("happy", "translating-square"), SyntheticClassSpec("sad", "static-square")]
    generate_synthetic(a, specs, sequences_per_class=2, seed=5)
    generate_synthetic(b, specs, sequences_per_class=2, seed=5)
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    assert files == sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert all((a / f).read_bytes() == (b / f).read_bytes() for f in files)


def test_generator_rejects_small_inputs(tmp_path):
    with pytest.raises(ValueError):
        generate_synthetic(tmp_path, dims=(32, 32))
    with pytest.raises(ValueError):
        generate_synthetic(tmp_path, frames=12)


def test_translating_square_velocity(tmp_path):
    # amplitude 2 px per source frame on each axis; keep_every=3 -> 6 px per kept frame
    spec = SyntheticClassSpec("happy", "translating-square", amplitude=2.0)
    generate_synthetic(tmp_path, [spec], sequences_per_class=3)
    config = RunConfig()
    vectors = extract_corpus(tmp_path, config)
    for vec, seq_dir in zip(vectors, sequence_dirs(tmp_path)):
        frames = downsample(load_sequence(seq_dir), 3).frames[:8]
        maps = [canny(f, config.edge_params()).data for f in frames]
        np.testing.assert_allclose(vec.velocity, oracles.velocity(maps, 20, 5, 20))
        moving = vec.velocity[vec.velocity > 0]
        # centroids are quantized to the ~3.2 px sample spacing
        assert len(moving) > 10
        assert 0 < moving.mean() <= 6.0 + 64 / 20


def test_class_separability(corpus):
    X, labels, _ = to_arrays(labeled_only(extract_corpus(corpus, RunConfig())))
    static = X[:, :200]
    means = {c: static[labels == c].mean(axis=0) for c in CLASSES}
    for c in CLASSES:
        others = np.array([means[o] for o in CLASSES if o != c])
        margin = np.abs(others - means[c]).min(axis=0)
        assert margin.max() > 0, c
