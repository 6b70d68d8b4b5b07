"""Corpus-level extraction and the split -> select -> train -> evaluate run."""

from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classes import CLASSES
from .data import LABELS_FILE, read_annotations, resolve_labels, sequence_dirs, window_label
from .edges import canny, save_edge_map
from .gridfeat import features_from_edges
from .imaging import downsample, load_sequence, windows
from .metrics import confusion
from .select import best_first_select
from .splits import kfold, split
from .svm import KernelParams, grid_search_c, ovo_train, predict_many

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabeledWindow:
    window: object
    label: object


@dataclass(frozen=True)
class EdgeWindow:
    edge_maps: tuple
    sequence_id: str
    start_index: int
    label: object


def default_jobs():
    return os.cpu_count() or 1


def load_labels(root, labels_path=None):
    path = Path(labels_path) if labels_path else Path(root) / LABELS_FILE
    if not path.exists():
        log.warning("no labels file at %s; windows are unlabeled", path)
        return {}
    resolved, excluded = resolve_labels(read_annotations(path))
    if excluded:
        log.warning("%d annotation keys excluded by observer ties", len(excluded))
    return resolved


def corpus_windows(root, config, labels_path=None):
    """Load, down-sample and window every sequence of a corpus, attaching labels."""
    resolved = load_labels(root, labels_path)
    out = []
    for seq_dir in sequence_dirs(root):
        seq = downsample(load_sequence(seq_dir, config.source_fps), config.keep_every)
        for win in windows(seq, config.window, config.stride, sequence_id=seq_dir.name):
            out.append(LabeledWindow(win, window_label(resolved, win.sequence_id, win.start_index)))
    return out


def _edges_of(args):
    labeled, edge_params = args
    win = labeled.window
    maps = tuple(canny(frame, edge_params) for frame in win.frames)
    return EdgeWindow(maps, win.sequence_id, win.start_index, labeled.label)


def edge_windows(labeled_windows, edge_params, jobs=1):
    """Canny every frame of every window, optionally across worker processes."""
    tasks = [(lw, edge_params) for lw in labeled_windows]
    if jobs is None or jobs <= 1 or len(tasks) < 2:
        return [_edges_of(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_edges_of, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def vectors_from_edges(edge_wins, spec, reference="first"):
    return [
        features_from_edges(ew.edge_maps, spec, reference, ew.label, ew.sequence_id, ew.start_index)
        for ew in edge_wins
    ]


def dump_edges(edge_wins, directory):
    directory = Path(directory)
    for ew in edge_wins:
        out = directory / ew.sequence_id
        out.mkdir(parents=True, exist_ok=True)
        for k, edges in enumerate(ew.edge_maps):
            save_edge_map(edges, out / f"edges_{ew.start_index:05d}_{k:02d}.pgm")


def extract_corpus(root, config, jobs=1, labels_path=None, dump_dir=None):
    """Feature vectors for every window of a corpus, in sequence/window order."""
    edge_wins = edge_windows(corpus_windows(root, config, labels_path), config.edge_params(), jobs)
    if dump_dir is not None:
        dump_edges(edge_wins, dump_dir)
    return vectors_from_edges(edge_wins, config.grid_spec(), config.reference)


def to_arrays(vectors):
    """(X, labels, groups) arrays; labels/groups are object arrays."""
    X = np.array([v.values for v in vectors], dtype=np.float64)
    labels = np.array([v.label for v in vectors], dtype=object)
    groups = np.array([v.sequence_id for v in vectors], dtype=object)
    return X, labels, groups


def labeled_only(vectors):
    return [v for v in vectors if v.label]


def class_codes(labels):
    index = {c: i for i, c in enumerate(CLASSES)}
    return np.array([index[label] for label in labels], dtype=np.float64)


@dataclass(frozen=True)
class RunResult:
    model: object
    confusion: object
    train_idx: np.ndarray
    test_idx: np.ndarray
    n_features: int
    c: float


def cv_accuracy(X, labels, groups, params, folds, seed):
    """Mean grouped k-fold accuracy of an OvO model on ``X`` (all columns used)."""
    labels = np.asarray(labels, dtype=object)
    k = min(folds, len(set(groups)))
    scores = []
    for test_idx in kfold(labels, groups, k=k, seed=seed):
        train = np.ones(len(labels), dtype=bool)
        train[test_idx] = False
        if len(set(labels[train])) < 2:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = ovo_train(X[train], labels[train], params)
        predicted = np.asarray(predict_many(model, X[test_idx]), dtype=object)
        scores.append(np.mean(predicted == labels[test_idx]))
    return float(np.mean(scores)) if scores else 0.0


def select_features(X, labels, groups, config, evaluator="cfs"):
    """Best-first subset search with the CFS merit, or with grouped-CV accuracy (wrapper)."""
    if evaluator == "wrapper":
        params = config.kernel_params()

        def scorer(Xs, _codes):
            return cv_accuracy(Xs, labels, groups, params, config.folds, config.seed)

        return best_first_select(X, class_codes(labels), config.max_stale, "wrapper", scorer)
    return best_first_select(
        X, class_codes(labels), config.max_stale, class_encoding=config.class_encoding
    )


def fit(X, labels, groups, config, c_candidates=None, evaluator="cfs"):
    """Select features, optionally search C by grouped k-fold CV, and train the OvO model."""
    subset = select_features(X, labels, groups, config, evaluator)
    log.info("selected %d features (merit %.4f)", len(subset), subset.merit)
    c = config.slack_c
    if c_candidates:
        c = grid_search_c(X, labels, groups, c_candidates, folds=config.folds, seed=config.seed,
                          gamma=config.gamma, feature_subset=subset)
        log.info("grid search picked C=%g", c)
    return ovo_train(X, labels, KernelParams(config.gamma, c), feature_subset=subset)


def run(vectors, config, c_candidates=None, evaluator="cfs"):
    """Grouped split, fit on train, confusion matrix on the held-out part."""
    vectors = labeled_only(vectors)
    X, labels, groups = to_arrays(vectors)
    train_idx, test_idx = split(labels, groups, config.train_fraction, config.seed)
    model = fit(X[train_idx], labels[train_idx], groups[train_idx], config, c_candidates, evaluator)
    cm = confusion(model, model.restrict(X[test_idx]), labels[test_idx])
    return RunResult(model, cm, train_idx, test_idx, X.shape[1], model.params.c)
