"""Best-first feature-subset search with a correlation-based (CFS) merit.

The CFS merit of a subset S of k features is

    merit(S) = k * mean|r_cf| / sqrt(k + k (k - 1) * mean|r_ff|)

where r_ff are the pairwise feature/feature Pearson correlations and r_cf
the feature/class correlations. With ``class_encoding="indicator"`` (the
default) a feature's class correlation is the prior-weighted mean of its
|correlation| with each one-vs-rest class indicator, which does not depend
on how labels are numbered; ``"codes"`` correlates against the integer class
code directly. The two agree for two classes. Zero-variance features
correlate 0 with everything.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError


@dataclass(frozen=True)
class FeatureSubset:
    indices: tuple
    merit: float = 0.0

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if len(set(indices)) != len(indices):
            raise ValueError("feature indices must be unique")
        if any(i < 0 for i in indices):
            raise ValueError("feature indices must be non-negative")
        object.__setattr__(self, "indices", indices)

    def __len__(self):
        return len(self.indices)


CLASS_ENCODINGS = ("indicator", "codes")


def _unit_columns(X):
    """Centered, unit-norm columns; constant columns become all-zero."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Xc = X - X.mean(axis=0)
    norms = np.sqrt((Xc * Xc).sum(axis=0))
    # Constant columns leave only rounding residue after centering.
    live = norms > 1e-10 * (1.0 + np.abs(X).max(axis=0, initial=0.0)) * math.sqrt(len(X))
    Z = np.zeros_like(Xc)
    Z[:, live] = Xc[:, live] / norms[live]
    return Z


def _abs_correlations(X, y, class_encoding="indicator"):
    """|corr(feature, class)| per column and the |corr| matrix between columns."""
    y = np.asarray(y)
    classes = np.unique(y)
    if len(classes) < 2:
        raise DegenerateDataError("feature selection needs at least two classes")
    Z = _unit_columns(X)
    if class_encoding == "codes":
        r_cf = np.abs(Z.T @ _unit_columns(y.astype(np.float64)[:, None])[:, 0])
    elif class_encoding == "indicator":
        r_cf = np.zeros(Z.shape[1])
        for c in classes:
            indicator = (y == c).astype(np.float64)
            r_cf += indicator.mean() * np.abs(Z.T @ _unit_columns(indicator[:, None])[:, 0])
    else:
        raise ValueError(f"class_encoding must be one of {CLASS_ENCODINGS}")
    r_ff = np.abs(Z.T @ Z)
    return np.clip(r_cf, 0.0, 1.0), np.clip(r_ff, 0.0, 1.0)


def _merit_from_sums(k, sum_cf, sum_ff_pairs):
    if k == 0:
        return 0.0
    denom = k + 2.0 * sum_ff_pairs
    return float(sum_cf / math.sqrt(denom)) if denom > 0 else 0.0


def cfs_merit(indices, X, y, class_encoding="indicator"):
    """CFS merit of the feature columns ``indices`` of ``X`` against class labels ``y``."""
    indices = list(indices)
    X = np.asarray(X, dtype=np.float64)
    r_cf, r_ff = _abs_correlations(X[:, indices] if indices else X[:, :0], y, class_encoding)
    k = len(indices)
    if k == 0:
        return 0.0
    sum_ff = (r_ff.sum() - np.trace(r_ff)) / 2.0
    return _merit_from_sums(k, r_cf.sum(), sum_ff)


class _Node:
    __slots__ = ("indices", "merit", "sum_cf", "sum_ff")

    def __init__(self, indices, merit, sum_cf=0.0, sum_ff=0.0):
        self.indices = indices
        self.merit = merit
        self.sum_cf = sum_cf
        self.sum_ff = sum_ff


def _cfs_children(X, y, class_encoding):
    r_cf, r_ff = _abs_correlations(X, y, class_encoding)

    def children(node, candidates):
        k = len(node.indices) + 1
        cand = np.asarray(candidates)
        if node.indices:
            link = r_ff[np.ix_(list(node.indices), cand)].sum(axis=0)
        else:
            link = np.zeros(len(cand))
        sum_cf = node.sum_cf + r_cf[cand]
        sum_ff = node.sum_ff + link
        merits = sum_cf / np.sqrt(k + 2.0 * sum_ff)
        return [
            _Node(node.indices + (int(f),), float(m), float(a), float(b))
            for f, m, a, b in zip(cand, merits, sum_cf, sum_ff)
        ]

    return children


def _wrapper_children(X, y, scorer):
    def children(node, candidates):
        out = []
        for f in candidates:
            idx = node.indices + (int(f),)
            out.append(_Node(idx, float(scorer(np.asarray(X)[:, sorted(idx)], y))))
        return out

    return children


def best_first_select(X, y, max_stale=5, evaluator="cfs", scorer=None, max_features=None,
                      class_encoding="indicator"):
    """Best-first forward search from the empty set.

    The open list is ordered by merit (ties: lexicographically smallest sorted
    index tuple). Each popped subset is expanded by every single-feature
    addition not seen before. Search stops after ``max_stale`` consecutive
    expansions that fail to raise the best merit, or when the open list is
    exhausted.

    ``evaluator="wrapper"`` scores subsets with ``scorer(X_subset, y)``
    (e.g. cross-validated classifier accuracy) instead of the CFS merit.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("X must be a non-empty 2-D array")
    if len(np.unique(y)) < 2:
        raise DegenerateDataError("feature selection needs at least two classes")
    n_features = X.shape[1]
    if evaluator == "cfs":
        expand = _cfs_children(X, y, class_encoding)
    elif evaluator == "wrapper":
        if scorer is None:
            raise ValueError("wrapper evaluation needs a scorer")
        expand = _wrapper_children(X, y, scorer)
    else:
        raise ValueError(f"unknown evaluator {evaluator!r}")
    limit = n_features if max_features is None else min(max_features, n_features)

    # The empty set is never a result: any scored subset beats it, including
    # wrapper scores that can be negative.
    root = _Node((), -math.inf)
    best = root
    seen = {frozenset()}
    open_list = [(-0.0, (), 0, root)]
    counter = 1
    stale = 0
    while open_list and stale < max_stale:
        _, _, _, node = heapq.heappop(open_list)
        if len(node.indices) >= limit:
            stale += 1
            continue
        members = set(node.indices)
        candidates = []
        for f in range(n_features):
            if f in members:
                continue
            key = frozenset(members | {f})
            if key not in seen:
                seen.add(key)
                candidates.append(f)
        improved = False
        if candidates:
            for child in expand(node, candidates):
                order = tuple(sorted(child.indices))
                heapq.heappush(open_list, (-child.merit, order, counter, child))
                counter += 1
                if best is root or child.merit > best.merit + 1e-12:
                    best = child
                    improved = True
        stale = 0 if improved else stale + 1
    return FeatureSubset(tuple(sorted(best.indices)), best.merit)


def write_subset(path, subset):
    """Header line with the merit, then one feature index per line."""
    with open(path, "w") as fh:
        fh.write(f"merit {subset.merit!r}\n")
        for index in subset.indices:
            fh.write(f"{index}\n")


def read_subset(path):
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines or not lines[0].startswith("merit"):
        raise ValueError(f"{path}: missing merit header")
    merit = float(lines[0].split()[1])
    return FeatureSubset(tuple(int(v) for v in lines[1:]), merit)
