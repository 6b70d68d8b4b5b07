"""Sequence-grouped, class-stratified train/test splits and k-fold partitions.

Every window of a sequence shares that sequence's fate: it lands wholly in
train or wholly in test (or in one fold), so near-duplicate frames never
straddle an evaluation boundary.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter, defaultdict

import numpy as np

from .errors import PartitionError


def _group_labels(labels, groups):
    """Majority label per group; groups in first-appearance order."""
    members = defaultdict(list)
    for index, group in enumerate(groups):
        members[group].append(index)
    group_label = {}
    for group, idx in members.items():
        counts = Counter(labels[i] for i in idx)
        group_label[group] = min(counts, key=lambda c: (-counts[c], str(c)))
    return members, group_label


def _by_class(group_label):
    per_class = defaultdict(list)
    for group, label in group_label.items():
        per_class[label].append(group)
    return {c: sorted(gs, key=str) for c, gs in sorted(per_class.items(), key=lambda kv: str(kv[0]))}


def split(labels, groups, train_fraction=0.7, seed=0):
    """Stratified, group-preserving split; returns (train_idx, test_idx) index arrays.

    Per class, round(train_fraction * n_groups) sequences go to train (at
    least one to each side when the class has two or more). A class with a
    single sequence is placed in train with a warning.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    labels = list(labels)
    groups = list(groups)
    if len(labels) != len(groups):
        raise ValueError("labels and groups must have equal length")
    members, group_label = _group_labels(labels, groups)
    rng = np.random.default_rng(seed)
    train_groups, test_groups = [], []
    for label, class_groups in _by_class(group_label).items():
        order = [class_groups[i] for i in rng.permutation(len(class_groups))]
        n = len(order)
        if n < 2:
            warnings.warn(f"class {label!r} has {n} sequence(s); placed in train")
            train_groups.extend(order)
            continue
        n_train = min(n - 1, max(1, math.floor(train_fraction * n + 0.5)))
        train_groups.extend(order[:n_train])
        test_groups.extend(order[n_train:])
    train_idx = np.array(sorted(i for g in train_groups for i in members[g]), dtype=int)
    test_idx = np.array(sorted(i for g in test_groups for i in members[g]), dtype=int)
    return train_idx, test_idx


def kfold(labels, groups, k=10, seed=0):
    """Stratified, group-preserving k-fold partition; returns k index arrays.

    Groups are shuffled within each class and dealt round-robin into folds,
    with the dealing position carried across classes, so fold sizes differ
    by at most one group and each class is spread as evenly as possible.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    labels = list(labels)
    groups = list(groups)
    if len(labels) != len(groups):
        raise ValueError("labels and groups must have equal length")
    members, group_label = _group_labels(labels, groups)
    if len(members) < k:
        raise PartitionError(f"{len(members)} groups cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    position = 0
    for class_groups in _by_class(group_label).values():
        for i in rng.permutation(len(class_groups)):
            folds[position % k].extend(members[class_groups[i]])
            position += 1
    return [np.array(sorted(f), dtype=int) for f in folds]
