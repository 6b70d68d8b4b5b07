"""Confusion matrices, per-class recall and overall accuracy."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .classes import CLASSES, canonical_label
from .errors import FormatError


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true classes, columns predictions; ``rows`` is row-normalized."""

    classes: tuple
    counts: np.ndarray

    @property
    def support(self):
        return self.counts.sum(axis=1)

    @property
    def rows(self):
        support = self.support
        out = np.zeros_like(self.counts, dtype=np.float64)
        nz = support > 0
        out[nz] = self.counts[nz] / support[nz, None]
        return out

    @property
    def recall(self):
        return np.diag(self.rows)

    @property
    def accuracy(self):
        total = self.counts.sum()
        return float(np.trace(self.counts) / total) if total else 0.0

    def recall_of(self, label):
        return float(self.recall[self.classes.index(label)])


def confusion_from_pairs(true, predicted, counts=None, classes=CLASSES):
    """Tally (true, predicted) pairs, optionally weighted by integer ``counts``."""
    index = {c: i for i, c in enumerate(classes)}
    matrix = np.zeros((len(classes), len(classes)), dtype=np.int64)
    weights = np.ones(len(true), dtype=np.int64) if counts is None else np.asarray(counts)
    for t, p, w in zip(true, predicted, weights):
        try:
            matrix[index[t], index[p]] += int(w)
        except KeyError as exc:
            raise FormatError(f"label {exc.args[0]!r} not in the class set") from None
    return ConfusionMatrix(tuple(classes), matrix)


def confusion(model, X, labels):
    """Confusion matrix of ``model`` on feature-subset-restricted rows ``X``."""
    from .svm import predict_many

    predicted = predict_many(model, X)
    return confusion_from_pairs(list(labels), predicted)


def write_confusion_csv(path, cm):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["true", *cm.classes, "support"])
        for label, row, support in zip(cm.classes, cm.rows, cm.support):
            writer.writerow([label, *(f"{v:.6f}" for v in row), int(support)])


def format_metrics(cm):
    lines = [f"overall_accuracy {cm.accuracy:.6f}"]
    lines += [f"recall_{c} {r:.6f}" for c, r in zip(cm.classes, cm.recall)]
    lines += [f"support_{c} {int(s)}" for c, s in zip(cm.classes, cm.support)]
    return "\n".join(lines) + "\n"


def write_metrics(path, cm):
    with open(path, "w") as fh:
        fh.write(format_metrics(cm))


def write_predictions_csv(path, rows):
    """``rows``: iterables of (sequence_id, start_index, true, predicted)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sequence_id", "start_index", "true", "predicted"])
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def read_predictions_csv(path):
    """Read ``true``/``predicted`` columns (and an optional ``count`` weight)."""
    true, predicted, counts = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "true" not in fields or "predicted" not in fields:
            raise FormatError(f"{path}: need 'true' and 'predicted' columns")
        for row in reader:
            if not row["true"]:
                continue
            true.append(canonical_label(row["true"]))
            predicted.append(canonical_label(row["predicted"]))
            counts.append(int(row["count"]) if "count" in fields else 1)
    return true, predicted, counts


def reference_matrix():
    """Reference row-normalized confusion matrix shipped with the package."""
    text = resources.files("edgegrid").joinpath("fixtures/reference_confusion.csv").read_text()
    reader = csv.reader(text.splitlines())
    header = next(reader)
    classes = tuple(header[1:])
    rows = np.array([[float(v) for v in row[1:]] for row in reader])
    return classes, rows


def reference_counts_path():
    return resources.files("edgegrid").joinpath("fixtures/reference_counts.csv")
