"""Edge-threshold and grid-size sweeps over the full pipeline."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .pipeline import edge_windows, run, vectors_from_edges

EDGE_THRESHOLDS = (0.2, 0.4, 0.6, 0.8)
GRID_SIZES = tuple(range(5, 55, 5))


@dataclass(frozen=True)
class SweepPoint:
    value: float
    classes: tuple
    recall: np.ndarray
    accuracy: float
    n_features: int
    n_selected: int
    mean_edge_pixels: float


@dataclass(frozen=True)
class SweepResult:
    axis: str
    points: tuple

    def __post_init__(self):
        values = [p.value for p in self.points]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep parameter values must be strictly increasing")

    @property
    def best(self):
        """Point with the highest overall accuracy (first one on ties)."""
        return max(self.points, key=lambda p: p.accuracy)


def _point(value, edge_wins, config):
    vectors = vectors_from_edges(edge_wins, config.grid_spec(), config.reference)
    result = run(vectors, config)
    pixels = [e.count for ew in edge_wins for e in ew.edge_maps]
    return SweepPoint(
        value=value,
        classes=result.confusion.classes,
        recall=result.confusion.recall,
        accuracy=result.confusion.accuracy,
        n_features=result.n_features,
        n_selected=len(result.model.feature_subset),
        mean_edge_pixels=float(np.mean(pixels)) if pixels else 0.0,
    )


def sweep_edge_threshold(labeled_windows, config, thresholds=EDGE_THRESHOLDS, jobs=1):
    """One full pipeline run per edge threshold, grid size held at ``config.grid``."""
    thresholds = sorted(set(float(t) for t in thresholds))
    if not thresholds:
        raise ValueError("no thresholds to sweep")
    points = []
    for t in thresholds:
        cfg = replace(config, edge_threshold=t)
        points.append(_point(t, edge_windows(labeled_windows, cfg.edge_params(), jobs), cfg))
    return SweepResult("edge_threshold", tuple(points))


def sweep_grid_size(labeled_windows, config, sizes=GRID_SIZES, jobs=1):
    """One full pipeline run per grid size at ``config.edge_threshold``.

    Edge maps do not depend on the grid, so they are computed once.
    """
    sizes = sorted(set(int(g) for g in sizes))
    if not sizes:
        raise ValueError("no grid sizes to sweep")
    edge_wins = edge_windows(labeled_windows, config.edge_params(), jobs)
    points = []
    for g in sizes:
        cfg = replace(config, grid=g, n_spacing=None)
        points.append(_point(g, edge_wins, cfg))
    return SweepResult("grid_size", tuple(points))


def write_sweep_csv(path, result):
    """Long format: param,class,recall,overall (one row per class per point)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["param", "class", "recall", "overall"])
        for p in result.points:
            for label, recall in zip(p.classes, p.recall):
                writer.writerow([repr(p.value), label, repr(float(recall)), repr(p.accuracy)])
