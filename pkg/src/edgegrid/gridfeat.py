"""Grid super-imposition features.

A grid of ``g`` interior horizontal and ``g`` interior vertical lines is laid
over each edge map. Each line is sampled at ``n_spacing`` equally spaced
points, and the samples are grouped into ``d`` contiguous divisions. A
division (a *slot*) is occupied when any of its samples touches an edge
pixel. Slots are ordered horizontal lines first (line, then division), then
vertical lines likewise, giving ``2 * g * d`` slots.

Per window the feature vector holds the occupancy of a reference frame
followed by a per-slot velocity: the mean absolute frame-to-frame
displacement of the slot's edge-hit centroid along its line.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from .edges import EdgeParams, canny
from .errors import DimensionError

HORIZONTAL = 0
VERTICAL = 1


def round_half_down(x):
    """Nearest integer, with exact halves rounded down (so k + 0.5 -> k)."""
    return math.ceil(x - 0.5)


@dataclass(frozen=True)
class GridSpec:
    g: int = 20
    d: int = 5
    n_spacing: Optional[int] = None

    def __post_init__(self):
        if self.g < 1 or self.d < 1:
            raise ValueError("g and d must be positive")
        if self.n_spacing is None:
            object.__setattr__(self, "n_spacing", self.g)
        if self.n_spacing < 1:
            raise ValueError("n_spacing must be positive")
        if self.d > self.n_spacing:
            raise ValueError(f"d={self.d} exceeds n_spacing={self.n_spacing}")

    @property
    def n_slots(self):
        return 2 * self.g * self.d

    @property
    def n_features(self):
        return 4 * self.g * self.d

    def division_bounds(self):
        """(start, stop) sample ranges per division; the last absorbs the remainder."""
        size = self.n_spacing // self.d
        bounds = [(k * size, (k + 1) * size) for k in range(self.d)]
        bounds[-1] = (bounds[-1][0], self.n_spacing)
        return bounds


class SlotIndex(NamedTuple):
    orientation: int
    line: int
    division: int

    def flat(self, spec):
        return (self.orientation * spec.g + self.line) * spec.d + self.division


class GridLines(NamedTuple):
    rows: tuple  # horizontal line y-coordinates
    cols: tuple  # vertical line x-coordinates


def grid_lines(width, height, spec):
    """Place ``g`` strictly interior lines per axis at round((i + 1) * size / (g + 1))."""
    if width <= spec.g or height <= spec.g:
        raise DimensionError(f"{width}x{height} frame is too small for a {spec.g}-line grid")
    rows = tuple(round_half_down((i + 1) * height / (spec.g + 1)) for i in range(spec.g))
    cols = tuple(round_half_down((i + 1) * width / (spec.g + 1)) for i in range(spec.g))
    return GridLines(rows, cols)


def sample_points(length, spec):
    """Along-line offsets round((k + 0.5) * length / n_spacing) for k < n_spacing."""
    n = spec.n_spacing
    return tuple(
        min(length - 1, max(0, round_half_down((k + 0.5) * length / n))) for k in range(n)
    )


def _dilate(mask):
    # 3x3 binary dilation: a sample "hits" when any pixel within radius 1 is an edge.
    h, w = mask.shape
    padded = np.pad(mask, 1, mode="constant", constant_values=False)
    out = np.zeros((h, w), dtype=bool)
    for dy in range(3):
        for dx in range(3):
            out |= padded[dy : dy + h, dx : dx + w]
    return out


class _Layout:
    """Sample coordinates for every (slot, sample) pair of a raster size."""

    def __init__(self, width, height, spec):
        lines = grid_lines(width, height, spec)
        xs = np.array(sample_points(width, spec))
        ys = np.array(sample_points(height, spec))
        g, n = spec.g, spec.n_spacing
        # rows/cols: (2g, n) pixel coordinates; along: (2g, n) along-line offsets.
        h_rows = np.repeat(np.array(lines.rows)[:, None], n, axis=1)
        h_cols = np.repeat(xs[None, :], g, axis=0)
        v_rows = np.repeat(ys[None, :], g, axis=0)
        v_cols = np.repeat(np.array(lines.cols)[:, None], n, axis=1)
        self.spec = spec
        self.shape = (height, width)
        self.rows = np.vstack([h_rows, v_rows])
        self.cols = np.vstack([h_cols, v_cols])
        self.along = np.vstack([h_cols, v_rows]).astype(np.float64)
        # membership[s, k]: sample k of a line belongs to division s
        membership = np.zeros((spec.d, n), dtype=bool)
        for s, (start, stop) in enumerate(spec.division_bounds()):
            membership[s, start:stop] = True
        self.membership = membership

    def hits(self, edges):
        if edges.data.shape != self.shape:
            raise DimensionError(
                f"edge map {edges.data.shape} does not match layout {self.shape}"
            )
        return _dilate(edges.data)[self.rows, self.cols]  # (2g, n)

    def occupancy(self, hits):
        # (2g, d) -> flattened in slot order
        per_division = (hits[:, None, :] & self.membership[None, :, :]).any(axis=2)
        return per_division.reshape(-1).astype(np.float64)

    def centroids(self, hits):
        """Mean along-line offset of hit samples per slot; NaN where unoccupied."""
        weights = hits[:, None, :] & self.membership[None, :, :]  # (2g, d, n)
        counts = weights.sum(axis=2)
        sums = (weights * self.along[:, None, :]).sum(axis=2)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
        return out.reshape(-1)


@lru_cache(maxsize=64)
def _layout(width, height, spec):
    return _Layout(width, height, spec)


def occupancy(edges, spec):
    """Binary occupancy of every slot (length ``2 * g * d``)."""
    layout = _layout(edges.width, edges.height, spec)
    return layout.occupancy(layout.hits(edges))


def slot_centroid(edges, slot, spec):
    """Mean along-line position of the slot's edge-hitting samples, or None."""
    layout = _layout(edges.width, edges.height, spec)
    value = layout.centroids(layout.hits(edges))[SlotIndex(*slot).flat(spec)]
    return None if np.isnan(value) else float(value)


def velocity_features(edge_maps, spec):
    """Per-slot mean |centroid displacement| over consecutive frame pairs where both exist."""
    if len(edge_maps) < 2:
        raise ValueError("velocity needs at least two frames")
    shape = edge_maps[0].data.shape
    if any(e.data.shape != shape for e in edge_maps):
        raise DimensionError("all edge maps in a window must share dimensions")
    layout = _layout(shape[1], shape[0], spec)
    cents = np.stack([layout.centroids(layout.hits(e)) for e in edge_maps])
    steps = np.abs(np.diff(cents, axis=0))
    valid = ~np.isnan(steps)
    n_valid = valid.sum(axis=0)
    total = np.where(valid, steps, 0.0).sum(axis=0)
    return np.where(n_valid > 0, total / np.maximum(n_valid, 1), 0.0)


REFERENCE_FRAMES = ("first", "middle", "last")


def _reference_index(count, reference):
    if reference == "first":
        return 0
    if reference == "middle":
        return count // 2
    if reference == "last":
        return count - 1
    raise ValueError(f"reference must be one of {REFERENCE_FRAMES}, got {reference!r}")


@dataclass(frozen=True, eq=False)
class FeatureVector:
    static: np.ndarray
    velocity: np.ndarray
    label: Optional[str] = None
    sequence_id: str = ""
    start_index: int = 0

    @property
    def values(self):
        return np.concatenate([self.static, self.velocity])

    def __len__(self):
        return len(self.static) + len(self.velocity)


def features_from_edges(edge_maps, spec, reference="first", label=None, sequence_id="", start_index=0):
    if len(edge_maps) < 2:
        raise ValueError("a window needs at least two frames")
    ref = edge_maps[_reference_index(len(edge_maps), reference)]
    return FeatureVector(
        static=occupancy(ref, spec),
        velocity=velocity_features(edge_maps, spec),
        label=label,
        sequence_id=sequence_id,
        start_index=start_index,
    )


def extract(window, edge_params=EdgeParams(), spec=GridSpec(), reference="first", label=None):
    """Canny every frame of a window and build its static + velocity feature vector."""
    edge_maps = [canny(frame, edge_params) for frame in window.frames]
    return features_from_edges(
        edge_maps, spec, reference, label, window.sequence_id, window.start_index
    )


def feature_columns(n_slots):
    return [f"s_{i:03d}" for i in range(n_slots)] + [f"v_{i:03d}" for i in range(n_slots)]


def write_features_csv(path, vectors):
    """One row per window: sequence_id, start_index, s_*, v_*, label."""
    vectors = list(vectors)
    n_slots = len(vectors[0].static) if vectors else 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sequence_id", "start_index", *feature_columns(n_slots), "label"])
        for vec in vectors:
            if len(vec.static) != n_slots:
                raise DimensionError("all feature vectors in a file must share a length")
            writer.writerow(
                [vec.sequence_id, vec.start_index]
                + [repr(float(v)) for v in vec.values]
                + [vec.label or ""]
            )


def read_features_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["sequence_id", "start_index"] or header[-1] != "label":
            raise ValueError(f"{path}: not a feature CSV")
        n_values = len(header) - 3
        if n_values % 2:
            raise ValueError(f"{path}: odd number of feature columns")
        n_slots = n_values // 2
        vectors = []
        for row in reader:
            if not row:
                continue
            values = np.array([float(v) for v in row[2:-1]])
            if len(values) != n_values:
                raise ValueError(f"{path}: ragged row for {row[0]}")
            vectors.append(
                FeatureVector(
                    static=values[:n_slots],
                    velocity=values[n_slots:],
                    label=row[-1] or None,
                    sequence_id=row[0],
                    start_index=int(row[1]),
                )
            )
    return vectors
