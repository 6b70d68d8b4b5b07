"""Corpus layout, observer-label resolution and a synthetic moving-shape corpus.

Corpus layout::

    <root>/<sequence_id>/frame_00000.pgm
    <root>/labels.csv        sequence_id,start_index,observer_id,label

A ``start_index`` of -1 annotates the whole sequence (episode); it applies to
every window cut from that sequence unless a window-level annotation exists.
"""

from __future__ import annotations

import csv
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classes import CLASSES, canonical_label
from .errors import FormatError
from .imaging import GrayFrame, save_frame

log = logging.getLogger(__name__)

EPISODE = -1
LABELS_FILE = "labels.csv"
LABEL_COLUMNS = ["sequence_id", "start_index", "observer_id", "label"]


@dataclass(frozen=True)
class Annotation:
    sequence_id: str
    start_index: int
    observer_id: str
    label: str

    def __post_init__(self):
        object.__setattr__(self, "label", canonical_label(self.label))
        object.__setattr__(self, "start_index", int(self.start_index))


def read_annotations(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in LABEL_COLUMNS):
            raise FormatError(f"{path}: expected columns {','.join(LABEL_COLUMNS)}")
        return [
            Annotation(row["sequence_id"], int(row["start_index"]), row["observer_id"], row["label"])
            for row in reader
        ]


def write_annotations(path, annotations):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LABEL_COLUMNS)
        for a in annotations:
            writer.writerow([a.sequence_id, a.start_index, a.observer_id, a.label])


def resolve_labels(annotations):
    """Majority label per (sequence_id, start_index).

    Returns ``(labels, excluded)``: a dict of resolved labels and the sorted
    keys whose observers tied for the top vote (those are dropped and logged).
    """
    votes = defaultdict(Counter)
    for a in annotations:
        votes[(a.sequence_id, a.start_index)][a.label] += 1
    resolved, excluded = {}, []
    for key, counts in votes.items():
        ranked = counts.most_common()
        if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
            excluded.append(key)
            log.warning("observer tie for %s at %d: %s", key[0], key[1], dict(counts))
            continue
        resolved[key] = ranked[0][0]
    return resolved, sorted(excluded)


def window_label(resolved, sequence_id, start_index):
    """Window-level label if annotated, else the sequence's episode label, else None."""
    label = resolved.get((sequence_id, start_index))
    if label is None:
        label = resolved.get((sequence_id, EPISODE))
    return label


@dataclass(frozen=True)
class SyntheticClassSpec:
    """One synthetic class: a moving-shape pattern, its speed (px/frame) and noise stddev."""

    label: str
    pattern: str
    amplitude: float = 1.0
    noise: float = 0.02


PATTERNS = (
    "translating-square",
    "oscillating-bar",
    "expanding-circle",
    "static-square",
    "two-squares-converging",
    "jittering-cross",
    "blank-drift",
)

DEFAULT_SPECS = tuple(
    SyntheticClassSpec(label, pattern) for label, pattern in zip(CLASSES, PATTERNS)
)


def _bounce(x, lo, hi):
    """Reflect ``x`` into [lo, hi] (triangle wave), so shapes stay inside the frame."""
    span = hi - lo
    if span <= 0:
        return lo
    phase = (x - lo) % (2 * span)
    return lo + (phase if phase <= span else 2 * span - phase)


class _Painter:
    def __init__(self, height, width, background):
        self.canvas = np.full((height, width), background, dtype=np.float64)
        self.yy, self.xx = np.mgrid[0:height, 0:width]

    def rect(self, x0, y0, w, h, value):
        x0, y0 = int(round(x0)), int(round(y0))
        self.canvas[max(0, y0) : max(0, y0 + h), max(0, x0) : max(0, x0 + w)] = value

    def cross(self, cx, cy, arm, half_width, value):
        dx, dy = self.xx - cx, self.yy - cy
        inside = (np.abs(dx) <= arm) & (np.abs(dy) <= arm)
        on_diagonal = (np.abs(dx - dy) <= half_width * math.sqrt(2)) | (
            np.abs(dx + dy) <= half_width * math.sqrt(2)
        )
        self.canvas[inside & on_diagonal] = value

    def disc(self, cx, cy, r, value):
        self.canvas[(self.xx - cx) ** 2 + (self.yy - cy) ** 2 <= r * r] = value


def render_frame(spec, t, height, width, state):
    """Noise-free intensity raster of ``spec``'s pattern at source frame ``t``."""
    a = spec.amplitude
    bg, fg = state["background"], state["foreground"]
    ox, oy = state["offset"]
    p = _Painter(height, width, bg)
    cx, cy = width / 2 + ox, height / 2 + oy
    if spec.pattern == "translating-square":
        side = max(6, width // 5)
        # diagonal drift, so both line orientations see motion
        x = _bounce(width * 0.15 + ox + a * t, 1, width - side - 2)
        y = _bounce(height * 0.15 + oy + a * t, 1, height - side - 2)
        p.rect(x, y, side, side, fg)
    elif spec.pattern == "oscillating-bar":
        amp = 4.0 + 4.0 * a
        x = width * 0.25 + ox + amp * math.cos(2 * math.pi * t / 16.0)
        p.rect(x - 2, height * 0.2 + oy, 4, int(height * 0.6), fg)
    elif spec.pattern == "expanding-circle":
        r_max = min(width, height) * 0.4
        r = 4.0 + _bounce(0.5 * a * t, 0, r_max - 4.0)
        p.disc(cx, cy, r, fg)
    elif spec.pattern == "static-square":
        side = max(8, int(width * 0.35))
        p.rect(cx - side / 2, cy - side / 2, side, side, fg)
    elif spec.pattern == "two-squares-converging":
        side = max(4, width // 6)
        gap = _bounce(height * 0.35 - a * t, side / 2, height * 0.35)
        p.rect(cx - side / 2, cy - gap - side, side, side, fg)
        p.rect(cx - side / 2, cy + gap, side, side, fg)
    elif spec.pattern == "jittering-cross":
        # diagonal (X-shaped) cross whose center jitters every frame
        jx, jy = state["jitter"][t]
        p.cross(cx + jx, cy + jy, min(width, height) * 0.3, 2.0, fg)
    elif spec.pattern == "blank-drift":
        p.canvas[:] = bg + 0.15 * math.sin(2 * math.pi * t / 48.0)
    else:
        raise ValueError(f"unknown pattern {spec.pattern!r}")
    return p.canvas


def synth_sequence(spec, frames, height, width, rng):
    """Frames of one synthetic sequence (list of GrayFrame)."""
    state = {
        "background": float(rng.uniform(0.05, 0.3)),
        "foreground": float(rng.uniform(0.7, 0.95)),
        "offset": tuple(float(v) for v in rng.integers(-3, 4, size=2)),
        "jitter": [tuple(float(v) for v in rng.integers(-2, 3, size=2) * spec.amplitude)
                   for _ in range(frames)],
    }
    out = []
    for t in range(frames):
        canvas = render_frame(spec, t, height, width, state)
        if spec.noise > 0:
            canvas = canvas + rng.normal(0.0, spec.noise, size=canvas.shape)
        out.append(GrayFrame(np.clip(canvas, 0.0, 1.0)))
    return out


def generate_synthetic(root, specs=DEFAULT_SPECS, sequences_per_class=10, frames=24,
                       dims=(64, 64), seed=0, observers=3):
    """Write a labelled synthetic corpus under ``root``; returns the labels CSV path.

    Each sequence is drawn from its own generator seeded by (seed, class,
    sequence), so output is byte-identical per seed in any generation order.
    """
    width, height = dims
    if width < 64 or height < 64:
        raise ValueError("synthetic frames must be at least 64x64")
    if frames < 24:
        raise ValueError("synthetic sequences need at least 24 frames")
    if len({s.pattern for s in specs}) != len(specs):
        raise ValueError("each class needs a distinct pattern")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    annotations = []
    number = 0
    for class_index, spec in enumerate(specs):
        for k in range(sequences_per_class):
            sequence_id = f"seq_{number:04d}"
            number += 1
            rng = np.random.default_rng([seed, class_index, k])
            seq_dir = root / sequence_id
            seq_dir.mkdir(exist_ok=True)
            for t, frame in enumerate(synth_sequence(spec, frames, height, width, rng)):
                save_frame(frame, seq_dir / f"frame_{t:05d}.pgm")
            annotations += [
                Annotation(sequence_id, EPISODE, f"obs{o + 1}", spec.label) for o in range(observers)
            ]
    labels_path = root / LABELS_FILE
    write_annotations(labels_path, annotations)
    return labels_path


def sequence_dirs(root):
    """Sequence directories of a corpus, sorted by name."""
    return sorted(p for p in Path(root).iterdir() if p.is_dir())
