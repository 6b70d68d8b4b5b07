"""Run configuration: every experimental constant in one place."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional

from .edges import EdgeParams
from .gridfeat import REFERENCE_FRAMES, GridSpec
from .select import CLASS_ENCODINGS
from .svm import KernelParams


@dataclass(frozen=True)
class RunConfig:
    grid: int = 20
    divisions: int = 5
    n_spacing: Optional[int] = None
    edge_threshold: float = 0.4
    low_ratio: float = 0.5
    sigma: float = 1.4
    window: int = 8
    stride: Optional[int] = None
    keep_every: int = 3
    reference: str = "first"
    slack_c: float = 0.4
    gamma: Optional[float] = None
    folds: int = 10
    train_fraction: float = 0.7
    max_stale: int = 5
    class_encoding: str = "indicator"
    source_fps: float = 24.0
    seed: int = 0

    def __post_init__(self):
        # Construct the owning types so out-of-range values fail early.
        self.edge_params()
        self.grid_spec()
        self.kernel_params()
        if self.window < 2:
            raise ValueError("window must be >= 2")
        if self.stride is not None and self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.keep_every < 1:
            raise ValueError("keep_every must be >= 1")
        if self.reference not in REFERENCE_FRAMES:
            raise ValueError(f"reference must be one of {REFERENCE_FRAMES}")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.class_encoding not in CLASS_ENCODINGS:
            raise ValueError(f"class_encoding must be one of {CLASS_ENCODINGS}")
        if self.max_stale < 1:
            raise ValueError("max_stale must be >= 1")

    def edge_params(self):
        return EdgeParams(self.edge_threshold, self.low_ratio, self.sigma)

    def grid_spec(self):
        return GridSpec(self.grid, self.divisions, self.n_spacing)

    def kernel_params(self):
        return KernelParams(self.gamma, self.slack_c)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}
