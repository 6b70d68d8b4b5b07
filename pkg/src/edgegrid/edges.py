"""Canny edge detection driven by a single normalized threshold.

The threshold ``t`` is applied to the gradient magnitude after it has been
divided by its global maximum, so ``t`` is scale-free. Hysteresis uses
``t`` as the strong threshold and ``t * low_ratio`` as the weak one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionError
from .imaging import GrayFrame, write_pgm

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T
GRADIENT_FLOOR = 1e-9

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class EdgeMap:
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=bool, copy=True)
        if data.ndim != 2:
            raise DimensionError("edge map must be 2-D")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def count(self):
        return int(self.data.sum())

    def __eq__(self, other):
        if not isinstance(other, EdgeMap):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True)
class EdgeParams:
    threshold_t: float = 0.4
    low_ratio: float = 0.5
    gaussian_sigma: float = 1.4

    def __post_init__(self):
        if not 0.0 < self.threshold_t < 1.0:
            raise ValueError(f"threshold_t must lie in (0, 1), got {self.threshold_t}")
        if not 0.0 < self.low_ratio <= 1.0:
            raise ValueError(f"low_ratio must lie in (0, 1], got {self.low_ratio}")
        if self.gaussian_sigma <= 0:
            raise ValueError("gaussian_sigma must be positive")


def gaussian_kernel(sigma):
    """Normalized 1-D Gaussian of radius ceil(3 * sigma)."""
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def _convolve_axis(image, kernel, axis):
    radius = len(kernel) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(image, pad, mode="edge")
    out = np.zeros_like(image)
    n = image.shape[axis]
    for offset, weight in enumerate(kernel):
        if axis == 0:
            out += weight * padded[offset : offset + n, :]
        else:
            out += weight * padded[:, offset : offset + n]
    return out


def gaussian_blur(frame, sigma=1.4):
    """Separable Gaussian smoothing with clamp-to-edge borders."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    kernel = gaussian_kernel(sigma)
    blurred = _convolve_axis(_convolve_axis(frame.data, kernel, 0), kernel, 1)
    return GrayFrame(np.clip(blurred, 0.0, 1.0))


def _correlate3(image, kernel):
    padded = np.pad(image, 1, mode="edge")
    h, w = image.shape
    out = np.zeros((h, w))
    for dy in range(3):
        for dx in range(3):
            if kernel[dy, dx]:
                out += kernel[dy, dx] * padded[dy : dy + h, dx : dx + w]
    return out


def gradients(frame):
    """Sobel gradient magnitude (max-normalized to [0, 1]) and direction in (-pi, pi].

    x grows to the right and y grows downward, so ``direction = atan2(gy, gx)``
    is 0 across a dark-to-bright vertical step.
    """
    image = frame.data if isinstance(frame, GrayFrame) else np.asarray(frame, dtype=np.float64)
    if image.shape[0] < 3 or image.shape[1] < 3:
        raise DimensionError(f"gradients need a frame of at least 3x3, got {image.shape}")
    gx = _correlate3(image, SOBEL_X)
    gy = _correlate3(image, SOBEL_Y)
    magnitude = np.hypot(gx, gy)
    # Floating-point residue (e.g. blurring a constant frame) is not a gradient;
    # left in, max-normalization would inflate it to full strength.
    magnitude[magnitude < GRADIENT_FLOOR] = 0.0
    peak = magnitude.max()
    if peak > 0:
        # Quantized so mirror-symmetric ridges tie exactly instead of by rounding noise.
        magnitude = np.round(magnitude / peak, 12)
    direction = np.arctan2(gy, gx)
    direction[direction <= -math.pi] = math.pi
    return magnitude, direction


# (dy, dx) of the forward neighbour for each quantized gradient direction.
_SECTOR_OFFSETS = ((0, 1), (1, 1), (1, 0), (1, -1))


def quantize_direction(direction):
    """Map angles to sectors 0..3 (0, 45, 90, 135 degrees), modulo pi."""
    degrees = np.degrees(np.mod(direction, math.pi))
    return (np.floor((degrees + 22.5) / 45.0).astype(int)) % 4


def non_max_suppression(magnitude, direction):
    """Keep pixels whose magnitude is >= both neighbours along the quantized gradient."""
    magnitude = np.asarray(magnitude, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    if magnitude.shape != direction.shape:
        raise DimensionError("magnitude and direction must share a shape")
    h, w = magnitude.shape
    # Out-of-bounds neighbours are padded with -inf so they never suppress.
    padded = np.pad(magnitude, 1, mode="constant", constant_values=-np.inf)
    sector = quantize_direction(direction)
    keep = np.zeros((h, w), dtype=bool)
    for index, (dy, dx) in enumerate(_SECTOR_OFFSETS):
        forward = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        backward = padded[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w]
        keep |= (sector == index) & (magnitude >= forward) & (magnitude >= backward)
    return np.where(keep, magnitude, 0.0)


def hysteresis(suppressed, params):
    """Strong pixels plus weak pixels 8-connected to a strong pixel."""
    suppressed = np.asarray(suppressed, dtype=np.float64)
    strong = suppressed >= params.threshold_t
    weak = suppressed >= params.threshold_t * params.low_ratio
    # Zero is never an edge, even when the weak threshold underflows.
    weak &= suppressed > 0
    strong &= weak
    labels, count = ndimage.label(weak, structure=_EIGHT_CONNECTED)
    if count == 0:
        return EdgeMap(np.zeros_like(weak))
    seeded = np.zeros(count + 1, dtype=bool)
    seeded[np.unique(labels[strong])] = True
    seeded[0] = False
    return EdgeMap(seeded[labels])


def canny(frame, params):
    """blur -> Sobel gradients -> non-maximum suppression -> hysteresis."""
    if frame.height < 3 or frame.width < 3:
        raise DimensionError("canny needs a frame of at least 3x3")
    blurred = gaussian_blur(frame, params.gaussian_sigma)
    magnitude, direction = gradients(blurred)
    return hysteresis(non_max_suppression(magnitude, direction), params)


def save_edge_map(edges, path):
    """Debug dump: edge pixels 255, background 0."""
    write_pgm(path, np.where(edges.data, 255, 0))
