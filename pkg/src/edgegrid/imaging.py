"""Frame I/O, grayscale normalization, temporal down-sampling and windowing."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, FormatError

# ITU BT.601 luma weights.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def _frozen(array, dtype):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GrayFrame:
    """Grayscale raster with intensities in [0, 1], stored as a (height, width) array."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] == 0:
            raise DimensionError(f"frame must be a non-empty 2-D raster, got shape {data.shape}")
        if not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("frame intensities must lie in [0, 1]")
        object.__setattr__(self, "data", _frozen(data, np.float64))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    def __eq__(self, other):
        if not isinstance(other, GrayFrame):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True)
class FrameSequence:
    frames: tuple
    source_fps: float = 24.0

    def __post_init__(self):
        frames = tuple(self.frames)
        if self.source_fps <= 0:
            raise ValueError("source_fps must be positive")
        if frames:
            shape = frames[0].data.shape
            for frame in frames[1:]:
                if frame.data.shape != shape:
                    raise DimensionError("all frames in a sequence must share dimensions")
        object.__setattr__(self, "frames", frames)

    def __len__(self):
        return len(self.frames)


@dataclass(frozen=True)
class Window:
    frames: tuple
    sequence_id: str = ""
    start_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))

    def __len__(self):
        return len(self.frames)


def _read_token(buf, pos):
    # PGM headers allow '#' comments between tokens.
    n = len(buf)
    while pos < n:
        if buf[pos : pos + 1].isspace():
            pos += 1
        elif buf[pos : pos + 1] == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise FormatError("truncated PGM header")
    return buf[start:pos], pos


def read_pgm(path):
    """Read a binary (P5) PGM file into a uint8 or uint16 array."""
    buf = Path(path).read_bytes()
    if buf[:2] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (P5) file")
    pos = 2
    values = []
    for _ in range(3):
        token, pos = _read_token(buf, pos)
        if not token.isdigit():
            raise FormatError(f"{path}: malformed PGM header")
        values.append(int(token))
    width, height, maxval = values
    if width == 0 or height == 0:
        raise FormatError(f"{path}: zero-dimension image")
    if not 0 < maxval < 65536:
        raise FormatError(f"{path}: invalid maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    count = width * height
    body = buf[pos : pos + count * dtype.itemsize]
    if len(body) != count * dtype.itemsize:
        raise FormatError(f"{path}: truncated PGM pixel data")
    return np.frombuffer(body, dtype=dtype).reshape(height, width), maxval


def write_pgm(path, pixels):
    pixels = np.asarray(pixels, dtype=np.uint8)
    height, width = pixels.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(np.ascontiguousarray(pixels).tobytes())


def _to_gray(pixels, maxval):
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim == 3:
        if pixels.shape[2] == 4:
            pixels = pixels[..., :3]
        if pixels.shape[2] == 3:
            pixels = pixels @ LUMA_WEIGHTS
        elif pixels.shape[2] == 1:
            pixels = pixels[..., 0]
        else:
            raise FormatError(f"unsupported channel count {pixels.shape[2]}")
    if pixels.ndim != 2 or 0 in pixels.shape:
        raise FormatError("zero-dimension or malformed image")
    return np.clip(pixels / maxval, 0.0, 1.0)


def load_frame(path):
    """Load a PGM (P5) or PNG raster as a GrayFrame.

    Intensities are mapped linearly from the source bit depth to [0, 1].
    Color images are first reduced to BT.601 luma.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    with open(path, "rb") as fh:
        magic = fh.read(8)
    if magic[:2] == b"P5":
        pixels, maxval = read_pgm(path)
        return GrayFrame(_to_gray(pixels, maxval))
    if magic == b"\x89PNG\r\n\x1a\n":
        from PIL import Image

        with Image.open(path) as img:
            if img.mode in ("I;16", "I;16B", "I"):
                pixels, maxval = np.asarray(img), 65535
            elif img.mode in ("L", "RGB", "RGBA"):
                pixels, maxval = np.asarray(img), 255
            elif img.mode in ("LA", "P", "1"):
                pixels, maxval = np.asarray(img.convert("RGB")), 255
            else:
                raise FormatError(f"{path}: unsupported PNG mode {img.mode}")
        return GrayFrame(_to_gray(pixels, maxval))
    raise FormatError(f"{path}: unsupported raster format")


def save_frame(frame, path):
    """Write a frame as 8-bit P5 PGM (intensities rounded to the nearest level)."""
    write_pgm(path, np.rint(frame.data * 255.0))


def _frame_paths(directory):
    names = sorted(
        name
        for name in os.listdir(directory)
        if re.search(r"\.(pgm|png)$", name, flags=re.IGNORECASE)
    )
    return [Path(directory) / name for name in names]


def load_sequence(directory, source_fps=24.0):
    """Load every PGM/PNG frame of a directory, in lexicographic filename order."""
    return FrameSequence(tuple(load_frame(p) for p in _frame_paths(directory)), source_fps)


def downsample(seq, keep_every):
    """Keep frames 0, keep_every, 2*keep_every, ... and divide the frame rate accordingly."""
    if keep_every < 1:
        raise ValueError("keep_every must be >= 1")
    return FrameSequence(seq.frames[::keep_every], seq.source_fps / keep_every)


def window_count(length, w, stride):
    return max(0, (length - w) // stride + 1)


def windows(seq, w=8, stride=None, sequence_id=""):
    """Split a sequence into consecutive windows of exactly ``w`` frames.

    ``stride`` defaults to ``w`` (non-overlapping). Trailing frames that do not
    fill a whole window are dropped.
    """
    if w < 2:
        raise ValueError("window length must be >= 2")
    stride = w if stride is None else stride
    if stride < 1:
        raise ValueError("stride must be >= 1")
    frames = seq.frames
    return [
        Window(frames[start : start + w], sequence_id, start)
        for start in range(0, window_count(len(frames), w, stride) * stride, stride)
    ]
