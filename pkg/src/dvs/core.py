"""Grid primitives: images, label maps, flow fields, region geometry.

Conventions used everywhere in the package:
  * row-major storage, origin at the top-left, y grows downward;
  * flow components are (u, v) = (+x rightward, +y downward) displacements
    measured in pixels;
  * intensities are float32 in [0, 1] (not 8-bit), so interpolation in
    tests stays exact;
  * grids are immutable after construction and safe to share between
    workers; every operation here is a pure function.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import BoundsError, ShapeError

# ITU-R BT.601 luma weights.
GRAY_WEIGHTS = (0.299, 0.587, 0.114)

GRID_MAGIC = b"DVSG"
_HEADER = struct.Struct("<4sIII")  # magic, width, height, channels


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Image:
    """Intensity grid of shape (height, width, channels), channels 1 or 3."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float32)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ShapeError(f"image must be (h, w, 1|3), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("image intensities must lie in [0, 1]")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel class ids, shape (height, width), ids >= 0."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data)
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("label data must be integer-typed")
        arr = arr.astype(np.int32)
        if arr.ndim != 2:
            raise ShapeError(f"label map must be 2-D, got shape {arr.shape}")
        if arr.size and arr.min() < 0:
            raise ValueError("label ids must be non-negative")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class FlowField:
    """Per-pixel (u, v) displacements, shape (height, width, 2)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float32)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise ShapeError(f"flow field must be (h, w, 2), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("flow field contains non-finite values")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def u(self) -> np.ndarray:
        return self.data[:, :, 0]

    @property
    def v(self) -> np.ndarray:
        return self.data[:, :, 1]


Grid = Union[Image, LabelMap, FlowField]


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in frame coordinates."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"rectangle must have positive size, got {self}")

    @property
    def x1(self) -> int:
        return self.x + self.w

    @property
    def y1(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def contains(self, other: "Rect") -> bool:
        return (
            self.x <= other.x
            and self.y <= other.y
            and other.x1 <= self.x1
            and other.y1 <= self.y1
        )


@dataclass(frozen=True)
class RegionGeometry:
    """One frame region: its rectangle plus the core it exclusively owns.

    ``core`` is expressed in frame coordinates and must lie inside the
    region rectangle; over a full division scheme the cores tile the frame
    exactly, which is what makes stitching unambiguous.
    """

    origin_x: int
    origin_y: int
    width: int
    height: int
    core: Rect

    def __post_init__(self):
        rect = self.rect
        if not rect.contains(self.core):
            raise BoundsError(f"core {self.core} not inside region {rect}")

    @property
    def rect(self) -> Rect:
        return Rect(self.origin_x, self.origin_y, self.width, self.height)

    @property
    def pixels(self) -> int:
        return self.width * self.height


def crop(frame: Grid, geom: RegionGeometry) -> Grid:
    """Extract the region of ``frame`` covered by ``geom`` (same grid kind)."""
    if (
        geom.origin_x < 0
        or geom.origin_y < 0
        or geom.origin_x + geom.width > frame.width
        or geom.origin_y + geom.height > frame.height
    ):
        raise BoundsError(
            f"region {geom.rect} outside {frame.width}x{frame.height} frame"
        )
    sl = frame.data[
        geom.origin_y : geom.origin_y + geom.height,
        geom.origin_x : geom.origin_x + geom.width,
    ]
    return type(frame)(sl)


def embed(frame: Grid, patch: Grid, geom: RegionGeometry) -> Grid:
    """Return ``frame`` with ``patch`` written back at ``geom``'s origin."""
    if type(patch) is not type(frame):
        raise ShapeError(
            f"cannot embed {type(patch).__name__} into {type(frame).__name__}"
        )
    if (patch.height, patch.width) != (geom.height, geom.width):
        raise ShapeError(
            f"patch is {patch.width}x{patch.height}, geometry wants "
            f"{geom.width}x{geom.height}"
        )
    if (
        geom.origin_x < 0
        or geom.origin_y < 0
        or geom.origin_x + geom.width > frame.width
        or geom.origin_y + geom.height > frame.height
    ):
        raise BoundsError(
            f"region {geom.rect} outside {frame.width}x{frame.height} frame"
        )
    out = frame.data.copy()
    out[
        geom.origin_y : geom.origin_y + geom.height,
        geom.origin_x : geom.origin_x + geom.width,
    ] = patch.data
    return type(frame)(out)


def to_grayscale(img: Image) -> Image:
    """Collapse a color image to one channel with BT.601 weights.

    Idempotent: 1-channel input is returned unchanged.
    """
    if img.channels == 1:
        return img
    r, g, b = GRAY_WEIGHTS
    gray = (
        r * img.data[:, :, 0].astype(np.float64)
        + g * img.data[:, :, 1].astype(np.float64)
        + b * img.data[:, :, 2].astype(np.float64)
    )
    return Image(np.clip(gray, 0.0, 1.0)[:, :, None])


# ---------------------------------------------------------------------------
# Grid container: magic "DVSG", u32 width, u32 height, u32 channels, then a
# little-endian f32 payload in row-major order. Labels are stored as their
# exact float values (ids are far below 2**24, so the round trip is lossless).
# ---------------------------------------------------------------------------


def _payload(grid: Grid) -> np.ndarray:
    if isinstance(grid, LabelMap):
        return grid.data.astype(np.float32)[:, :, None]
    return grid.data


def write_grid(grid: Grid, path) -> None:
    arr = _payload(grid)
    h, w, c = arr.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(GRID_MAGIC, w, h, c))
        f.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def _read_payload(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated grid file")
    magic, w, h, c = _HEADER.unpack_from(raw)
    if magic != GRID_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    expect = _HEADER.size + 4 * w * h * c
    if len(raw) != expect:
        raise ValueError(f"{path}: expected {expect} bytes, got {len(raw)}")
    flat = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    return flat.reshape(h, w, c).astype(np.float32)


def read_image(path) -> Image:
    return Image(_read_payload(path))


def read_labels(path) -> LabelMap:
    arr = _read_payload(path)[:, :, 0]
    ids = np.rint(arr).astype(np.int32)
    if not np.array_equal(ids.astype(np.float32), arr):
        raise ValueError(f"{path}: payload is not an integer label map")
    return LabelMap(ids)


def read_flow(path) -> FlowField:
    arr = _read_payload(path)
    if arr.shape[2] != 2:
        raise ShapeError(f"{path}: flow file must have 2 channels, got {arr.shape[2]}")
    return FlowField(arr)
