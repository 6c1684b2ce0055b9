"""Frame division into overlapping regions and core-ownership stitching.

A division scheme cuts the frame into a rows x cols grid of core tiles
(the last row/column absorbs any remainder). Each region is its core tile
expanded by ``overlap_depth`` pixels on every side and clamped to the
frame, so only interior edges actually grow. Cores tile the frame exactly;
stitching reads every output pixel from the region whose core owns it,
which makes crop-then-stitch an exact round trip at any overlap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import LabelMap, Rect, RegionGeometry
from .errors import CompletenessError, ConfigError, ShapeError

SCHEME_GRID = {
    "original": (1, 1),
    "half": (1, 2),
    "2x2": (2, 2),
    "3x3": (3, 3),
    "4x4": (4, 4),
}


@dataclass(frozen=True)
class DivisionScheme:
    name: str
    rows: int
    cols: int
    overlap_depth: int

    def __post_init__(self):
        grid = SCHEME_GRID.get(self.name)
        if grid is None:
            raise ConfigError(
                f"unknown division scheme {self.name!r}; "
                f"choose from {sorted(SCHEME_GRID)}"
            )
        if (self.rows, self.cols) != grid:
            raise ConfigError(
                f"scheme {self.name!r} must be {grid[0]}x{grid[1]}, "
                f"got {self.rows}x{self.cols}"
            )
        if self.overlap_depth < 0:
            raise ConfigError(f"overlap must be >= 0, got {self.overlap_depth}")

    @classmethod
    def from_name(cls, name: str, overlap: int = 0) -> "DivisionScheme":
        key = name.lower()
        if key not in SCHEME_GRID:
            raise ConfigError(
                f"unknown division scheme {name!r}; choose from {sorted(SCHEME_GRID)}"
            )
        rows, cols = SCHEME_GRID[key]
        return cls(key, rows, cols, overlap)

    @property
    def num_regions(self) -> int:
        return self.rows * self.cols


def _cuts(length: int, parts: int) -> list[int]:
    # Even split; the final part absorbs the remainder.
    base = length // parts
    edges = [i * base for i in range(parts)]
    edges.append(length)
    return edges


def make_regions(
    scheme: DivisionScheme, frame_w: int, frame_h: int
) -> list[RegionGeometry]:
    """Region geometries for a frame, row-major order."""
    if frame_w < scheme.cols or frame_h < scheme.rows:
        raise ConfigError(
            f"{frame_w}x{frame_h} frame too small for {scheme.name} division"
        )
    xs = _cuts(frame_w, scheme.cols)
    ys = _cuts(frame_h, scheme.rows)
    d = scheme.overlap_depth
    regions = []
    for r in range(scheme.rows):
        for c in range(scheme.cols):
            core = Rect(xs[c], ys[r], xs[c + 1] - xs[c], ys[r + 1] - ys[r])
            x0 = max(0, core.x - d)
            y0 = max(0, core.y - d)
            x1 = min(frame_w, core.x1 + d)
            y1 = min(frame_h, core.y1 + d)
            regions.append(RegionGeometry(x0, y0, x1 - x0, y1 - y0, core))
    small = min(min(g.width, g.height) for g in regions)
    if d >= small and d > 0:
        raise ConfigError(
            f"overlap {d} is not smaller than the smallest region "
            f"dimension {small}"
        )
    return regions


def stitch(regions: Sequence[tuple[RegionGeometry, LabelMap]]) -> LabelMap:
    """Recompose per-region label maps into one frame by core ownership."""
    if not regions:
        raise CompletenessError("stitch received no regions")
    frame_w = max(g.core.x1 for g, _ in regions)
    frame_h = max(g.core.y1 for g, _ in regions)
    out = np.full((frame_h, frame_w), -1, dtype=np.int32)
    for geom, labels in regions:
        if (labels.height, labels.width) != (geom.height, geom.width):
            raise ShapeError(
                f"region map is {labels.width}x{labels.height}, geometry "
                f"wants {geom.width}x{geom.height}"
            )
        core = geom.core
        ly = core.y - geom.origin_y
        lx = core.x - geom.origin_x
        out[core.y : core.y1, core.x : core.x1] = labels.data[
            ly : ly + core.h, lx : lx + core.w
        ]
    if (out < 0).any():
        raise CompletenessError("stitch: core tiles do not cover the frame")
    return LabelMap(out)
