"""Backward warping of labels and images along a flow field.

Every output pixel p = (x, y) samples the source grid at (x - u_p, y - v_p):
inverse mapping, so the output has no holes. Labels are categorical, so the
default sampler snaps the source position to the nearest pixel; the
alternative weights the four neighbours' one-hot label vectors bilinearly
and takes the argmax (ties break toward the smallest class id), mirroring
how feature-map warping behaves. Image warping always interpolates
bilinearly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FlowField, Image, LabelMap
from .errors import ConfigError, ShapeError

SAMPLING_MODES = ("nearest_label", "onehot_bilinear_argmax")
OOB_MODES = ("clamp", "keep_source")


@dataclass(frozen=True)
class WarpConfig:
    sampling: str = "nearest_label"
    out_of_bounds: str = "clamp"

    def __post_init__(self):
        if self.sampling not in SAMPLING_MODES:
            raise ConfigError(
                f"sampling must be one of {SAMPLING_MODES}, got {self.sampling!r}"
            )
        if self.out_of_bounds not in OOB_MODES:
            raise ConfigError(
                f"out_of_bounds must be one of {OOB_MODES}, got {self.out_of_bounds!r}"
            )


def _source_positions(flow: FlowField):
    h, w = flow.height, flow.width
    xs = np.arange(w, dtype=np.float64)[None, :]
    ys = np.arange(h, dtype=np.float64)[:, None]
    sx = xs - flow.u.astype(np.float64)
    sy = ys - flow.v.astype(np.float64)
    outside = (sx < 0.0) | (sx > w - 1.0) | (sy < 0.0) | (sy > h - 1.0)
    return sx, sy, outside


def warp_labels(key_seg: LabelMap, flow: FlowField, cfg: WarpConfig = WarpConfig()) -> LabelMap:
    """Propagate key-frame labels to the current frame along ``flow``."""
    if (key_seg.height, key_seg.width) != (flow.height, flow.width):
        raise ShapeError(
            f"labels {key_seg.width}x{key_seg.height} vs flow "
            f"{flow.width}x{flow.height}"
        )
    h, w = key_seg.height, key_seg.width
    sx, sy, outside = _source_positions(flow)
    src = key_seg.data

    if cfg.sampling == "nearest_label":
        # round-half-up keeps the result platform-independent
        ix = np.clip(np.floor(sx + 0.5).astype(np.int64), 0, w - 1)
        iy = np.clip(np.floor(sy + 0.5).astype(np.int64), 0, h - 1)
        out = src[iy, ix]
    else:
        cx = np.clip(sx, 0.0, w - 1.0)
        cy = np.clip(sy, 0.0, h - 1.0)
        x0 = np.floor(cx).astype(np.int64)
        y0 = np.floor(cy).astype(np.int64)
        x1 = np.minimum(x0 + 1, w - 1)
        y1 = np.minimum(y0 + 1, h - 1)
        fx = cx - x0
        fy = cy - y0
        num_classes = int(src.max()) + 1
        scores = np.zeros((h * w, num_classes), dtype=np.float64)
        rows = np.arange(h * w)
        for yy, xx, wgt in (
            (y0, x0, (1 - fx) * (1 - fy)),
            (y0, x1, fx * (1 - fy)),
            (y1, x0, (1 - fx) * fy),
            (y1, x1, fx * fy),
        ):
            np.add.at(scores, (rows, src[yy, xx].ravel()), wgt.ravel())
        # argmax returns the first maximum, i.e. the smallest class id on ties
        out = np.argmax(scores, axis=1).astype(np.int32).reshape(h, w)

    if cfg.out_of_bounds == "keep_source":
        out = np.where(outside, src, out)
    return LabelMap(out)


def warp_image(key_img: Image, flow: FlowField) -> Image:
    """Backward bilinear warp of intensities, border samples clamped."""
    if (key_img.height, key_img.width) != (flow.height, flow.width):
        raise ShapeError(
            f"image {key_img.width}x{key_img.height} vs flow "
            f"{flow.width}x{flow.height}"
        )
    h, w = key_img.height, key_img.width
    sx, sy, _ = _source_positions(flow)
    warped = _bilinear(key_img.data.astype(np.float64), sx, sy)
    return Image(np.clip(warped, 0.0, 1.0))


def _bilinear(data: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    """Sample (h, w, c) data at clamped float positions."""
    h, w = data.shape[:2]
    cx = np.clip(sx, 0.0, w - 1.0)
    cy = np.clip(sy, 0.0, h - 1.0)
    x0 = np.floor(cx).astype(np.int64)
    y0 = np.floor(cy).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (cx - x0)[..., None]
    fy = (cy - y0)[..., None]
    top = data[y0, x0] * (1 - fx) + data[y0, x1] * fx
    bot = data[y1, x0] * (1 - fx) + data[y1, x1] * fx
    return top * (1 - fy) + bot * fy


def compose_flow(first: FlowField, second: FlowField) -> FlowField:
    """Flow equivalent to warping by ``first`` and then by ``second``.

    Composition samples ``first`` bilinearly at the positions ``second``
    points to, so it is exact for uniform fields and approximate elsewhere.
    """
    if (first.height, first.width) != (second.height, second.width):
        raise ShapeError("flow fields must share dimensions to compose")
    sx, sy, _ = _source_positions(second)
    pulled = _bilinear(first.data.astype(np.float64), sx, sy)
    return FlowField(pulled + second.data.astype(np.float64))
