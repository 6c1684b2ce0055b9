"""Synthetic video world and the two noisy backend oracles.

The world is a set of rigid shapes (rectangles and discs) translating over
a static background. Rendering produces, per frame, an RGB image, exact
ground-truth labels, and enough bookkeeping to recover the exact
displacement field between any two frames. Two oracles stand in for the
heavy backends:

  * ``seg_oracle``  — ground truth with a configurable fraction of pixels
    relabeled uniformly at random (the accurate/slow path);
  * ``flow_oracle`` — exact flow plus per-component Gaussian noise (the
    fast path's input).

Newly exposed background behind a moving shape cannot be recovered by
warping from an older frame, so low agreement between the two paths arises
naturally; nothing is hand-injected.
"""

from __future__ import annotations

import colorsys
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import FlowField, Image, LabelMap, RegionGeometry, crop
from .errors import SequenceError, ShapeError
from .rng import STREAM_SCENE, derived_rng
from .warp import WarpConfig, warp_labels

BACKGROUND_CLASS = 0


@dataclass(frozen=True)
class ObjectSpec:
    """One rigid shape: 'rect' with width/height or 'disc' with radius.

    (x, y) is the shape center at frame 0; (vx, vy) is the velocity in
    pixels/frame; ``jitter`` is the standard deviation of a per-frame
    Gaussian perturbation added to the velocity.
    """

    shape: str
    class_id: int
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0
    width: float = 0.0
    height: float = 0.0
    radius: float = 0.0
    jitter: float = 0.0

    def __post_init__(self):
        if self.shape not in ("rect", "disc"):
            raise ValueError(f"shape must be 'rect' or 'disc', got {self.shape!r}")
        if self.class_id < 1:
            raise ValueError("object class ids start at 1 (0 is background)")
        if self.shape == "rect" and (self.width <= 0 or self.height <= 0):
            raise ValueError("rect needs positive width and height")
        if self.shape == "disc" and self.radius <= 0:
            raise ValueError("disc needs a positive radius")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")


@dataclass(frozen=True)
class SceneSpec:
    frame_w: int
    frame_h: int
    num_classes: int
    objects: tuple[ObjectSpec, ...]
    sequence_length: int
    rng_seed: int
    # Uniform per-frame intensity offset in [-flicker, +flicker] applied to
    # every channel; photometric only, labels and flow are unaffected.
    flicker: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if self.num_classes < 2:
            raise ValueError("need at least background plus one class")
        if self.sequence_length < 2:
            raise ValueError("sequence_length must be >= 2")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")
        if not 0.0 <= self.flicker <= 0.1:
            raise ValueError("flicker amplitude must lie in [0, 0.1]")
        for obj in self.objects:
            if obj.class_id >= self.num_classes:
                raise ValueError(
                    f"object class {obj.class_id} >= num_classes {self.num_classes}"
                )


@dataclass(frozen=True)
class BackendSpec:
    """Accuracy and abstract per-pixel cost of the two backends."""

    seg_noise_rate: float = 0.02
    flow_noise_sigma: float = 0.5
    seg_cost: float = 10.0
    flow_cost: float = 1.0
    dn_cost: float = 0.2

    def __post_init__(self):
        if self.seg_noise_rate < 0 or self.flow_noise_sigma < 0:
            raise ValueError("noise parameters must be >= 0")
        if min(self.seg_cost, self.flow_cost, self.dn_cost) <= 0:
            raise ValueError("costs must be > 0")
        if self.seg_cost <= self.flow_cost:
            raise ValueError("seg_cost must exceed flow_cost")


@dataclass(frozen=True)
class FrameBundle:
    """One rendered frame plus the state needed for exact flow queries."""

    index: int
    image: Image
    truth_labels: LabelMap
    num_classes: int
    # topmost object index per pixel, -1 for background
    owner: np.ndarray = field(repr=False)
    # (num_objects, 2) object centers at this frame
    positions: np.ndarray = field(repr=False)

    def flow_from(self, key: "FrameBundle") -> FlowField:
        """Exact displacement field mapping frame ``key`` onto this frame.

        Defined on this frame's pixels: each pixel of an object carries the
        object's total displacement since ``key``; background carries zero.
        """
        h, w = self.truth_labels.height, self.truth_labels.width
        flow = np.zeros((h, w, 2), dtype=np.float64)
        if len(self.positions):
            delta = self.positions - key.positions
            mask = self.owner >= 0
            flow[mask] = delta[self.owner[mask]]
        return FlowField(flow)


def class_palette(num_classes: int) -> np.ndarray:
    """Deterministic distinct colors, kept inside [0.08, 0.9] so the flicker
    offset never clips."""
    colors = np.empty((num_classes, 3), dtype=np.float64)
    colors[0] = (0.18, 0.18, 0.20)
    for c in range(1, num_classes):
        hue = (0.61803398875 * (c - 1)) % 1.0
        colors[c] = colorsys.hsv_to_rgb(hue, 0.55, 0.75)
    return colors


def _rasterize(spec: SceneSpec, positions: np.ndarray):
    h, w = spec.frame_h, spec.frame_w
    labels = np.full((h, w), BACKGROUND_CLASS, dtype=np.int32)
    owner = np.full((h, w), -1, dtype=np.int64)
    xs = np.arange(w, dtype=np.float64)[None, :]
    ys = np.arange(h, dtype=np.float64)[:, None]
    for idx, obj in enumerate(spec.objects):
        cx, cy = positions[idx]
        if obj.shape == "rect":
            mask = (np.abs(xs - cx) <= obj.width / 2) & (
                np.abs(ys - cy) <= obj.height / 2
            )
        else:
            mask = (xs - cx) ** 2 + (ys - cy) ** 2 <= obj.radius**2
        labels[mask] = obj.class_id
        owner[mask] = idx
    return labels, owner


def render_sequence(spec: SceneSpec) -> list[FrameBundle]:
    """Render the scene; identical (spec, seed) gives bit-identical output."""
    rng = derived_rng(spec.rng_seed, STREAM_SCENE)
    n_obj = len(spec.objects)
    palette = class_palette(spec.num_classes)

    positions = np.zeros((spec.sequence_length, n_obj, 2), dtype=np.float64)
    for idx, obj in enumerate(spec.objects):
        positions[0, idx] = (obj.x, obj.y)
    for t in range(1, spec.sequence_length):
        for idx, obj in enumerate(spec.objects):
            step = np.array([obj.vx, obj.vy], dtype=np.float64)
            step += rng.normal(0.0, obj.jitter, size=2) if obj.jitter > 0 else 0.0
            positions[t, idx] = positions[t - 1, idx] + step

    flick = np.zeros(spec.sequence_length, dtype=np.float64)
    if spec.flicker > 0:
        flick = rng.uniform(-spec.flicker, spec.flicker, size=spec.sequence_length)

    bundles = []
    for t in range(spec.sequence_length):
        labels, owner = _rasterize(spec, positions[t])
        img = palette[labels] + flick[t]
        bundles.append(
            FrameBundle(
                index=t,
                image=Image(np.clip(img, 0.0, 1.0)),
                truth_labels=LabelMap(labels),
                num_classes=spec.num_classes,
                owner=owner,
                positions=positions[t].copy(),
            )
        )
    return bundles


def seg_oracle(
    region_img: Image,
    truth: LabelMap,
    backend: BackendSpec,
    num_classes: int,
    rng: np.random.Generator,
) -> LabelMap:
    """Segmentation-path stand-in: truth with a fraction of pixels relabeled.

    Relabeled pixels draw uniformly over all classes (they may keep their
    original id by chance), so agreement with truth at noise rate r is
    1 - r + r/num_classes in expectation.
    """
    if (region_img.height, region_img.width) != (truth.height, truth.width):
        raise ShapeError(
            f"image {region_img.width}x{region_img.height} vs truth "
            f"{truth.width}x{truth.height}"
        )
    out = truth.data.copy()
    if backend.seg_noise_rate > 0:
        hit = rng.random(out.shape) < backend.seg_noise_rate
        n_hit = int(np.count_nonzero(hit))
        if n_hit:
            out[hit] = rng.integers(0, num_classes, size=n_hit, dtype=np.int32)
    return LabelMap(out)


def true_region_flow(
    bundles: Sequence[FrameBundle],
    key_idx: int,
    cur_idx: int,
    geom: RegionGeometry,
) -> FlowField:
    """Exact key-to-current flow restricted to one region."""
    _check_indices(bundles, key_idx, cur_idx)
    return crop(bundles[cur_idx].flow_from(bundles[key_idx]), geom)


def flow_oracle(
    key_idx: int,
    cur_idx: int,
    bundles: Sequence[FrameBundle],
    region_geom: RegionGeometry,
    backend: BackendSpec,
    rng: np.random.Generator,
) -> FlowField:
    """Flow-path stand-in: exact region flow plus i.i.d. Gaussian noise."""
    exact = true_region_flow(bundles, key_idx, cur_idx, region_geom)
    if backend.flow_noise_sigma == 0:
        return exact
    noise = rng.normal(0.0, backend.flow_noise_sigma, size=exact.data.shape)
    return FlowField(exact.data.astype(np.float64) + noise)


def disocclusion_fraction(
    bundles: Sequence[FrameBundle], key_idx: int, cur_idx: int
) -> float:
    """Fraction of pixels exact warping cannot reproduce from ``key_idx``.

    With noise-free backends this is the entire warp-path error: pixels
    uncovered (or newly occluded) between the two frames.
    """
    _check_indices(bundles, key_idx, cur_idx)
    flow = bundles[cur_idx].flow_from(bundles[key_idx])
    warped = warp_labels(bundles[key_idx].truth_labels, flow, WarpConfig())
    mismatch = warped.data != bundles[cur_idx].truth_labels.data
    return float(np.count_nonzero(mismatch)) / mismatch.size


def _check_indices(bundles: Sequence[FrameBundle], key_idx: int, cur_idx: int) -> None:
    if not 0 <= key_idx < cur_idx < len(bundles):
        raise SequenceError(
            f"need 0 <= key < cur < {len(bundles)}, got key={key_idx} cur={cur_idx}"
        )
