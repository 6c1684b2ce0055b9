"""Per-region key-frame scheduling policies and region state.

Each region carries its own key frame (image plus segmentation) and is
scheduled independently. Every policy reduces to a threshold test on one
scalar:

  * ``Fixed(period)``            — refresh on a clock, content-blind;
  * ``AdaptiveConfidence(t, dn)``— refresh when the decision network's
    predicted agreement score is not above t;
  * ``FrameDiff(d)``             — refresh when the grayscale difference
    between key and current exceeds d;
  * ``FlowMag(f)``               — refresh when the mean flow magnitude
    exceeds f;
  * ``OracleConfidence(t)``      — like AdaptiveConfidence but thresholds
    the true agreement score, which requires running both paths. Test-only
    upper bound; never part of throughput claims.

``decide`` is pure (state in, decision out); only ``apply_decision``
produces a new state. The first frame of every region is always handled by
the segmentation path, which is what creates the initial state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

from .core import FlowField, Image, LabelMap
from .dn import Regressor, extract_features, predict
from .errors import ConfigError, LifecycleError, ShapeError
from .metrics import flow_magnitude, frame_difference


class Decision(enum.Enum):
    SEG = "seg"
    WARP = "warp"


@dataclass(frozen=True)
class Fixed:
    period: int

    def __post_init__(self):
        if self.period < 1:
            raise ConfigError(f"fixed period must be >= 1, got {self.period}")


@dataclass(frozen=True)
class AdaptiveConfidence:
    threshold: float
    dn: Regressor

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must be in [0, 1], got {self.threshold}")


@dataclass(frozen=True)
class FrameDiff:
    threshold: float

    def __post_init__(self):
        if self.threshold < 0.0:
            raise ConfigError(f"frame-difference threshold must be >= 0, got {self.threshold}")


@dataclass(frozen=True)
class FlowMag:
    threshold: float

    def __post_init__(self):
        if self.threshold < 0.0:
            raise ConfigError(f"flow-magnitude threshold must be >= 0, got {self.threshold}")


@dataclass(frozen=True)
class OracleConfidence:
    threshold: float

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must be in [0, 1], got {self.threshold}")


Policy = Union[Fixed, AdaptiveConfidence, FrameDiff, FlowMag, OracleConfidence]


def policy_label(policy: Policy) -> tuple[str, float]:
    """(name, parameter) pair used in reports and CSV output."""
    if isinstance(policy, Fixed):
        return "fixed", float(policy.period)
    if isinstance(policy, AdaptiveConfidence):
        return "confidence", policy.threshold
    if isinstance(policy, FrameDiff):
        return "framediff", policy.threshold
    if isinstance(policy, FlowMag):
        return "flowmag", policy.threshold
    if isinstance(policy, OracleConfidence):
        return "oracle", policy.threshold
    raise ConfigError(f"unknown policy {policy!r}")


@dataclass(frozen=True)
class RegionState:
    """Scheduler memory for one region."""

    key_image: Image
    key_seg: LabelMap
    age: int
    last_decision: Decision

    def __post_init__(self):
        if (self.key_image.height, self.key_image.width) != (
            self.key_seg.height,
            self.key_seg.width,
        ):
            raise ShapeError("key image and key segmentation sizes disagree")
        if self.age < 0:
            raise LifecycleError(f"age must be >= 0, got {self.age}")


def initial_state(key_image: Image, key_seg: LabelMap) -> RegionState:
    """State after the forced segmentation of a region's first frame."""
    return RegionState(key_image, key_seg, age=0, last_decision=Decision.SEG)


def decide(
    policy: Policy,
    state: RegionState,
    cur_img: Image,
    flow: FlowField,
    true_score: float | None = None,
) -> tuple[Decision, float]:
    """Route one region and report the scalar the routing was based on.

    The region takes the spatial warping path only when its score clears
    the policy's threshold strictly; equality falls back to segmentation.
    ``true_score`` must be supplied for OracleConfidence (both paths have
    to be run to know it) and is ignored otherwise.
    """
    if state is None:
        raise LifecycleError("decide called before the region was initialized")
    if isinstance(policy, Fixed):
        value = float(state.age + 1)
        return (Decision.SEG if state.age + 1 >= policy.period else Decision.WARP, value)
    if isinstance(policy, AdaptiveConfidence):
        # age + 1: the key's staleness at the frame being decided
        x = extract_features(state.key_image, cur_img, flow, state.age + 1)
        score = predict(policy.dn, x)
        return (Decision.WARP if score > policy.threshold else Decision.SEG, score)
    if isinstance(policy, OracleConfidence):
        if true_score is None:
            raise LifecycleError("OracleConfidence needs the true agreement score")
        return (
            Decision.WARP if true_score > policy.threshold else Decision.SEG,
            true_score,
        )
    if isinstance(policy, FrameDiff):
        d = frame_difference(state.key_image, cur_img)
        return (Decision.SEG if d > policy.threshold else Decision.WARP, d)
    if isinstance(policy, FlowMag):
        f = flow_magnitude(flow)
        return (Decision.SEG if f > policy.threshold else Decision.WARP, f)
    raise ConfigError(f"unknown policy {policy!r}")


def apply_decision(
    state: RegionState,
    decision: Decision,
    cur_img: Image,
    output: LabelMap,
) -> RegionState:
    """Fold one executed decision into the region state.

    Segmentation refreshes the key (age resets); warping leaves the key in
    place and ages it by one frame.
    """
    if not isinstance(decision, Decision):
        raise LifecycleError(f"not a decision: {decision!r}")
    if (output.height, output.width) != (cur_img.height, cur_img.width):
        raise LifecycleError(
            f"path output {output.width}x{output.height} does not match the "
            f"region {cur_img.width}x{cur_img.height}"
        )
    if decision is Decision.SEG:
        return RegionState(cur_img, output, age=0, last_decision=Decision.SEG)
    return RegionState(
        state.key_image, state.key_seg, age=state.age + 1, last_decision=Decision.WARP
    )
