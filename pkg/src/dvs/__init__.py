"""Region-level dual-path video segmentation scheduling harness.

Frames are divided into overlapping regions; each region is routed either
through an accurate/slow segmentation backend or a fast flow-warping path,
driven by a per-region scheduling policy. Synthetic oracle backends with
controllable noise and cost stand in for the heavy models so every
scheduling property can be measured deterministically at desk scale.
"""

from .core import FlowField, Image, LabelMap, Rect, RegionGeometry, crop, embed, to_grayscale
from .errors import (
    BoundsError,
    ClassRangeError,
    CompletenessError,
    ConfigError,
    DVSError,
    LifecycleError,
    SequenceError,
    ShapeError,
    UndefinedMeasureError,
)
from .metrics import ConfusionMatrix, confidence_score, flow_magnitude, frame_difference
from .oracle import (
    BackendSpec,
    FrameBundle,
    ObjectSpec,
    SceneSpec,
    flow_oracle,
    render_sequence,
    seg_oracle,
)
from .region import DivisionScheme, make_regions, stitch
from .sched import (
    AdaptiveConfidence,
    Decision,
    Fixed,
    FlowMag,
    FrameDiff,
    OracleConfidence,
    RegionState,
    apply_decision,
    decide,
)
from .warp import WarpConfig, warp_image, warp_labels

__version__ = "0.1.0"

__all__ = [
    "AdaptiveConfidence",
    "BackendSpec",
    "BoundsError",
    "ClassRangeError",
    "CompletenessError",
    "ConfigError",
    "ConfusionMatrix",
    "Decision",
    "DivisionScheme",
    "DVSError",
    "Fixed",
    "FlowField",
    "FlowMag",
    "FrameBundle",
    "FrameDiff",
    "Image",
    "LabelMap",
    "LifecycleError",
    "ObjectSpec",
    "OracleConfidence",
    "Rect",
    "RegionGeometry",
    "RegionState",
    "SceneSpec",
    "SequenceError",
    "ShapeError",
    "UndefinedMeasureError",
    "WarpConfig",
    "apply_decision",
    "confidence_score",
    "crop",
    "decide",
    "embed",
    "flow_magnitude",
    "flow_oracle",
    "frame_difference",
    "make_regions",
    "render_sequence",
    "seg_oracle",
    "stitch",
    "to_grayscale",
    "warp_image",
    "warp_labels",
]
