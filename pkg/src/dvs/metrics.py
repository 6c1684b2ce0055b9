"""Decision metrics and accuracy accounting.

Three per-region scalars drive scheduling policies:

  * ``confidence_score``  — fraction of pixels where two label maps agree;
  * ``frame_difference``  — mean absolute grayscale difference of two images;
  * ``flow_magnitude``    — mean per-pixel displacement length of a flow field.

Accuracy is reported as mIoU over a class confusion matrix. All sums are
accumulated in float64 regardless of the grids' storage dtype.
"""

from __future__ import annotations

import numpy as np

from .core import GRAY_WEIGHTS, FlowField, Image, LabelMap
from .errors import ClassRangeError, ShapeError, UndefinedMeasureError


def _require_same_size(a, b, what: str) -> None:
    if (a.height, a.width) != (b.height, b.width):
        raise ShapeError(
            f"{what}: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def _gray64(img: Image) -> np.ndarray:
    # float64 throughout; avoids the float32 rounding a stored grayscale
    # Image would introduce
    if img.channels == 1:
        return img.data[:, :, 0].astype(np.float64)
    d = img.data.astype(np.float64)
    r, g, b = GRAY_WEIGHTS
    return r * d[:, :, 0] + g * d[:, :, 1] + b * d[:, :, 2]


def confidence_score(o: LabelMap, s: LabelMap) -> float:
    """Fraction of pixels where the two maps carry the same class id.

    Symmetric, in [0, 1], and equal to 1 minus the normalized Hamming
    distance between the maps.
    """
    _require_same_size(o, s, "confidence_score")
    agree = int(np.count_nonzero(o.data == s.data))
    return agree / o.data.size


def frame_difference(a: Image, b: Image, squared: bool = False) -> float:
    """Mean absolute grayscale difference between two images.

    ``squared=True`` averages squared differences instead; the default is
    absolute differences, which is the variant usable as a decision metric
    (signed differences would cancel).
    """
    _require_same_size(a, b, "frame_difference")
    diff = _gray64(a) - _gray64(b)
    if squared:
        return float(np.mean(diff * diff))
    return float(np.mean(np.abs(diff)))


def flow_magnitude(flow: FlowField) -> float:
    """Mean per-pixel displacement length sqrt(u^2 + v^2), in pixels."""
    u = flow.u.astype(np.float64)
    v = flow.v.astype(np.float64)
    return float(np.mean(np.sqrt(u * u + v * v)))


class ConfusionMatrix:
    """Pixel tallies, rows = ground truth class, columns = predicted class.

    Accumulation mutates the owning matrix; ``merge`` sums two matrices for
    parallel reduction. Everything else is read-only.
    """

    def __init__(self, num_classes: int):
        if num_classes < 1:
            raise ValueError(f"num_classes must be >= 1, got {num_classes}")
        self.num_classes = num_classes
        self.counts = np.zeros((num_classes, num_classes), dtype=np.int64)

    def accumulate(self, truth: LabelMap, pred: LabelMap) -> "ConfusionMatrix":
        _require_same_size(truth, pred, "accumulate")
        t = truth.data.ravel()
        p = pred.data.ravel()
        n = self.num_classes
        if t.size and (t.max() >= n or p.max() >= n):
            raise ClassRangeError(
                f"label id >= num_classes ({n}) in confusion accumulation"
            )
        flat = np.bincount(t.astype(np.int64) * n + p, minlength=n * n)
        self.counts += flat.reshape(n, n)
        return self

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.num_classes != self.num_classes:
            raise ShapeError(
                f"cannot merge {other.num_classes}-class into "
                f"{self.num_classes}-class matrix"
            )
        self.counts += other.counts
        return self

    def total(self) -> int:
        return int(self.counts.sum())

    def per_class_iou(self) -> np.ndarray:
        """IoU per class; NaN for classes absent from both truth and pred."""
        tp = np.diag(self.counts).astype(np.float64)
        union = (
            self.counts.sum(axis=0).astype(np.float64)
            + self.counts.sum(axis=1).astype(np.float64)
            - tp
        )
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(union > 0, tp / union, np.nan)

    def miou(self) -> float:
        """Mean IoU over classes that occur in truth or prediction."""
        iou = self.per_class_iou()
        present = ~np.isnan(iou)
        if not present.any():
            raise UndefinedMeasureError("mIoU undefined: no scored pixels")
        return float(np.mean(iou[present]))


def miou(cm: ConfusionMatrix) -> float:
    return cm.miou()


def accumulate(cm: ConfusionMatrix, truth: LabelMap, pred: LabelMap) -> ConfusionMatrix:
    return cm.accumulate(truth, pred)
