"""Naive double-loop reference implementations used as test oracles.

Everything here is written for clarity, not speed: explicit Python loops,
no vectorization, no shared code with the package under test beyond the
grid types themselves.
"""

from __future__ import annotations

import math

from dvs.core import FlowField, Image, LabelMap

GRAY = (0.299, 0.587, 0.114)


def gradient_gap(reg, X, y, h=1e-6):
    """Worst relative gap between backprop and central finite differences."""
    from dvs import dn

    _, grads = dn.loss_and_grads(reg, X, y)
    params = dn.pack_params(reg)
    worst = 0.0
    for p, g in zip(params, grads):
        flat_p = p.ravel()
        flat_g = g.ravel()
        for j in range(flat_p.size):
            keep = flat_p[j]
            flat_p[j] = keep + h
            up, _ = dn.loss_and_grads(reg, X, y)
            flat_p[j] = keep - h
            down, _ = dn.loss_and_grads(reg, X, y)
            flat_p[j] = keep
            fd = (up - down) / (2 * h)
            gap = abs(fd - flat_g[j]) / max(abs(fd), abs(flat_g[j]), 1e-6)
            worst = max(worst, gap)
    return worst


def confidence_score_ref(o: LabelMap, s: LabelMap) -> float:
    agree = 0
    for y in range(o.height):
        for x in range(o.width):
            if int(o.data[y, x]) == int(s.data[y, x]):
                agree += 1
    return agree / (o.height * o.width)


def _gray_at(img: Image, x: int, y: int) -> float:
    if img.channels == 1:
        return float(img.data[y, x, 0])
    return (
        GRAY[0] * float(img.data[y, x, 0])
        + GRAY[1] * float(img.data[y, x, 1])
        + GRAY[2] * float(img.data[y, x, 2])
    )


def frame_difference_ref(a: Image, b: Image) -> float:
    total = 0.0
    for y in range(a.height):
        for x in range(a.width):
            total += abs(_gray_at(a, x, y) - _gray_at(b, x, y))
    return total / (a.height * a.width)


def flow_magnitude_ref(flow: FlowField) -> float:
    total = 0.0
    for y in range(flow.height):
        for x in range(flow.width):
            u = float(flow.data[y, x, 0])
            v = float(flow.data[y, x, 1])
            total += math.sqrt(u * u + v * v)
    return total / (flow.height * flow.width)


def miou_ref(truth: LabelMap, pred: LabelMap, num_classes: int) -> float:
    tp = [0] * num_classes
    fp = [0] * num_classes
    fn = [0] * num_classes
    for y in range(truth.height):
        for x in range(truth.width):
            t = int(truth.data[y, x])
            p = int(pred.data[y, x])
            if t == p:
                tp[t] += 1
            else:
                fp[p] += 1
                fn[t] += 1
    ious = []
    for c in range(num_classes):
        denom = tp[c] + fp[c] + fn[c]
        if denom > 0:
            ious.append(tp[c] / denom)
    return sum(ious) / len(ious)


def warp_nearest_ref(key: LabelMap, flow: FlowField) -> LabelMap:
    """Backward nearest-neighbour warp with clamped sampling."""
    import numpy as np

    h, w = key.height, key.width
    out = np.zeros((h, w), dtype=np.int32)
    for y in range(h):
        for x in range(w):
            sx = x - float(flow.data[y, x, 0])
            sy = y - float(flow.data[y, x, 1])
            ix = min(max(int(math.floor(sx + 0.5)), 0), w - 1)
            iy = min(max(int(math.floor(sy + 0.5)), 0), h - 1)
            out[y, x] = key.data[iy, ix]
    return LabelMap(out)


def warp_image_ref(key: Image, flow: FlowField) -> Image:
    """Backward bilinear warp of intensities with clamped sampling."""
    import numpy as np

    h, w, c = key.data.shape
    out = np.zeros((h, w, c), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            sx = min(max(x - float(flow.data[y, x, 0]), 0.0), w - 1.0)
            sy = min(max(y - float(flow.data[y, x, 1]), 0.0), h - 1.0)
            x0, y0 = int(math.floor(sx)), int(math.floor(sy))
            x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
            fx, fy = sx - x0, sy - y0
            for ch in range(c):
                top = (1 - fx) * float(key.data[y0, x0, ch]) + fx * float(
                    key.data[y0, x1, ch]
                )
                bot = (1 - fx) * float(key.data[y1, x0, ch]) + fx * float(
                    key.data[y1, x1, ch]
                )
                out[y, x, ch] = (1 - fy) * top + fy * bot
    return Image(np.clip(out, 0.0, 1.0))
