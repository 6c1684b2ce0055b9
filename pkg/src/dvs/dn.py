"""Decision network: predicts the warp path's expected agreement score.

At run time the ground-truth agreement between the two paths is not
available, so a small regressor predicts it from quantities the fast path
already computes: flow statistics, the discrete flow divergence, the
grayscale frame difference, and the residual left after warping the key
image onto the current frame. The regressor is a [d, 32, 16, 1] perceptron
with rectifier hidden units and a logistic output, trained with mini-batch
Adam on mean-squared error against ground-truth scores obtained by running
both paths.

The feature layout is frozen; bump FEATURE_VERSION when it changes so
stale checkpoints are rejected at load time.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import FlowField, Image
from .errors import ConfigError, ShapeError
from .metrics import confidence_score, frame_difference
from .rng import STREAM_TRAIN, derived_rng
from .warp import warp_image

FEATURE_NAMES = (
    "flow_mag_mean",
    "flow_mag_std",
    "flow_mag_max",
    "flow_div_mean_abs",
    "frame_diff",
    "residual_mean",
    "residual_std",
    "age",
    "bias",
)
FEATURE_VERSION = 1
FEATURE_DIM = len(FEATURE_NAMES)

DEFAULT_HIDDEN = (32, 16)
# logistic output is clamped into the open interval so downstream
# thresholding never sees 0.0 or 1.0 exactly
_EPS_OUT = 1e-9

CHECKPOINT_MAGIC = b"DVSD"
_CKPT_VERSION = 1


def extract_features(
    key_img: Image, cur_img: Image, flow: FlowField, age: int
) -> np.ndarray:
    """Feature vector for one (key region, current region, flow) triple."""
    if (key_img.height, key_img.width) != (cur_img.height, cur_img.width) or (
        key_img.height,
        key_img.width,
    ) != (flow.height, flow.width):
        raise ShapeError("feature extraction requires matching grid dimensions")
    u = flow.u.astype(np.float64)
    v = flow.v.astype(np.float64)
    mag = np.sqrt(u * u + v * v)
    div = np.gradient(u, axis=1) + np.gradient(v, axis=0)
    residual = np.abs(
        warp_image(key_img, flow).data.astype(np.float64)
        - cur_img.data.astype(np.float64)
    )
    return np.array(
        [
            mag.mean(),
            mag.std(),
            mag.max(),
            np.abs(div).mean(),
            frame_difference(key_img, cur_img),
            residual.mean(),
            residual.std(),
            float(age),
            1.0,
        ],
        dtype=np.float64,
    )


@dataclass
class Regressor:
    """Perceptron weights plus the feature standardization constants."""

    sizes: tuple[int, ...]
    weights: list[np.ndarray]  # per layer, shape (out, in)
    biases: list[np.ndarray]  # per layer, shape (out,)
    feat_center: np.ndarray
    feat_scale: np.ndarray
    feature_version: int = FEATURE_VERSION

    @property
    def feature_dim(self) -> int:
        return self.sizes[0]


def init_regressor(
    feature_dim: int,
    hidden: Sequence[int] = DEFAULT_HIDDEN,
    seed: int = 0,
) -> Regressor:
    """Glorot-uniform initialization, deterministic in ``seed``."""
    sizes = (feature_dim, *hidden, 1)
    rng = derived_rng(seed, STREAM_TRAIN, 0)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out, dtype=np.float64))
    return Regressor(
        sizes=sizes,
        weights=weights,
        biases=biases,
        feat_center=np.zeros(feature_dim, dtype=np.float64),
        feat_scale=np.ones(feature_dim, dtype=np.float64),
    )


def _forward(reg: Regressor, X: np.ndarray):
    """Forward pass keeping activations for backprop."""
    acts = [(X - reg.feat_center) / reg.feat_scale]
    for i, (W, b) in enumerate(zip(reg.weights, reg.biases)):
        z = acts[-1] @ W.T + b
        if i < len(reg.weights) - 1:
            acts.append(np.maximum(z, 0.0))
        else:
            p = 1.0 / (1.0 + np.exp(-np.clip(z, -36.0, 36.0)))
            acts.append(np.clip(p, _EPS_OUT, 1.0 - _EPS_OUT))
    return acts


def predict_batch(reg: Regressor, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != reg.feature_dim:
        raise ShapeError(f"expected (n, {reg.feature_dim}) features, got {X.shape}")
    return _forward(reg, X)[-1][:, 0]


def predict(reg: Regressor, x: np.ndarray) -> float:
    """Expected agreement score in the open interval (0, 1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (reg.feature_dim,):
        raise ShapeError(f"expected {reg.feature_dim} features, got shape {x.shape}")
    return float(predict_batch(reg, x[None, :])[0])


def mse_loss(pred: float, target: float) -> tuple[float, float]:
    """Squared error and its derivative with respect to the prediction."""
    diff = pred - target
    return diff * diff, 2.0 * diff


def loss_and_grads(reg: Regressor, X: np.ndarray, y: np.ndarray):
    """Mean squared error over the batch and gradients for every parameter.

    Returned gradients are ordered [W_0, b_0, W_1, b_1, ...], matching
    ``pack_params``.
    """
    n = X.shape[0]
    acts = _forward(reg, X)
    p = acts[-1][:, 0]
    loss = float(np.mean((p - y) ** 2))
    # d loss / d z_out through the logistic
    delta = (2.0 / n) * (p - y) * p * (1.0 - p)
    delta = delta[:, None]
    grads: list[np.ndarray] = []
    for i in range(len(reg.weights) - 1, -1, -1):
        a_in = acts[i]
        gW = delta.T @ a_in
        gb = delta.sum(axis=0)
        grads.append(gb)
        grads.append(gW)
        if i > 0:
            delta = (delta @ reg.weights[i]) * (acts[i] > 0.0)
    grads.reverse()
    return loss, grads


def pack_params(reg: Regressor) -> list[np.ndarray]:
    out = []
    for W, b in zip(reg.weights, reg.biases):
        out.append(W)
        out.append(b)
    return out


@dataclass
class AdamState:
    """First/second moment estimates for one parameter list."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray], **hyper) -> "AdamState":
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            **hyper,
        )


def adam_step(
    state: AdamState, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]
) -> AdamState:
    """One in-place Adam update; increments the step counter."""
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ShapeError("parameter, gradient, and state lists must align")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ShapeError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= state.alpha * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return state


@dataclass
class TrainReport:
    """Per-epoch curves plus the held-out summary of a training run."""

    train_mse: list[float] = field(default_factory=list)
    holdout_mse: list[float] = field(default_factory=list)
    holdout_mae: list[float] = field(default_factory=list)
    n_train: int = 0
    n_holdout: int = 0

    @property
    def final_holdout_mse(self) -> float:
        return self.holdout_mse[-1]

    @property
    def final_holdout_mae(self) -> float:
        return self.holdout_mae[-1]


def train(
    dataset,
    *,
    seed: int = 0,
    epochs: int = 200,
    batch_size: int = 64,
    alpha: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    holdout_frac: float = 0.2,
    hidden: Sequence[int] = DEFAULT_HIDDEN,
) -> tuple[Regressor, TrainReport]:
    """Fit a regressor; deterministic given ``seed``.

    ``dataset`` is either an (X, y) pair of arrays or a list of
    (feature_vector, target) tuples; targets must lie in [0, 1].
    """
    X, y = _coerce_dataset(dataset)
    n = X.shape[0]
    if n == 0:
        raise ConfigError("training dataset is empty")
    if y.min() < 0.0 or y.max() > 1.0:
        raise ConfigError("targets must lie in [0, 1]")

    rng = derived_rng(seed, STREAM_TRAIN, 1)
    perm = rng.permutation(n)
    n_hold = int(round(n * holdout_frac))
    n_hold = min(max(n_hold, 1 if n > 1 else 0), n - 1)
    hold_idx, train_idx = perm[:n_hold], perm[n_hold:]
    Xtr, ytr = X[train_idx], y[train_idx]
    Xho, yho = X[hold_idx], y[hold_idx]

    reg = init_regressor(X.shape[1], hidden=hidden, seed=seed)
    center = Xtr.mean(axis=0)
    scale = Xtr.std(axis=0)
    scale[scale < 1e-12] = 1.0
    reg.feat_center = center
    reg.feat_scale = scale

    params = pack_params(reg)
    state = AdamState.for_params(params, alpha=alpha, beta1=beta1, beta2=beta2, eps=eps)
    report = TrainReport(n_train=len(train_idx), n_holdout=len(hold_idx))

    for _ in range(epochs):
        order = rng.permutation(len(train_idx))
        for start in range(0, len(order), batch_size):
            sel = order[start : start + batch_size]
            _, grads = loss_and_grads(reg, Xtr[sel], ytr[sel])
            adam_step(state, params, grads)
        ptr = predict_batch(reg, Xtr)
        report.train_mse.append(float(np.mean((ptr - ytr) ** 2)))
        if len(hold_idx):
            pho = predict_batch(reg, Xho)
            report.holdout_mse.append(float(np.mean((pho - yho) ** 2)))
            report.holdout_mae.append(float(np.mean(np.abs(pho - yho))))
        else:
            report.holdout_mse.append(report.train_mse[-1])
            report.holdout_mae.append(float(np.mean(np.abs(ptr - ytr))))
    return reg, report


def _coerce_dataset(dataset) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(dataset, tuple) and len(dataset) == 2:
        X = np.asarray(dataset[0], dtype=np.float64)
        y = np.asarray(dataset[1], dtype=np.float64)
    else:
        pairs = list(dataset)
        if not pairs:
            raise ConfigError("training dataset is empty")
        X = np.stack([np.asarray(f, dtype=np.float64) for f, _ in pairs])
        y = np.array([t for _, t in pairs], dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError(f"dataset shapes disagree: X {X.shape}, y {y.shape}")
    return X, y


def build_training_set(
    sequences,
    scheme,
    backends,
    seed: int = 0,
    max_age: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Features and ground-truth agreement targets from rendered sequences.

    For every region and (key, current) frame pair, both paths are run: the
    segmentation oracle on the current region gives the reference output,
    warping the key region's segmentation gives the fast-path output, and
    the target is the agreement score between them — the quantity the
    regressor must learn to predict without ever seeing the reference.
    """
    from .core import crop  # local import keeps module import cheap
    from .oracle import flow_oracle, seg_oracle
    from .region import make_regions
    from .warp import WarpConfig, warp_labels

    warp_cfg = WarpConfig()
    feats: list[np.ndarray] = []
    targets: list[float] = []
    for s_idx, bundles in enumerate(sequences):
        n = len(bundles)
        frame = bundles[0]
        geoms = make_regions(scheme, frame.image.width, frame.image.height)
        limit = max_age if max_age is not None else n - 1
        for r_idx, geom in enumerate(geoms):
            imgs = [crop(b.image, geom) for b in bundles]
            truths = [crop(b.truth_labels, geom) for b in bundles]
            segs = [
                seg_oracle(
                    imgs[t],
                    truths[t],
                    backends,
                    frame.num_classes,
                    derived_rng(seed, STREAM_TRAIN, 2, s_idx, r_idx, t),
                )
                for t in range(n)
            ]
            for k in range(n - 1):
                for i in range(k + 1, min(k + limit, n - 1) + 1):
                    flow = flow_oracle(
                        k,
                        i,
                        bundles,
                        geom,
                        backends,
                        derived_rng(seed, STREAM_TRAIN, 3, s_idx, r_idx, k, i),
                    )
                    warped = warp_labels(segs[k], flow, warp_cfg)
                    feats.append(extract_features(imgs[k], imgs[i], flow, i - k))
                    targets.append(confidence_score(warped, segs[i]))
    return np.stack(feats), np.array(targets, dtype=np.float64)


# ---------------------------------------------------------------------------
# Checkpoint container: magic "DVSD", u32 container version, u32 feature
# version, u32 layer count, u32 layer sizes, then f32 feature center, f32
# feature scale, and per layer f32 weights (row-major) and biases.
# ---------------------------------------------------------------------------


def save_checkpoint(reg: Regressor, path) -> None:
    parts = [CHECKPOINT_MAGIC]
    parts.append(struct.pack("<III", _CKPT_VERSION, reg.feature_version, len(reg.sizes)))
    parts.append(struct.pack(f"<{len(reg.sizes)}I", *reg.sizes))
    parts.append(reg.feat_center.astype("<f4").tobytes())
    parts.append(reg.feat_scale.astype("<f4").tobytes())
    for W, b in zip(reg.weights, reg.biases):
        parts.append(np.ascontiguousarray(W, dtype="<f4").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_checkpoint(path) -> Regressor:
    raw = Path(path).read_bytes()
    if raw[:4] != CHECKPOINT_MAGIC:
        raise ConfigError(f"{path}: not a checkpoint file")
    off = 4
    version, feat_version, n_sizes = struct.unpack_from("<III", raw, off)
    off += 12
    if version != _CKPT_VERSION:
        raise ConfigError(f"{path}: unsupported checkpoint version {version}")
    if feat_version != FEATURE_VERSION:
        raise ConfigError(
            f"{path}: checkpoint feature version {feat_version} != "
            f"current {FEATURE_VERSION}"
        )
    sizes = struct.unpack_from(f"<{n_sizes}I", raw, off)
    off += 4 * n_sizes

    def take(count: int) -> np.ndarray:
        nonlocal off
        arr = np.frombuffer(raw, dtype="<f4", count=count, offset=off)
        off += 4 * count
        return arr.astype(np.float64)

    d = sizes[0]
    center = take(d)
    scale = take(d)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(take(fan_in * fan_out).reshape(fan_out, fan_in))
        biases.append(take(fan_out))
    if off != len(raw):
        raise ConfigError(f"{path}: {len(raw) - off} trailing bytes")
    return Regressor(
        sizes=tuple(sizes),
        weights=weights,
        biases=biases,
        feat_center=center,
        feat_scale=scale,
        feature_version=feat_version,
    )
