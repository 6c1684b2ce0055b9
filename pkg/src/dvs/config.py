"""Flat key/value configuration files for scenes and backends.

Format: one ``key = value`` pair per line, ``#`` starts a comment, blank
lines are ignored. The ``object`` key may repeat, one line per shape.

Scene keys (defaults in parentheses):
    frame_w (128)          frame width in pixels
    frame_h (128)          frame height in pixels
    num_classes (4)        class count including background 0
    sequence_length (20)   frames to render
    seed (0)               scene RNG seed (CLI --seed overrides)
    flicker (0.0)          per-frame global intensity offset amplitude
    object                 <rect|disc> class=<id> center=<x>,<y>
                           [size=<w>,<h> | radius=<r>] [vel=<vx>,<vy>]
                           [jitter=<sigma>]

Backend keys:
    seg_noise (0.02)       fraction of pixels the seg oracle relabels
    flow_noise (0.5)       sigma in pixels of the flow oracle's noise
    seg_cost (10.0)        abstract cost units per pixel
    flow_cost (1.0)
    dn_cost (0.2)

Example::

    frame_w = 128
    frame_h = 128
    num_classes = 3
    sequence_length = 20
    seed = 7
    object = rect class=1 center=40,40 size=24,18 vel=1.5,0 jitter=0.1
    object = disc class=2 center=90,90 radius=12
    seg_noise = 0.02
    flow_noise = 0.5
"""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError
from .oracle import BackendSpec, ObjectSpec, SceneSpec

_SCENE_INT = {"frame_w", "frame_h", "num_classes", "sequence_length", "seed"}
_SCENE_FLOAT = {"flicker"}
_BACKEND_FLOAT = {"seg_noise", "flow_noise", "seg_cost", "flow_cost", "dn_cost"}

_SCENE_DEFAULTS = {
    "frame_w": 128,
    "frame_h": 128,
    "num_classes": 4,
    "sequence_length": 20,
    "seed": 0,
    "flicker": 0.0,
}


def _parse_pair(text: str, key: str, lineno: int) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"line {lineno}: {key} wants two comma-separated numbers")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad number in {key}={text!r}") from exc


def _parse_object(value: str, lineno: int) -> ObjectSpec:
    tokens = value.split()
    if not tokens:
        raise ConfigError(f"line {lineno}: empty object definition")
    shape = tokens[0]
    fields: dict = {"shape": shape}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ConfigError(f"line {lineno}: expected key=value, got {tok!r}")
        key, val = tok.split("=", 1)
        if key == "class":
            fields["class_id"] = int(val)
        elif key == "center":
            fields["x"], fields["y"] = _parse_pair(val, "center", lineno)
        elif key == "size":
            fields["width"], fields["height"] = _parse_pair(val, "size", lineno)
        elif key == "radius":
            fields["radius"] = float(val)
        elif key == "vel":
            fields["vx"], fields["vy"] = _parse_pair(val, "vel", lineno)
        elif key == "jitter":
            fields["jitter"] = float(val)
        else:
            raise ConfigError(f"line {lineno}: unknown object attribute {key!r}")
    if "class_id" not in fields:
        raise ConfigError(f"line {lineno}: object needs class=<id>")
    try:
        return ObjectSpec(**fields)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"line {lineno}: {exc}") from exc


def parse_config(text: str) -> tuple[SceneSpec, BackendSpec]:
    scene: dict = dict(_SCENE_DEFAULTS)
    backend: dict = {}
    objects: list[ObjectSpec] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key == "object":
                objects.append(_parse_object(value, lineno))
            elif key in _SCENE_INT:
                scene[key] = int(value)
            elif key in _SCENE_FLOAT:
                scene[key] = float(value)
            elif key in _BACKEND_FLOAT:
                backend[key] = float(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    try:
        spec = SceneSpec(
            frame_w=scene["frame_w"],
            frame_h=scene["frame_h"],
            num_classes=scene["num_classes"],
            objects=tuple(objects),
            sequence_length=scene["sequence_length"],
            rng_seed=scene["seed"],
            flicker=scene["flicker"],
        )
        backends = BackendSpec(
            seg_noise_rate=backend.get("seg_noise", 0.02),
            flow_noise_sigma=backend.get("flow_noise", 0.5),
            seg_cost=backend.get("seg_cost", 10.0),
            flow_cost=backend.get("flow_cost", 1.0),
            dn_cost=backend.get("dn_cost", 0.2),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return spec, backends


def load_config(path) -> tuple[SceneSpec, BackendSpec]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
