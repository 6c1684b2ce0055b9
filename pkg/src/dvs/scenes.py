"""Named scene families used by the test suite, CLI defaults, and docs.

All presets render 128x128 frames. With the 2x2 division that gives 64x64
quadrants; objects are placed relative to those quadrants so each family
exercises a specific scheduling behaviour:

  * heterogeneous   — static left half, two independent movers on the right;
  * localized       — all motion confined to the top-right quadrant;
  * border_crossing — shapes that cross interior region borders (overlap study);
  * mostly_static   — static shapes plus one very slow mover (workload study);
  * flicker         — global photometric flicker plus one real mover
                      (defeats frame-difference scheduling);
  * drift           — steady one-directional motion everywhere (threshold
                      monotonicity study).
"""

from __future__ import annotations

import math

from .oracle import ObjectSpec, SceneSpec
from .rng import STREAM_SCENE, derived_rng

FRAME = 128
DEFAULT_FRAMES = 20


def heterogeneous_scene(seed: int, frames: int = DEFAULT_FRAMES) -> SceneSpec:
    objects = (
        ObjectSpec("rect", 1, x=32.0, y=96.0, width=28, height=22),
        ObjectSpec("rect", 2, x=82.0, y=30.0, vx=1.8, vy=0.5, width=24, height=20, jitter=0.1),
        ObjectSpec("disc", 3, x=100.0, y=98.0, vx=-0.9, vy=-1.2, radius=12, jitter=0.1),
    )
    return SceneSpec(FRAME, FRAME, 4, objects, frames, seed)


def localized_motion_scene(seed: int, frames: int = DEFAULT_FRAMES) -> SceneSpec:
    objects = (
        ObjectSpec("rect", 1, x=80.0, y=26.0, vx=1.4, vy=0.4, width=18, height=14, jitter=0.1),
        ObjectSpec("disc", 2, x=108.0, y=44.0, vx=-1.0, vy=0.5, radius=9, jitter=0.1),
        ObjectSpec("rect", 3, x=32.0, y=96.0, width=30, height=24),
    )
    return SceneSpec(FRAME, FRAME, 4, objects, frames, seed)


def border_crossing_scene(seed: int, frames: int = DEFAULT_FRAMES) -> SceneSpec:
    # Three rects cross interior 2x2 borders sitting at staggered distances
    # from the border when a Fixed(10) policy refreshes keys, so each step
    # of overlap depth (8, 16, 32) recovers one more crossing. Velocities
    # are integral so warping is exact off the disocclusion trails.
    objects = (
        ObjectSpec("rect", 1, x=34.0, y=32.0, vx=2.0, vy=0.0, width=12, height=20),
        ObjectSpec("rect", 2, x=96.0, y=22.0, vx=0.0, vy=2.0, width=20, height=20),
        ObjectSpec("rect", 3, x=120.0, y=96.0, vx=-3.0, vy=0.0, width=12, height=20),
    )
    return SceneSpec(FRAME, FRAME, 4, objects, frames, seed)


def mostly_static_scene(seed: int, frames: int = DEFAULT_FRAMES) -> SceneSpec:
    objects = (
        ObjectSpec("rect", 1, x=40.0, y=44.0, width=34, height=26),
        ObjectSpec("disc", 2, x=92.0, y=88.0, radius=16),
        ObjectSpec("rect", 2, x=96.0, y=30.0, vx=0.12, vy=0.0, width=28, height=22),
    )
    return SceneSpec(FRAME, FRAME, 3, objects, frames, seed)


def flicker_scene(seed: int, frames: int = DEFAULT_FRAMES) -> SceneSpec:
    objects = (
        ObjectSpec("rect", 1, x=36.0, y=36.0, width=26, height=20),
        ObjectSpec("rect", 2, x=80.0, y=92.0, vx=1.8, vy=-0.8, width=22, height=22, jitter=0.1),
    )
    return SceneSpec(FRAME, FRAME, 3, objects, frames, seed, flicker=0.07)


def drift_scene(seed: int, frames: int = DEFAULT_FRAMES) -> SceneSpec:
    objects = (
        ObjectSpec("rect", 1, x=28.0, y=28.0, vx=1.5, vy=0.0, width=18, height=14),
        ObjectSpec("disc", 2, x=96.0, y=48.0, vx=0.0, vy=1.2, radius=10),
        ObjectSpec("rect", 3, x=40.0, y=100.0, vx=0.8, vy=0.4, width=22, height=16),
    )
    return SceneSpec(FRAME, FRAME, 4, objects, frames, seed)


def training_scene_specs(
    seed: int, n: int = 10, frames: int = DEFAULT_FRAMES
) -> list[SceneSpec]:
    """Default training distribution: ``n`` mixed scenes, deterministic in
    ``seed``.

    Mixes static scenes, slow/fast movers, border crossings, and flickered
    scenes so a regressor sees agreement scores across the whole range the
    scheduler will encounter.
    """
    specs = []
    num_classes = 4
    for i in range(n):
        rng = derived_rng(seed, STREAM_SCENE, 1000 + i)
        n_obj = int(rng.integers(1, 4))
        speed_scale = float(rng.choice([0.0, 0.3, 1.0, 2.0]))
        flicker = float(rng.choice([0.0, 0.0, 0.03, 0.06]))
        objects = []
        for _ in range(n_obj):
            shape = "rect" if rng.random() < 0.5 else "disc"
            class_id = int(rng.integers(1, num_classes))
            x = float(rng.uniform(20, FRAME - 20))
            y = float(rng.uniform(20, FRAME - 20))
            angle = float(rng.uniform(0, 2 * math.pi))
            speed = speed_scale * float(rng.uniform(0.5, 1.5)) if speed_scale else 0.0
            vx = speed * math.cos(angle)
            vy = speed * math.sin(angle)
            jitter = float(rng.choice([0.0, 0.1]))
            if shape == "rect":
                objects.append(
                    ObjectSpec(
                        "rect", class_id, x, y, vx, vy,
                        width=float(rng.uniform(12, 32)),
                        height=float(rng.uniform(12, 32)),
                        jitter=jitter,
                    )
                )
            else:
                objects.append(
                    ObjectSpec(
                        "disc", class_id, x, y, vx, vy,
                        radius=float(rng.uniform(7, 16)),
                        jitter=jitter,
                    )
                )
        specs.append(
            SceneSpec(
                FRAME, FRAME, num_classes, tuple(objects), frames,
                rng_seed=seed * 1009 + i, flicker=flicker,
            )
        )
    return specs
