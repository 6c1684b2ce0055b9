"""Deterministic random stream derivation.

Every random draw in the package comes from a generator derived from the
run seed plus an integer path (stream tag, frame index, region index, ...).
Derivation is stateless, so any worker can rebuild its stream from the
coordinates of the work item alone; results never depend on scheduling
order or worker count.
"""

from __future__ import annotations

import numpy as np

# Stream tags. Each independent consumer of randomness gets its own tag so
# adding draws to one stream never shifts another.
STREAM_SCENE = 0
STREAM_SEG = 1
STREAM_FLOW = 2
STREAM_TRAIN = 3
STREAM_INIT = 4


def derived_rng(seed: int, *path: int) -> np.random.Generator:
    """Generator for the substream at ``path`` under ``seed``.

    Same (seed, path) always yields the same stream; distinct paths yield
    statistically independent streams.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))
