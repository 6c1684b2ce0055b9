import time

import numpy as np
import pytest

from dvs import BackendSpec, DivisionScheme, render_sequence
from dvs import dn as dn_mod
from dvs.scenes import training_scene_specs

TRAIN_SEED = 0


class TrainedDN:
    """Decision network trained once per session on the default distribution."""

    def __init__(self):
        t0 = time.time()
        specs = training_scene_specs(TRAIN_SEED, n=10, frames=20)
        sequences = [render_sequence(s) for s in specs]
        scheme = DivisionScheme.from_name("2x2", 8)
        self.dataset = dn_mod.build_training_set(
            sequences, scheme, BackendSpec(), seed=TRAIN_SEED
        )
        self.regressor, self.report = dn_mod.train(self.dataset, seed=TRAIN_SEED)
        self.elapsed = time.time() - t0


@pytest.fixture(scope="session")
def trained_dn() -> TrainedDN:
    return TrainedDN()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
