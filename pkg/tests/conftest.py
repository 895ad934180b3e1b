import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fteval import FrameSource, LandmarkSequence


@pytest.fixture
def walking_pair():
    """3-frame, 2-landmark hand example: gt moves (2,0)/frame, gen = gt + (0,2)."""
    coords = np.zeros((3, 2, 2))
    for t in range(3):
        coords[t, 0] = (10.0 + 2.0 * t, 20.0)
        coords[t, 1] = (30.0 + 2.0 * t, 40.0)
    gt = LandmarkSequence(coords, 100, 100)
    gen = LandmarkSequence(coords + np.array([0.0, 2.0]), 100, 100)
    return gen, gt


def random_sequence(rng, T=None, n=None, width=64, height=64):
    T = T if T is not None else int(rng.integers(1, 6))
    n = n if n is not None else int(rng.integers(1, 5))
    coords = rng.uniform(0, width, size=(T, n, 2))
    return LandmarkSequence(coords, width, height)


def frames_from(arr) -> FrameSource:
    return FrameSource(np.asarray(arr, dtype=np.uint8))
