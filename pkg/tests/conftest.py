from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ltinact.degree import preset, validate


@pytest.fixture(scope="session")
def mbms_sec3():
    return preset("mbms-sec3")


@pytest.fixture(scope="session")
def mbms_sec4():
    return preset("mbms-sec4")


@pytest.fixture(scope="session")
def mix_dist():
    """Two-point distribution used throughout the exhaustive-oracle checks."""
    return validate([(1, 0.5), (2, 0.5)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# The worked four-source example: two outputs tied to v1, two tied to {v2, v3},
# v4 isolated.  Ripple {c1, c4}, cloud {c2, c3}.
FIG2_ADJACENCY = [[0], [1, 2], [1, 2], [0]]


@pytest.fixture
def fig2_graph():
    from ltinact.graph import BipartiteGraph

    return BipartiteGraph(4, FIG2_ADJACENCY)


class ScriptedStream:
    """Test double for numpy Generator: replays scripted draws.

    random() pops from floats; integers(lo, hi) pops from ints (each entry is
    either an absolute value within [lo, hi) or callable(lo, hi)).
    """

    def __init__(self, floats=(), ints=()):
        self.floats = list(floats)
        self.ints = list(ints)

    def random(self, size=None):
        if size is None:
            return self.floats.pop(0)
        return np.array([self.floats.pop(0) for _ in range(size)])

    def integers(self, low, high=None):
        if high is None:
            low, high = 0, low
        value = self.ints.pop(0)
        if callable(value):
            value = value(low, high)
        assert low <= value < high, f"scripted draw {value} outside [{low}, {high})"
        return np.int64(value)
