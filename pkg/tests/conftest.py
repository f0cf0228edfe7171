import numpy as np
import pytest

from spillnet.bekk.model import BekkParams
from spillnet.ingest import SectorGrouping
from spillnet.network import SpilloverNetwork

GROUPS = ("Ke", "Cg", "Kg", "Us")


def random_network(rng, n=10, density=0.3, groups=GROUPS, dyadic=False, ungrouped=False):
    """Random weighted digraph with every main group non-empty."""
    codes = [f"{800000 + k}" for k in range(n)]
    tags = [groups[k % len(groups)] for k in range(n)]
    if ungrouped:
        tags[-1] = "Ungrouped"
    s = rng.random((n, n)) * (rng.random((n, n)) < density)
    if dyadic:
        s = np.round(s * 2**20) / 2**20
    np.fill_diagonal(s, 0.0)
    grouping = SectorGrouping({c: ("sector", t) for c, t in zip(codes, tags)})
    return SpilloverNetwork.from_intensity(codes, s, grouping)


def toy_network():
    """Two nodes per main group with a fixed edge set."""
    codes = ["a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2"]
    tags = ["Ke", "Ke", "Cg", "Cg", "Kg", "Kg", "Us", "Us"]
    s = np.zeros((8, 8))
    s[0, 1] = 0.5   # intra Ke
    s[0, 2] = 2.0   # Ke -> Cg
    s[1, 3] = 1.0   # Ke -> Cg
    s[2, 4] = 0.75  # Cg -> Kg
    s[4, 2] = 0.25  # Kg -> Cg
    s[5, 6] = 1.5   # Kg -> Us
    s[7, 0] = 0.125  # Us -> Ke
    grouping = SectorGrouping({c: ("sector", t) for c, t in zip(codes, tags)})
    return SpilloverNetwork.from_intensity(codes, s, grouping)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def spill_params():
    return BekkParams(
        mu=np.array([0.0, 0.0]),
        phi=np.zeros((2, 2)),
        c_lower=np.array([[0.3, 0.0], [0.05, 0.3]]),
        a=np.array([[0.3, 0.2], [0.0, 0.25]]),
        b=np.array([[0.9, 0.0], [0.0, 0.9]]),
    )
