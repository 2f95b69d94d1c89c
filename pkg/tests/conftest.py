import numpy as np
import pytest

from graphsig.generators import (
    bridged_triangles,
    cycle_graph,
    grid_graph,
    path_graph,
    random_connected_graph,
)


@pytest.fixture
def path4():
    return path_graph(4)


@pytest.fixture
def cycle4():
    return cycle_graph(4)


@pytest.fixture
def cycle8():
    return cycle_graph(8)


@pytest.fixture
def triangles():
    return bridged_triangles()


@pytest.fixture
def grid66():
    return grid_graph(6, 6)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_graphs(count, n_low, n_high, seed, weighted=False, extra_edge_prob=0.15):
    """Deterministic family of random connected graphs for property tests."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_low, n_high + 1))
        out.append(random_connected_graph(n, seed=int(rng.integers(1 << 31)),
                                          extra_edge_prob=extra_edge_prob,
                                          weighted=weighted))
    return out
