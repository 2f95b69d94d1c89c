"""Small graph generators used as test fixtures and CLI demos."""

from __future__ import annotations

import numpy as np

from .graph import Graph


def path_graph(n: int, weights=None) -> Graph:
    edges = []
    for i in range(n - 1):
        w = 1.0 if weights is None else weights[i]
        edges.append((i, i + 1, w))
    return Graph(num_nodes=n, edges=tuple(edges))


def cycle_graph(n: int) -> Graph:
    edges = [(i, (i + 1) % n, 1.0) for i in range(n)]
    return Graph(num_nodes=n, edges=tuple(edges))


def grid_graph(rows: int, cols: int) -> Graph:
    """Four-neighbor lattice, node index = r * cols + c."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1, 1.0))
            if r + 1 < rows:
                edges.append((v, v + cols, 1.0))
    return Graph(num_nodes=rows * cols, edges=tuple(edges))


def bridged_triangles() -> Graph:
    """Two triangles {0,1,2} and {3,4,5} joined by the single edge (2,3)."""
    edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]
    return Graph(num_nodes=6, edges=tuple(edges))


def random_connected_graph(n: int, seed: int, extra_edge_prob: float = 0.15,
                           weighted: bool = False) -> Graph:
    """Random connected graph: a random spanning tree plus extra edges.

    Deterministic for a fixed (n, seed, extra_edge_prob, weighted).
    """
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    edges = {}

    def weight():
        return float(rng.uniform(0.5, 2.0)) if weighted else 1.0

    for i in range(1, n):
        a = int(perm[i])
        b = int(perm[rng.integers(0, i)])
        key = (min(a, b), max(a, b))
        edges[key] = weight()
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < extra_edge_prob:
                edges[(i, j)] = weight()
    return Graph(num_nodes=n, edges=tuple((a, b, w) for (a, b), w in sorted(edges.items())))
