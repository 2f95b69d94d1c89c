"""Graph container, structure matrices, difference operator, distances."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph

from .errors import EmptyGraph, ZeroDegreeNode


class StructureMatrixKind(enum.Enum):
    """The six graph structure matrices.

    Shift kinds diffuse a signal to neighbors; Laplacian kinds measure
    differences. Shift and Laplacian kinds come in unnormalized,
    symmetric-normalized and row-stochastic (transition) flavors.
    """

    ADJACENCY = "adjacency"
    NORMALIZED_ADJACENCY = "normalized-adjacency"
    TRANSITION = "transition"
    LAPLACIAN_UNNORMALIZED = "laplacian"
    LAPLACIAN_NORMALIZED = "laplacian-normalized"
    LAPLACIAN_TRANSITION = "laplacian-transition"

    @property
    def is_shift(self) -> bool:
        return self in (
            StructureMatrixKind.ADJACENCY,
            StructureMatrixKind.NORMALIZED_ADJACENCY,
            StructureMatrixKind.TRANSITION,
        )

    @property
    def is_laplacian(self) -> bool:
        return not self.is_shift

    @property
    def needs_positive_degrees(self) -> bool:
        return self not in (
            StructureMatrixKind.ADJACENCY,
            StructureMatrixKind.LAPLACIAN_UNNORMALIZED,
        )


@dataclass(frozen=True)
class Graph:
    """Weighted graph with a fixed node ordering.

    Edges are canonicalized at construction: undirected edges are stored
    once with ``src < dst``, self loops and duplicate pairs are rejected,
    every weight must be finite and nonzero.

    Parameters
    ----------
    num_nodes : int
        Number of nodes N (> 0). Node indices run in ``[0, N)``.
    edges : sequence of (src, dst, weight)
        Weight may be omitted per edge (defaults to 1.0).
    directed : bool
        Directed edges are kept as given; undirected are canonicalized.
    """

    num_nodes: int
    edges: tuple = ()
    directed: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = self.num_nodes
        if not isinstance(n, (int, np.integer)) or n <= 0:
            raise ValueError(f"num_nodes must be a positive integer, got {n!r}")
        canon = []
        seen = set()
        for e in self.edges:
            if len(e) == 2:
                src, dst = e
                w = 1.0
            else:
                src, dst, w = e
            src = int(src)
            dst = int(dst)
            w = float(w)
            if not (0 <= src < n and 0 <= dst < n):
                raise ValueError(f"edge ({src}, {dst}) out of range for {n} nodes")
            if src == dst:
                raise ValueError(f"self loop at node {src} is not allowed")
            if not np.isfinite(w) or w == 0.0:
                raise ValueError(f"edge ({src}, {dst}) has invalid weight {w}")
            if not self.directed and src > dst:
                src, dst = dst, src
            if (src, dst) in seen:
                raise ValueError(f"duplicate edge ({src}, {dst})")
            seen.add((src, dst))
            canon.append((src, dst, w))
        canon.sort()
        object.__setattr__(self, "edges", tuple(canon))

    # -- derived structure ------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_array(self) -> np.ndarray:
        """Edges as an (E, 3) float array in canonical order."""
        if "edge_array" not in self._cache:
            if self.edges:
                arr = np.asarray(self.edges, dtype=float)
            else:
                arr = np.zeros((0, 3))
            self._cache["edge_array"] = arr
        return self._cache["edge_array"]

    @property
    def weight_matrix(self) -> np.ndarray:
        """Dense weighted adjacency W (symmetric when undirected)."""
        if "W" not in self._cache:
            n = self.num_nodes
            W = np.zeros((n, n))
            for src, dst, w in self.edges:
                W[src, dst] = w
                if not self.directed:
                    W[dst, src] = w
            self._cache["W"] = W
        return self._cache["W"]

    @property
    def sparse_weights(self) -> sp.csr_matrix:
        """Sparse adjacency, kept alongside the dense form for traversals."""
        if "W_sparse" not in self._cache:
            self._cache["W_sparse"] = sp.csr_matrix(self.weight_matrix)
        return self._cache["W_sparse"]

    @property
    def degrees(self) -> np.ndarray:
        """Degree vector d with d_i the row sum of W."""
        return self.weight_matrix.sum(axis=1)

    @property
    def is_unweighted(self) -> bool:
        return all(w == 1.0 for _, _, w in self.edges)

    # -- IO ----------------------------------------------------------------

    def to_edgelist(self) -> str:
        lines = ["directed" if self.directed else "undirected"]
        for src, dst, w in self.edges:
            lines.append(f"{src} {dst} {w!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edgelist(cls, text: str, num_nodes: int | None = None) -> "Graph":
        """Parse the edge-list text format.

        One edge per line as ``src dst weight`` (weight optional), zero
        indexed, ``#`` starts a comment, and an optional leading header
        line ``directed`` or ``undirected`` (undirected by default).
        """
        from .errors import ParseError

        directed = False
        edges = []
        max_node = -1
        header_allowed = True
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if header_allowed and line.lower() in ("directed", "undirected"):
                directed = line.lower() == "directed"
                header_allowed = False
                continue
            header_allowed = False
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ParseError(f"expected 'src dst [weight]', got {raw!r}", line=lineno)
            try:
                src = int(parts[0])
                dst = int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            edges.append((src, dst, w))
            max_node = max(max_node, src, dst)
        n = num_nodes if num_nodes is not None else max_node + 1
        return cls(num_nodes=n, edges=tuple(edges), directed=directed)


def load_graph(path, num_nodes=None) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return Graph.from_edgelist(fh.read(), num_nodes=num_nodes)


def save_graph(graph: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(graph.to_edgelist())


# -- structure matrices ----------------------------------------------------


def build_matrix(graph: Graph, kind: StructureMatrixKind) -> np.ndarray:
    """Build one of the six structure matrices as a dense N x N array.

    Raises
    ------
    EmptyGraph
        If the graph has no edges.
    ZeroDegreeNode
        For kinds that invert degrees when some node is isolated.
    """
    if graph.num_edges == 0:
        raise EmptyGraph("cannot build a structure matrix without edges")
    W = graph.weight_matrix
    d = graph.degrees
    if kind.needs_positive_degrees and np.any(d <= 0):
        bad = int(np.argmin(d))
        raise ZeroDegreeNode(f"node {bad} has degree {d[bad]}; {kind.value} requires positive degrees")
    n = graph.num_nodes

    def mirror(m):
        # exact symmetry under float rounding for undirected graphs
        if graph.directed:
            return m
        upper = np.triu(m)
        return upper + np.triu(m, 1).T

    if kind is StructureMatrixKind.ADJACENCY:
        return W.copy()
    if kind is StructureMatrixKind.NORMALIZED_ADJACENCY:
        inv_sqrt = 1.0 / np.sqrt(d)
        return mirror(inv_sqrt[:, None] * W * inv_sqrt[None, :])
    if kind is StructureMatrixKind.TRANSITION:
        return W / d[:, None]
    if kind is StructureMatrixKind.LAPLACIAN_UNNORMALIZED:
        return np.diag(d) - W
    if kind is StructureMatrixKind.LAPLACIAN_NORMALIZED:
        inv_sqrt = 1.0 / np.sqrt(d)
        return np.eye(n) - mirror(inv_sqrt[:, None] * W * inv_sqrt[None, :])
    if kind is StructureMatrixKind.LAPLACIAN_TRANSITION:
        return np.eye(n) - W / d[:, None]
    raise ValueError(f"unknown kind {kind!r}")


def difference_operator(graph: Graph) -> sp.csr_matrix:
    """Edge-by-node signed incidence operator.

    Row i corresponds to the i-th canonical edge (j, k) with j < k and
    carries ``-sgn(w) sqrt(|w|)`` at j and ``+sgn(w) sqrt(|w|)`` at k, so
    that on an unweighted nonnegative graph the entries are exactly -1/+1.
    """
    if graph.num_edges == 0:
        raise EmptyGraph("difference operator needs at least one edge")
    e = graph.num_edges
    rows = np.repeat(np.arange(e), 2)
    cols = np.empty(2 * e, dtype=int)
    vals = np.empty(2 * e)
    for i, (src, dst, w) in enumerate(graph.edges):
        j, k = (src, dst) if src < dst else (dst, src)
        s = np.sign(w) * np.sqrt(abs(w))
        cols[2 * i] = j
        cols[2 * i + 1] = k
        vals[2 * i] = -s
        vals[2 * i + 1] = s
    return sp.csr_matrix((vals, (rows, cols)), shape=(e, graph.num_nodes))


def count_inconsistent_edges(graph: Graph, x: np.ndarray, tol: float = 0.0) -> int:
    """Number of edges whose endpoints carry different signal values."""
    diff = difference_operator(graph) @ np.asarray(x, dtype=float)
    return int(np.count_nonzero(np.abs(diff) > tol))


# -- distances and connectivity ---------------------------------------------


def _length_matrix(graph: Graph) -> sp.csr_matrix:
    # Geodesic length of an edge is 1/|w|: higher similarity means closer.
    # Reduces to hop count on unweighted graphs.
    m = graph.sparse_weights.copy().tocoo()
    lengths = 1.0 / np.abs(m.data)
    return sp.csr_matrix((lengths, (m.row, m.col)), shape=m.shape)


def geodesic_distances(graph: Graph, source: int) -> np.ndarray:
    """Shortest-path distances from ``source``; unreachable nodes get inf."""
    if not 0 <= source < graph.num_nodes:
        raise ValueError(f"source {source} out of range")
    return geodesic_distance_matrix(graph, indices=[source])[0]


def geodesic_distance_matrix(graph: Graph, indices=None) -> np.ndarray:
    """Geodesic distances from each node in ``indices`` (all nodes if None)."""
    if graph.num_edges == 0:
        n = graph.num_nodes
        idx = list(range(n)) if indices is None else [int(i) for i in indices]
        out = np.full((len(idx), n), np.inf)
        for row, i in enumerate(idx):
            out[row, i] = 0.0
        return out
    lengths = _length_matrix(graph)
    dist = csgraph.dijkstra(lengths, directed=graph.directed, indices=indices)
    return np.atleast_2d(dist)


def subgraph_distance_matrix(graph: Graph, nodes) -> np.ndarray:
    """All-pairs geodesic distances inside the induced subgraph of ``nodes``.

    Rows and columns follow the order of ``nodes``.
    """
    nodes = list(nodes)
    sub = induced_weights(graph, nodes)
    if sub.nnz == 0:
        k = len(nodes)
        out = np.full((k, k), np.inf)
        np.fill_diagonal(out, 0.0)
        return out
    sub = sub.tocoo()
    lengths = sp.csr_matrix((1.0 / np.abs(sub.data), (sub.row, sub.col)), shape=sub.shape)
    return csgraph.dijkstra(lengths, directed=graph.directed)


def induced_weights(graph: Graph, nodes) -> sp.csr_matrix:
    """Weight matrix of the induced subgraph, reindexed to ``range(len(nodes))``."""
    idx = np.asarray(list(nodes), dtype=int)
    return graph.sparse_weights[idx][:, idx].tocsr()


def induced_graph(graph: Graph, nodes) -> Graph:
    """Induced subgraph as a new Graph, reindexed to ``range(len(nodes))``."""
    nodes = list(nodes)
    pos = {v: i for i, v in enumerate(nodes)}
    members = set(nodes)
    edges = []
    for src, dst, w in graph.edges:
        if src in members and dst in members:
            edges.append((pos[src], pos[dst], w))
    return Graph(num_nodes=len(nodes), edges=tuple(edges), directed=graph.directed)


def connected_components(graph: Graph, restrict_to=None) -> np.ndarray:
    """Component labels; edge direction is ignored.

    With ``restrict_to``, labels refer to components of the induced
    subgraph and excluded nodes are marked -1.
    """
    n = graph.num_nodes
    if restrict_to is None:
        _, labels = csgraph.connected_components(graph.sparse_weights, directed=False)
        return labels
    nodes = sorted(set(int(v) for v in restrict_to))
    for v in nodes:
        if not 0 <= v < n:
            raise ValueError(f"restrict_to contains out-of-range node {v}")
    sub = induced_weights(graph, nodes)
    _, sub_labels = csgraph.connected_components(sub, directed=False)
    labels = np.full(n, -1, dtype=int)
    labels[nodes] = sub_labels
    return labels


def is_connected(graph: Graph, restrict_to=None) -> bool:
    labels = connected_components(graph, restrict_to=restrict_to)
    labels = labels[labels >= 0]
    return labels.size > 0 and np.all(labels == labels[0])


def graph_diameter(graph: Graph, distances: np.ndarray | None = None) -> float:
    """Largest finite pairwise geodesic distance."""
    if distances is None:
        distances = geodesic_distance_matrix(graph)
    finite = distances[np.isfinite(distances)]
    return float(finite.max()) if finite.size else 0.0
