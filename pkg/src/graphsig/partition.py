"""Local sets, the three bipartition heuristics, and the decomposition tree."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph

from .errors import (
    DegenerateSet,
    DisconnectedGraph,
    DisconnectedInput,
    EmptySet,
    LeafCountOutOfRange,
    PartialTree,
)
from .graph import Graph, induced_weights, is_connected, subgraph_distance_matrix


@dataclass(frozen=True)
class LocalSet:
    """Nonempty node set whose induced subgraph is connected."""

    nodes: tuple

    def __post_init__(self):
        nodes = tuple(sorted(set(int(v) for v in self.nodes)))
        if not nodes:
            raise EmptySet("a local set cannot be empty")
        object.__setattr__(self, "nodes", nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    def __contains__(self, v) -> bool:
        return v in self.nodes

    @property
    def min_node(self) -> int:
        return self.nodes[0]

    def indicator(self, num_nodes: int) -> np.ndarray:
        out = np.zeros(num_nodes)
        out[list(self.nodes)] = 1.0
        return out


class PartitionMethod(enum.Enum):
    SPECTRAL_CLUSTERING = "spectral-clustering"
    SPANNING_TREE = "spanning-tree"
    TWO_MEANS = "two-means"


def set_variation(graph: Graph, local_set: LocalSet, p: int = 0) -> float:
    """Boundary measure of an indicator signal, normalized by set size.

    p = 0 counts cut edges, p = 1 sums sqrt(|w|) over them, p = 2 sums
    |w|; all three agree on unweighted graphs.
    """
    if p not in (0, 1, 2):
        raise ValueError(f"p must be 0, 1 or 2, got {p}")
    members = set(local_set.nodes)
    total = 0.0
    for src, dst, w in graph.edges:
        if (src in members) != (dst in members):
            if p == 0:
                total += 1.0
            elif p == 1:
                total += np.sqrt(abs(w))
            else:
                total += abs(w)
    return total / len(local_set)


# -- bipartition heuristics ---------------------------------------------------


def _order_children(a: set, b: set) -> tuple:
    first, second = (a, b) if min(a) < min(b) else (b, a)
    return LocalSet(tuple(first)), LocalSet(tuple(second))


def _largest_component(sub: sp.csr_matrix, nodes: list) -> set:
    """Largest connected component (ties broken by smallest member)."""
    _, labels = csgraph.connected_components(sub, directed=False)
    best = None
    for lab in range(labels.max() + 1):
        comp = {nodes[i] for i in np.flatnonzero(labels == lab)}
        if best is None or (len(comp), -min(comp)) > (len(best), -min(best)):
            best = comp
    return best


def _neighbors_within(graph: Graph, members: set) -> dict:
    adj = {v: set() for v in members}
    for src, dst, w in graph.edges:
        if src in members and dst in members:
            adj[src].add(dst)
            adj[dst].add(src)
    return adj


def _repair_sides(graph: Graph, members: list, side_a: set, side_b: set):
    """Restore connectivity: keep each side's largest component, then pull
    every stray toward a side it touches, preferring the smaller side."""
    member_set = set(members)
    if not side_a or not side_b:
        return None
    a_nodes = sorted(side_a)
    b_nodes = sorted(side_b)
    core_a = _largest_component(induced_weights(graph, a_nodes), a_nodes)
    core_b = _largest_component(induced_weights(graph, b_nodes), b_nodes)
    adj = _neighbors_within(graph, member_set)
    strays = sorted(member_set - core_a - core_b)
    while strays:
        progressed = False
        remaining = []
        for v in strays:
            touches_a = any(u in core_a for u in adj[v])
            touches_b = any(u in core_b for u in adj[v])
            if touches_a and touches_b:
                target = core_a if len(core_a) <= len(core_b) else core_b
            elif touches_a:
                target = core_a
            elif touches_b:
                target = core_b
            else:
                remaining.append(v)
                continue
            target.add(v)
            progressed = True
        if not progressed:
            return None
        strays = remaining
    if not core_a or not core_b:
        return None
    return core_a, core_b


def _bipartition_spectral(graph: Graph, members: list, rng) -> tuple | None:
    sub = induced_weights(graph, members).toarray()
    degrees = sub.sum(axis=1)
    laplacian = np.diag(degrees) - sub
    _, vecs = np.linalg.eigh(laplacian)
    fiedler = vecs[:, 1]
    nz = np.flatnonzero(np.abs(fiedler) > 1e-12)
    if nz.size and fiedler[nz[0]] < 0:
        fiedler = -fiedler
    threshold = np.median(fiedler)
    side_a = {members[i] for i in np.flatnonzero(fiedler >= threshold)}
    side_b = set(members) - side_a
    if not side_a or not side_b:
        return None
    return _repair_sides(graph, members, side_a, side_b)


def _spanning_tree_adjacency(graph: Graph, members: list) -> sp.csr_matrix:
    sub = induced_weights(graph, members)
    if graph.is_unweighted:
        tree = csgraph.breadth_first_tree(sub, 0, directed=False)
    else:
        tree = csgraph.minimum_spanning_tree(-sub)
    tree = tree.tocoo()
    data = np.ones_like(tree.data)
    adj = sp.csr_matrix((data, (tree.row, tree.col)), shape=tree.shape)
    return adj + adj.T


def _bipartition_spanning_tree(graph: Graph, members: list, rng) -> tuple:
    k = len(members)
    tree = _spanning_tree_adjacency(graph, members)
    neighbors = [tree.indices[tree.indptr[i]:tree.indptr[i + 1]] for i in range(k)]

    # subtree sizes from a DFS rooted at 0; removing node v leaves its child
    # subtrees plus the remainder on the parent side
    parent = np.full(k, -2, dtype=int)
    order = []
    stack = [0]
    parent[0] = -1
    while stack:
        v = stack.pop()
        order.append(v)
        for u in neighbors[v]:
            if parent[u] == -2:
                parent[u] = v
                stack.append(u)
    size = np.ones(k, dtype=int)
    for v in reversed(order):
        if parent[v] >= 0:
            size[parent[v]] += size[v]

    best_cost, balance = None, None
    for v in range(k):
        child_sizes = [size[u] for u in neighbors[v] if parent[u] == v]
        rest = k - 1 - sum(child_sizes)
        cost = max(child_sizes + ([rest] if rest > 0 else []))
        if best_cost is None or cost < best_cost:
            best_cost, balance = cost, v
    # components of the tree after deleting the balance node
    comp_label = np.full(k, -1, dtype=int)
    comp_label[balance] = -2
    comps = []
    for start in range(k):
        if comp_label[start] != -1:
            continue
        comps.append([])
        stack = [start]
        comp_label[start] = len(comps) - 1
        while stack:
            v = stack.pop()
            comps[-1].append(v)
            for u in neighbors[v]:
                if comp_label[u] == -1:
                    comp_label[u] = len(comps) - 1
                    stack.append(u)
    comps = [{members[i] for i in comp} for comp in comps]
    largest = max(comps, key=lambda c: (len(c), -min(c)))
    other = set(members) - largest  # includes the balance node
    return largest, other


def _bipartition_two_means(graph: Graph, members: list, rng) -> tuple:
    k = len(members)
    dist = subgraph_distance_matrix(graph, members)

    def assign_to(centers):
        # ties go to the lower-indexed center, which keeps cells connected
        return dist[centers[0]] <= dist[centers[1]]

    def recenter(cluster):
        within = dist[np.ix_(cluster, cluster)]
        return int(cluster[np.argmin(within.sum(axis=1))])

    centers = sorted(rng.choice(k, size=2, replace=False).tolist())
    assign = assign_to(centers)
    for _ in range(100):
        new_centers = sorted([recenter(np.flatnonzero(assign)),
                              recenter(np.flatnonzero(~assign))])
        if new_centers == centers:
            break
        centers = new_centers
        assign = assign_to(centers)
    side_a = {members[i] for i in np.flatnonzero(assign)}
    side_b = set(members) - side_a
    if not side_a or not side_b:  # cannot happen: each center stays in its own cell
        return None
    return side_a, side_b


def bipartition(graph: Graph, local_set: LocalSet, method: PartitionMethod,
                rng=None) -> tuple:
    """Split a connected local set into two connected local sets.

    The children cover the input exactly, both are connected, and the one
    containing the smallest node index comes first. Results are
    deterministic given the method and the rng state.
    """
    if len(local_set) < 2:
        raise DegenerateSet(f"cannot bipartition a set of size {len(local_set)}")
    members = list(local_set.nodes)
    if not is_connected(graph, restrict_to=members):
        raise DisconnectedInput(f"induced subgraph of {members} is not connected")
    if rng is None:
        rng = np.random.default_rng(0)

    sides = None
    if method is PartitionMethod.SPECTRAL_CLUSTERING and len(members) > 2:
        sides = _bipartition_spectral(graph, members, rng)
    elif method is PartitionMethod.TWO_MEANS:
        sides = _bipartition_two_means(graph, members, rng)
    if sides is None:
        sides = _bipartition_spanning_tree(graph, members, rng)
    return _order_children(*sides)


# -- decomposition tree -------------------------------------------------------


@dataclass
class TreeNode:
    local_set: LocalSet
    level: int
    index: int  # 1-based position within the level, children at 2j-1, 2j
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def set_id(self) -> tuple:
        return (self.level, self.index)


class FullDepth:
    """Stop criterion: partition until every leaf is a single node."""


@dataclass(frozen=True)
class LeafCount:
    """Stop criterion: partition (largest set first) until m leaves exist."""

    m: int


@dataclass
class LocalSetTree:
    """Binary decomposition tree of connected local sets.

    The root covers all nodes; every internal node has exactly two
    children that partition it. Leaves are singletons for full trees, or
    the m requested sets for leaf-count trees.
    """

    root: TreeNode
    num_nodes: int
    method: PartitionMethod | None = None
    seed: int | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def all_nodes(self) -> list:
        """Tree nodes in level-major, index-minor order."""
        if "all_nodes" not in self._cache:
            out = []
            stack = [self.root]
            while stack:
                node = stack.pop()
                out.append(node)
                if node.left is not None:
                    stack.extend([node.right, node.left])
            out.sort(key=lambda nd: (nd.level, nd.index))
            self._cache["all_nodes"] = out
        return self._cache["all_nodes"]

    def partitions(self) -> list:
        """Internal nodes (each one records a bipartition) in level order."""
        return [nd for nd in self.all_nodes() if not nd.is_leaf]

    def leaves(self) -> list:
        return [nd for nd in self.all_nodes() if nd.is_leaf]

    @property
    def depth(self) -> int:
        return max(nd.level for nd in self.all_nodes())

    @property
    def is_full(self) -> bool:
        return all(len(nd.local_set) == 1 for nd in self.leaves())

    def require_full(self) -> None:
        if not self.is_full:
            raise PartialTree("operation requires a full-depth tree")

    def level_partition(self, level: int) -> list:
        """Sets at a level, with shallower leaves carried down unchanged."""
        out = [nd.local_set for nd in self.all_nodes()
               if nd.level == level or (nd.is_leaf and nd.level < level)]
        return sorted(out, key=lambda s: s.min_node)

    def level_variation_sums(self, graph: Graph, p: int = 0) -> list:
        """Total normalized variation per level from the root down."""
        return [sum(set_variation(graph, s, p) for s in self.level_partition(i))
                for i in range(self.depth + 1)]


def build_tree(graph: Graph, method: PartitionMethod, stop=FullDepth,
               seed: int = 0) -> LocalSetTree:
    """Recursively bipartition the whole node set into a decomposition tree.

    ``stop`` is either ``FullDepth`` (split down to singletons) or
    ``LeafCount(m)`` (stop once m leaves cover the graph, always expanding
    the leaf with the most nodes, ties by smallest member).
    """
    if not is_connected(graph):
        raise DisconnectedGraph("decomposition trees need a connected graph")
    rng = np.random.default_rng(seed)
    root = TreeNode(LocalSet(tuple(range(graph.num_nodes))), level=0, index=1)

    def split(node: TreeNode) -> None:
        first, second = bipartition(graph, node.local_set, method, rng=rng)
        node.left = TreeNode(first, node.level + 1, 2 * node.index - 1)
        node.right = TreeNode(second, node.level + 1, 2 * node.index)

    if stop is FullDepth or isinstance(stop, FullDepth):
        queue = [root]
        while queue:
            node = queue.pop(0)
            if len(node.local_set) < 2:
                continue
            split(node)
            queue.extend([node.left, node.right])
    elif isinstance(stop, LeafCount):
        m = stop.m
        if not 1 <= m <= graph.num_nodes:
            raise LeafCountOutOfRange(f"m={m} outside [1, {graph.num_nodes}]")
        leaves = [root]
        while len(leaves) < m:
            target = min(leaves, key=lambda nd: (-len(nd.local_set), nd.local_set.min_node))
            split(target)
            leaves.remove(target)
            leaves.extend([target.left, target.right])
    else:
        raise ValueError(f"unknown stop criterion {stop!r}")
    return LocalSetTree(root=root, num_nodes=graph.num_nodes, method=method, seed=seed)


# -- serialization ------------------------------------------------------------


def _node_to_dict(node: TreeNode) -> dict:
    out = {"nodes": list(node.local_set.nodes)}
    if node.left is not None:
        out["children"] = [_node_to_dict(node.left), _node_to_dict(node.right)]
    else:
        out["children"] = None
    return out


def _node_from_dict(data: dict, level: int, index: int) -> TreeNode:
    node = TreeNode(LocalSet(tuple(data["nodes"])), level=level, index=index)
    if data.get("children"):
        left, right = data["children"]
        node.left = _node_from_dict(left, level + 1, 2 * index - 1)
        node.right = _node_from_dict(right, level + 1, 2 * index)
    return node


def tree_to_json(tree: LocalSetTree) -> str:
    payload = {
        "format": "local-set-tree",
        "version": 1,
        "num_nodes": tree.num_nodes,
        "method": tree.method.value if tree.method else None,
        "seed": tree.seed,
        "root": _node_to_dict(tree.root),
    }
    return json.dumps(payload, indent=2)


def tree_from_json(text: str) -> LocalSetTree:
    payload = json.loads(text)
    if payload.get("format") != "local-set-tree":
        raise ValueError("not a serialized local-set tree")
    method = PartitionMethod(payload["method"]) if payload.get("method") else None
    root = _node_from_dict(payload["root"], level=0, index=1)
    return LocalSetTree(root=root, num_nodes=payload["num_nodes"],
                        method=method, seed=payload.get("seed"))
