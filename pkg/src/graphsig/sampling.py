"""Sampling design (greedy), the four recovery algorithms, error bounds."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DimensionMismatch,
    InsufficientSamples,
    RankDeficient,
    SampleCountMismatch,
    SingularDesign,
    SingularSystem,
)
from .graph import Graph, StructureMatrixKind, build_matrix, connected_components, difference_operator, subgraph_distance_matrix
from .partition import LeafCount, LocalSetTree, PartitionMethod, build_tree


class SamplingObjective(enum.Enum):
    """The six design objectives: bias / noise / total, worst case or expected."""

    BIAS_WORST = "a"
    BIAS_EXPECTED = "b"
    NOISE_WORST = "c"
    NOISE_EXPECTED = "d"
    TOTAL_WORST = "e"
    TOTAL_EXPECTED = "f"

    @property
    def needs_complement(self) -> bool:
        return self in (SamplingObjective.BIAS_WORST, SamplingObjective.BIAS_EXPECTED,
                        SamplingObjective.TOTAL_WORST, SamplingObjective.TOTAL_EXPECTED)

    @property
    def worst_case(self) -> bool:
        return self in (SamplingObjective.BIAS_WORST, SamplingObjective.NOISE_WORST,
                        SamplingObjective.TOTAL_WORST)


@dataclass(frozen=True)
class SamplingPlan:
    """Ordered sampled nodes plus the design context they were chosen for."""

    indices: tuple
    objective: SamplingObjective
    c_tradeoff: float
    basis_context: np.ndarray = field(repr=False)
    objective_value: float = float("nan")
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "objective": self.objective.value,
            "indices": list(self.indices),
            "c_tradeoff": self.c_tradeoff,
            "seed": self.seed,
            "objective_value": self.objective_value,
        }


def _norm(matrix: np.ndarray, worst_case: bool) -> float:
    if matrix.size == 0:
        return 0.0
    if worst_case:
        return float(np.linalg.norm(matrix, 2))
    return float(np.linalg.norm(matrix, "fro"))


def _objective_value(rows, d_omega, d_comp, objective, c_tradeoff) -> float:
    sampled = d_omega[rows]
    pinv = np.linalg.pinv(sampled)
    if objective is SamplingObjective.NOISE_WORST:
        return _norm(pinv, True)
    if objective is SamplingObjective.NOISE_EXPECTED:
        return _norm(pinv, False)
    bias = pinv @ d_comp[rows]
    if objective is SamplingObjective.BIAS_WORST:
        return _norm(bias, True)
    if objective is SamplingObjective.BIAS_EXPECTED:
        return _norm(bias, False)
    worst = objective is SamplingObjective.TOTAL_WORST
    return _norm(bias, worst) + c_tradeoff * _norm(pinv, worst)


def design_sampling(d_omega: np.ndarray, m: int, objective: SamplingObjective,
                    d_comp: np.ndarray | None = None,
                    c_tradeoff: float = 1.0) -> SamplingPlan:
    """Greedy forward selection of m sample nodes for a known atom subspace.

    Each step adds the node minimizing the chosen objective, evaluated
    through the pseudoinverse of the sampled rows of ``d_omega``
    (spectral norm for worst-case settings, Frobenius for expectations,
    with the complement ``d_comp`` entering the bias settings). While the
    sampled rows are not yet left-invertible (the first K steps), the
    smallest singular value is maximized instead. Ties break toward the
    lowest node index.
    """
    d_omega = np.asarray(d_omega, dtype=float)
    n, k = d_omega.shape
    if m < k:
        raise InsufficientSamples(f"need at least {k} samples, got {m}")
    if m > n:
        raise InsufficientSamples(f"cannot sample {m} of {n} nodes")
    if objective.needs_complement:
        if d_comp is None:
            raise ValueError(f"objective ({objective.value}) needs the complement matrix")
        d_comp = np.asarray(d_comp, dtype=float)
        if d_comp.shape[0] != n:
            raise DimensionMismatch("complement must have one row per node")
    else:
        d_comp = np.zeros((n, 0))

    selected: list = []
    for step in range(m):
        best_node, best_score = None, None
        for v in range(n):
            if v in selected:
                continue
            rows = selected + [v]
            if step < k:
                score = -float(np.linalg.svd(d_omega[rows], compute_uv=False).min())
            else:
                score = _objective_value(rows, d_omega, d_comp, objective, c_tradeoff)
            if best_score is None or score < best_score:
                best_node, best_score = v, score
        selected.append(best_node)
        if step == k - 1 and -best_score <= 1e-12 * max(
                1.0, float(np.linalg.svd(d_omega[selected], compute_uv=False).max())):
            raise SingularDesign("no node selection makes the sampled basis full rank")
    value = _objective_value(selected, d_omega, d_comp, objective, c_tradeoff)
    return SamplingPlan(indices=tuple(selected), objective=objective,
                        c_tradeoff=c_tradeoff, basis_context=d_omega,
                        objective_value=value)


def pls_recover(y_samples: np.ndarray, plan, d_omega: np.ndarray) -> np.ndarray:
    """Least-squares fit of the samples in the known subspace.

    ``plan`` may be a SamplingPlan or a plain index sequence.
    """
    indices = list(plan.indices) if isinstance(plan, SamplingPlan) else list(plan)
    d_omega = np.asarray(d_omega, dtype=float)
    y = np.asarray(y_samples, dtype=float)
    if y.shape[0] != len(indices):
        raise DimensionMismatch("one sample per planned node required")
    sampled = d_omega[indices]
    k = d_omega.shape[1]
    singular = np.linalg.svd(sampled, compute_uv=False)
    if len(singular) < k or singular.min() <= 1e-12 * max(1.0, singular.max()):
        raise RankDeficient("sampled basis rows do not have full column rank")
    coeffs, *_ = np.linalg.lstsq(sampled, y, rcond=None)
    return d_omega @ coeffs


def _check_sampled_components(graph: Graph, sampled: np.ndarray) -> None:
    labels = connected_components(graph)
    for lab in np.unique(labels):
        if not sampled[labels == lab].any():
            raise SingularSystem(f"component {lab} has no sampled node")


def harmonic_recover(y_samples: np.ndarray, sampled_nodes, graph: Graph,
                     mu: float) -> np.ndarray:
    """Quadratic-variation recovery: solve (S + mu L) t = S y.

    S selects the sampled nodes; the unique minimizer interpolates the
    data against Laplacian smoothness. Raises SingularSystem when some
    connected component carries no sample.
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    nodes = [int(v) for v in sampled_nodes]
    y = np.asarray(y_samples, dtype=float)
    if y.shape[0] != len(nodes):
        raise DimensionMismatch("one sample per sampled node required")
    n = graph.num_nodes
    mask = np.zeros(n, dtype=bool)
    mask[nodes] = True
    _check_sampled_components(graph, mask)
    laplacian = sp.csr_matrix(build_matrix(graph, StructureMatrixKind.LAPLACIAN_UNNORMALIZED))
    rhs = np.zeros(n)
    rhs[nodes] = y
    system = sp.diags(mask.astype(float)) + mu * laplacian
    try:
        out = spla.spsolve(system.tocsc(), rhs)
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from None
    if not np.all(np.isfinite(out)):
        raise SingularSystem("harmonic system is singular")
    return out


def _soft_threshold(v: np.ndarray, rad: float) -> np.ndarray:
    return np.maximum(v - rad, 0.0) + np.minimum(v + rad, 0.0)


def trend_filter_recover(y_samples: np.ndarray, sampled_nodes, graph: Graph,
                         mu: float, rho: float | None = None, tol: float = 1e-6,
                         max_iter: int = 10000, return_info: bool = False):
    """L1 trend filtering on the graph via operator splitting.

    Minimizes ``||x_M - t_M||^2 + mu ||Delta t||_1`` with the split
    z = Delta t and scaled dual u; the t-update reuses one cached
    factorization of (2S + rho L). Stops when the primal and dual
    residuals drop below ``tol``; if the iteration budget runs out the
    best objective iterate is returned and flagged in ``info``.
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    nodes = [int(v) for v in sampled_nodes]
    y = np.asarray(y_samples, dtype=float)
    if y.shape[0] != len(nodes):
        raise DimensionMismatch("one sample per sampled node required")
    n = graph.num_nodes
    mask = np.zeros(n, dtype=bool)
    mask[nodes] = True
    _check_sampled_components(graph, mask)
    if rho is None:
        rho = mu
    delta = difference_operator(graph)
    rhs_data = np.zeros(n)
    rhs_data[nodes] = y
    system = (sp.diags(2.0 * mask.astype(float)) + rho * (delta.T @ delta)).tocsc()
    solve = spla.factorized(system)

    def objective(t):
        return float(np.sum((t[nodes] - y) ** 2) + mu * np.abs(delta @ t).sum())

    z = np.zeros(delta.shape[0])
    u = np.zeros(delta.shape[0])
    best_t, best_obj = None, np.inf
    converged = False
    iterations = 0
    primal = dual = np.inf
    for iterations in range(1, max_iter + 1):
        t = solve(2.0 * rhs_data + rho * (delta.T @ (z - u)))
        v = delta @ t
        z_new = _soft_threshold(v + u, mu / rho)
        dual = rho * float(np.linalg.norm(delta.T @ (z_new - z)))
        z = z_new
        u = u + v - z
        primal = float(np.linalg.norm(v - z))
        obj = objective(t)
        if obj < best_obj:
            best_obj, best_t = obj, t
        scale = max(1.0, float(np.linalg.norm(v)), float(np.linalg.norm(z)))
        dual_scale = max(1.0, rho * float(np.linalg.norm(delta.T @ u)))
        if primal <= tol * scale and dual <= tol * dual_scale:
            converged = True
            break
    if not converged:
        warnings.warn(f"trend filter hit the {max_iter}-iteration budget "
                      f"(primal {primal:.2e}, dual {dual:.2e})", RuntimeWarning, stacklevel=2)
    result = best_t if best_t is not None else t
    if return_info:
        info = {"converged": converged, "iterations": iterations,
                "primal_residual": primal, "dual_residual": dual,
                "objective": best_obj,
                "dual_vector": rho * u / mu}
        return result, info
    return result


# -- leaf-center sampling and recovery ----------------------------------------


@dataclass(frozen=True)
class LeafSampling:
    """Leaf local sets covering the graph plus one center node per leaf."""

    leaves: tuple
    centers: tuple
    tree: LocalSetTree = field(repr=False, default=None)

    @property
    def max_leaf_size(self) -> int:
        return max(len(leaf) for leaf in self.leaves)


def leaf_sampling(graph: Graph, method: PartitionMethod, m: int,
                  seed: int = 0) -> LeafSampling:
    """Partition into m leaves (largest first) and take each leaf's center.

    The center minimizes the sum of geodesic distances to the rest of its
    leaf, computed inside the leaf's induced subgraph; ties break toward
    the smallest node index.
    """
    tree = build_tree(graph, method, stop=LeafCount(m), seed=seed)
    leaves = [node.local_set for node in tree.leaves()]
    centers = []
    for leaf in leaves:
        members = list(leaf.nodes)
        if len(members) == 1:
            centers.append(members[0])
            continue
        dist = subgraph_distance_matrix(graph, members)
        centers.append(members[int(np.argmin(dist.sum(axis=1)))])
    return LeafSampling(leaves=tuple(leaves), centers=tuple(centers), tree=tree)


def center_assign_recover(samples: np.ndarray, leaves: LeafSampling) -> np.ndarray:
    """Extend each center's sample as a constant over its leaf."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] != len(leaves.leaves):
        raise SampleCountMismatch(f"expected {len(leaves.leaves)} samples, got {samples.shape[0]}")
    n = max(max(leaf.nodes) for leaf in leaves.leaves) + 1
    out = np.zeros(n)
    for leaf, value in zip(leaves.leaves, samples):
        out[list(leaf.nodes)] = value
    return out


def recovery_error_bound(cut_count: int, leaves: LeafSampling) -> int:
    """Worst-case mislabeled nodes: cut count times the largest leaf."""
    if cut_count < 0:
        raise ValueError("cut count cannot be negative")
    return int(cut_count) * leaves.max_leaf_size


def snap_to_values(x_reference: np.ndarray, recovered: np.ndarray) -> np.ndarray:
    """Snap each entry to the nearest value present in the reference signal.

    Exact midpoints go to the smaller value.
    """
    values = np.unique(np.asarray(x_reference, dtype=float))
    recovered = np.asarray(recovered, dtype=float)
    pos = np.searchsorted(values, recovered)
    pos = np.clip(pos, 1, len(values) - 1) if len(values) > 1 else np.zeros_like(pos)
    if len(values) == 1:
        return np.full_like(recovered, values[0])
    lower = values[pos - 1]
    upper = values[pos]
    pick_lower = (recovered - lower) <= (upper - recovered)
    return np.where(pick_lower, lower, upper)


def mislabel_fraction(x: np.ndarray, recovered: np.ndarray, snap: bool = True) -> float:
    """Fraction of nodes whose recovered label differs from the truth."""
    x = np.asarray(x, dtype=float)
    recovered = np.asarray(recovered, dtype=float)
    if x.shape != recovered.shape:
        raise DimensionMismatch(f"shapes {x.shape} and {recovered.shape} differ")
    if snap:
        recovered = snap_to_values(x, recovered)
    return float(np.mean(x != recovered))
