import itertools

import numpy as np
import pytest
from scipy.optimize import lsq_linear

from graphsig.dictionaries import random_piecewise_constant, voronoi_pieces
from graphsig.errors import (
    DimensionMismatch,
    InsufficientSamples,
    RankDeficient,
    SampleCountMismatch,
    SingularDesign,
    SingularSystem,
)
from graphsig.generators import path_graph, random_connected_graph
from graphsig.graph import Graph, StructureMatrixKind, build_matrix, count_inconsistent_edges, difference_operator, geodesic_distance_matrix
from graphsig.partition import PartitionMethod
from graphsig.sampling import (
    SamplingObjective,
    center_assign_recover,
    design_sampling,
    harmonic_recover,
    leaf_sampling,
    mislabel_fraction,
    pls_recover,
    recovery_error_bound,
    snap_to_values,
    trend_filter_recover,
)
from graphsig.spectral import fourier_basis_of, sample_bandlimited

from conftest import random_graphs

L_KIND = StructureMatrixKind.LAPLACIAN_UNNORMALIZED


def kkt_residual(graph, t, y, nodes, mu, active_tol=1e-6):
    """Subgradient-based optimality residual for the trend-filter objective."""
    delta = difference_operator(graph).toarray()
    w = delta @ t
    grad = np.zeros_like(t)
    grad[nodes] = 2.0 * (t[nodes] - y)
    fixed = np.abs(w) > active_tol
    base = grad + mu * delta[fixed].T @ np.sign(w[fixed])
    free = ~fixed
    if not free.any():
        return float(np.abs(base).max())
    A = mu * delta[free].T
    fit = lsq_linear(A, -base, bounds=(-1.0, 1.0))
    return float(np.abs(A @ fit.x + base).max())


class TestDesignSampling:
    def test_identity_basis_ties_break_low(self):
        plan = design_sampling(np.eye(5), 5, SamplingObjective.NOISE_WORST)
        assert plan.indices == (0, 1, 2, 3, 4)
        assert abs(plan.objective_value - 1.0) <= 1e-12

    def test_single_informative_row(self):
        d_omega = np.array([[1.0], [0.0]])
        plan = design_sampling(d_omega, 1, SamplingObjective.NOISE_WORST)
        assert plan.indices == (0,)

    def test_micro_matches_exhaustive(self):
        g = random_connected_graph(6, seed=61, extra_edge_prob=0.3)
        fb = fourier_basis_of(g, L_KIND)
        d_omega = fb.V[:, :2]
        plan = design_sampling(d_omega, 2, SamplingObjective.NOISE_WORST)
        best = min(1.0 / np.linalg.svd(d_omega[list(pair)], compute_uv=False).min()
                   for pair in itertools.combinations(range(6), 2))
        assert abs(plan.objective_value - best) <= 1e-9

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientSamples):
            design_sampling(np.eye(4)[:, :3], 2, SamplingObjective.NOISE_WORST)

    def test_singular_design_detected(self):
        d_omega = np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])  # rank 1
        with pytest.raises(SingularDesign):
            design_sampling(d_omega, 2, SamplingObjective.NOISE_WORST)

    def test_bias_objectives_need_complement(self):
        with pytest.raises(ValueError):
            design_sampling(np.eye(3), 3, SamplingObjective.BIAS_WORST)

    def test_all_objectives_run(self):
        g = random_connected_graph(8, seed=62)
        fb = fourier_basis_of(g, L_KIND)
        for objective in SamplingObjective:
            plan = design_sampling(fb.V[:, :2], 4, objective,
                                   d_comp=fb.V[:, 2:], c_tradeoff=0.5)
            assert len(plan.indices) == 4
            assert np.isfinite(plan.objective_value)

    def test_noise_objective_nonincreasing_in_m(self):
        g = random_connected_graph(10, seed=63)
        fb = fourier_basis_of(g, L_KIND)
        for objective in (SamplingObjective.NOISE_WORST, SamplingObjective.NOISE_EXPECTED):
            values = [design_sampling(fb.V[:, :3], m, objective).objective_value
                      for m in range(3, 9)]
            assert all(values[i] >= values[i + 1] - 1e-9 for i in range(len(values) - 1))

    def test_matrix_approximation_link(self):
        # sampling the first-K eigenspace controls structure-matrix recovery
        for g in random_graphs(4, 8, 20, seed=64, weighted=True):
            r_matrix = build_matrix(g, L_KIND)
            fb = fourier_basis_of(g, L_KIND)
            k = 3
            m = min(g.num_nodes, 6)
            plan = design_sampling(fb.V[:, :k], m, SamplingObjective.NOISE_WORST)
            rows = list(plan.indices)
            sampled = r_matrix[rows]
            projector = np.linalg.pinv(sampled) @ sampled
            lhs = r_matrix - r_matrix @ projector
            vals = np.linalg.eigvalsh(r_matrix)
            keep = np.argsort(-np.abs(vals))[:k]
            drop = np.setdiff1d(np.arange(g.num_nodes), keep)
            for ord_ in (2, "fro"):
                tail = np.linalg.norm(np.sort(np.abs(vals[drop]))[::-1]
                                      if ord_ == "fro" else np.abs(vals[drop]),
                                      2 if ord_ == "fro" else np.inf)
                amp = np.linalg.norm(np.linalg.pinv(fb.V[rows, :k]), 2)
                assert np.linalg.norm(lhs, ord_) <= tail * amp + 1e-8


class TestPlsRecover:
    def test_noiseless_bandlimited_exact(self, rng):
        for g in random_graphs(4, 6, 16, seed=65):
            fb = fourier_basis_of(g, L_KIND)
            k = 3
            plan = design_sampling(fb.V[:, :k], k, SamplingObjective.NOISE_WORST)
            x = sample_bandlimited(fb, k, rng)
            recovered = pls_recover(x[list(plan.indices)], plan, fb.V[:, :k])
            assert np.linalg.norm(recovered - x) <= 1e-8

    def test_identity_full_sampling(self, rng):
        y = rng.standard_normal(6)
        recovered = pls_recover(y, list(range(6)), np.eye(6))
        assert np.allclose(recovered, y, atol=1e-12)

    def test_bias_decomposition(self, rng):
        g = random_connected_graph(12, seed=66)
        fb = fourier_basis_of(g, L_KIND)
        k = 3
        d_omega, d_comp = fb.V[:, :k], fb.V[:, k:]
        plan = design_sampling(d_omega, 5, SamplingObjective.NOISE_WORST)
        rows = list(plan.indices)
        a_comp = np.zeros(12 - k)
        a_comp[0] = 0.01
        noise = 0.001 * rng.standard_normal(12)
        x = fb.V[:, 0] + d_comp @ a_comp
        recovered = pls_recover((x + noise)[rows], plan, d_omega)
        amplifier = d_omega @ np.linalg.pinv(d_omega[rows])
        predicted = amplifier @ (d_comp @ a_comp + noise)[rows] - d_comp @ a_comp
        assert np.allclose(recovered - x, predicted, atol=1e-9)

    def test_rank_deficient_rejected(self):
        d_omega = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(RankDeficient):
            pls_recover(np.zeros(2), [0, 1], d_omega)


class TestHarmonicRecover:
    def test_constant_signal_exact(self):
        for g in random_graphs(3, 6, 20, seed=67):
            x = np.full(g.num_nodes, 4.0)
            recovered = harmonic_recover(x[[0, 1]], [0, 1], g, mu=2.0)
            assert np.abs(recovered - 4.0).max() <= 1e-9

    def test_full_sampling_small_mu(self, rng):
        g = random_connected_graph(10, seed=68)
        y = rng.standard_normal(10)
        recovered = harmonic_recover(y, list(range(10)), g, mu=1e-9)
        assert np.abs(recovered - y).max() <= 1e-6

    def test_path_matches_dense_solve(self):
        g = path_graph(4)
        y = np.array([1.0, -2.0])
        nodes = [0, 3]
        mu = 1.0
        laplacian = build_matrix(g, L_KIND)
        selector = np.diag([1.0, 0.0, 0.0, 1.0])
        rhs = np.array([1.0, 0.0, 0.0, -2.0])
        expected = np.linalg.solve(selector + mu * laplacian, rhs)
        assert np.allclose(harmonic_recover(y, nodes, g, mu), expected, atol=1e-10)

    def test_unsampled_component_rejected(self):
        g = Graph(4, edges=((0, 1, 1.0), (2, 3, 1.0)))
        with pytest.raises(SingularSystem):
            harmonic_recover(np.array([1.0]), [0], g, mu=0.5)


class TestTrendFilterRecover:
    def test_small_mu_fits_samples(self, rng):
        g = random_connected_graph(12, seed=69)
        y = rng.standard_normal(12)
        recovered = trend_filter_recover(y, list(range(12)), g, mu=1e-6)
        assert np.abs(recovered - y).max() <= 1e-4

    def test_constant_signal_stays_constant(self):
        g = random_connected_graph(10, seed=70)
        y = np.full(6, 2.5)
        recovered = trend_filter_recover(y, list(range(6)), g, mu=5.0)
        assert np.abs(recovered - 2.5).max() <= 1e-6

    def test_piecewise_truth_dense_sampling(self):
        g = random_connected_graph(24, seed=71)
        rng = np.random.default_rng(8)
        _, x = random_piecewise_constant(g, 2, rng)
        nodes = sorted(rng.choice(24, size=20, replace=False).tolist())
        recovered, info = trend_filter_recover(x[nodes], nodes, g, mu=0.4,
                                               tol=1e-9, max_iter=40000,
                                               return_info=True)
        assert info["converged"]
        assert kkt_residual(g, recovered, x[nodes], nodes, 0.4) <= 1e-5
        delta = difference_operator(g)
        assert np.count_nonzero(np.abs(delta @ recovered) > 1e-6) <= count_inconsistent_edges(g, x) + 4

    def test_objective_beats_harmonic_solution(self):
        g = random_connected_graph(16, seed=72)
        rng = np.random.default_rng(9)
        _, x = random_piecewise_constant(g, 3, rng)
        nodes = sorted(rng.choice(16, size=10, replace=False).tolist())
        mu = 0.7
        delta = difference_operator(g)

        def objective(t):
            return float(np.sum((t[nodes] - x[nodes]) ** 2) + mu * np.abs(delta @ t).sum())

        tf = trend_filter_recover(x[nodes], nodes, g, mu=mu, tol=1e-9, max_iter=40000)
        hf = harmonic_recover(x[nodes], nodes, g, mu=mu)
        assert objective(tf) <= objective(hf) + 1e-6


class TestLeafSampling:
    def test_every_node_its_own_center(self, grid66):
        sampling = leaf_sampling(grid66, PartitionMethod.SPANNING_TREE, 36)
        assert sorted(sampling.centers) == list(range(36))

    def test_single_leaf_center_minimizes_distance_sum(self):
        for g in random_graphs(3, 6, 18, seed=73):
            sampling = leaf_sampling(g, PartitionMethod.SPANNING_TREE, 1)
            dist = geodesic_distance_matrix(g)
            sums = dist.sum(axis=1)
            assert sampling.centers[0] == int(np.argmin(sums))

    def test_path4_two_leaves(self, path4):
        sampling = leaf_sampling(path4, PartitionMethod.SPANNING_TREE, 2)
        halves = {frozenset(leaf.nodes) for leaf in sampling.leaves}
        assert halves == {frozenset({0, 1}), frozenset({2, 3})}
        for leaf, center in zip(sampling.leaves, sampling.centers):
            assert center in leaf.nodes

    def test_center_in_leaf_and_optimal(self):
        g = random_connected_graph(20, seed=74)
        sampling = leaf_sampling(g, PartitionMethod.TWO_MEANS, 5, seed=3)
        from graphsig.graph import subgraph_distance_matrix

        for leaf, center in zip(sampling.leaves, sampling.centers):
            members = list(leaf.nodes)
            dist = subgraph_distance_matrix(g, members)
            sums = dist.sum(axis=1)
            assert center == members[int(np.argmin(sums))]


class TestCenterAssign:
    def test_exact_when_leaves_refine_pieces(self):
        g = random_connected_graph(18, seed=75)
        coarse = leaf_sampling(g, PartitionMethod.SPANNING_TREE, 3, seed=1)
        fine = leaf_sampling(g, PartitionMethod.SPANNING_TREE, 9, seed=1)
        values = {frozenset(leaf.nodes): float(i + 1) for i, leaf in enumerate(coarse.leaves)}
        x = np.zeros(18)
        for leaf, value in values.items():
            x[sorted(leaf)] = value
        recovered = center_assign_recover(x[list(fine.centers)], fine)
        assert np.array_equal(recovered, x)

    def test_full_sampling_identity(self, rng):
        g = random_connected_graph(12, seed=76)
        sampling = leaf_sampling(g, PartitionMethod.SPANNING_TREE, 12)
        x = rng.standard_normal(12)
        order = np.argsort(sampling.centers)
        recovered = center_assign_recover(x[list(sampling.centers)], sampling)
        assert np.allclose(recovered, x)
        assert order is not None

    def test_error_bound_holds(self):
        rng = np.random.default_rng(77)
        for g in random_graphs(5, 10, 36, seed=78):
            _, x = random_piecewise_constant(g, 3, rng)
            m = max(2, g.num_nodes // 3)
            sampling = leaf_sampling(g, PartitionMethod.TWO_MEANS, m,
                                     seed=int(rng.integers(99)))
            recovered = center_assign_recover(x[list(sampling.centers)], sampling)
            mislabeled = int(np.sum(x != recovered))
            cuts = count_inconsistent_edges(g, x)
            assert mislabeled <= recovery_error_bound(cuts, sampling)

    def test_sample_count_mismatch(self, grid66):
        sampling = leaf_sampling(grid66, PartitionMethod.SPANNING_TREE, 4)
        with pytest.raises(SampleCountMismatch):
            center_assign_recover(np.zeros(3), sampling)


class TestErrorMetrics:
    def test_bound_formula(self, grid66):
        sampling = leaf_sampling(grid66, PartitionMethod.SPANNING_TREE, 4)
        assert recovery_error_bound(0, sampling) == 0
        assert recovery_error_bound(1, sampling) == sampling.max_leaf_size

    def test_mislabel_extremes(self):
        x = np.array([1.0, 2.0, 1.0, 2.0])
        assert mislabel_fraction(x, x) == 0.0
        assert mislabel_fraction(x, np.array([2.0, 1.0, 2.0, 1.0])) == 1.0
        assert mislabel_fraction(x, np.array([1.0, 2.0, 2.0, 1.0])) == 0.5

    def test_snapping_to_reference_values(self):
        x = np.array([0.0, 10.0, 10.0])
        fuzzy = np.array([0.4, 9.1, 5.0])  # midpoint snaps down
        assert np.array_equal(snap_to_values(x, fuzzy), [0.0, 10.0, 0.0])
        assert mislabel_fraction(x, fuzzy) == pytest.approx(1 / 3)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mislabel_fraction(np.zeros(3), np.zeros(4))
