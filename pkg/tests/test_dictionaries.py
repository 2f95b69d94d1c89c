import numpy as np
import pytest

from graphsig.dictionaries import (
    BandlimitedModel,
    PiecewiseBandlimitedModel,
    PiecewiseConstantModel,
    PiecewisePolynomialModel,
    PolyPiece,
    PolynomialModel,
    downsampling_matrix,
    lspc_dictionary,
    lspc_wavelet_basis,
    lsps_dictionary,
    polynomial_dictionary,
    random_piecewise_constant,
    synthesize,
    voronoi_pieces,
)
from graphsig.errors import DisconnectedGraph, InvalidModel
from graphsig.generators import path_graph, random_connected_graph
from graphsig.graph import Graph, StructureMatrixKind, count_inconsistent_edges, geodesic_distance_matrix, is_connected
from graphsig.partition import LocalSet, PartitionMethod, build_tree

from conftest import random_graphs

ALL_METHODS = list(PartitionMethod)


def haar_matrix(n):
    """Classical orthonormal Haar basis (columns), by recursive splitting."""
    assert n & (n - 1) == 0

    def rows(m):
        if m == 1:
            return np.ones((1, 1))
        prev = rows(m // 2)
        top = np.kron(prev, np.array([1.0, 1.0]))
        bottom = np.kron(np.eye(m // 2), np.array([1.0, -1.0]))
        return np.vstack([top, bottom])

    out = rows(n)
    return (out / np.linalg.norm(out, axis=1)[:, None]).T


class TestPolynomialDictionary:
    def test_degree_zero_is_all_ones(self, path4):
        d = polynomial_dictionary(path4, 0)
        assert d.num_atoms == 1
        assert np.array_equal(d.atoms[:, 0], np.ones(4))

    def test_path3_origin_column(self):
        d = polynomial_dictionary(path_graph(3), 1)
        assert np.array_equal(d.atoms[:, 1], [0, 1, 2])

    @pytest.mark.parametrize("n,degree", [(5, 1), (7, 2), (9, 3)])
    def test_atom_count_formula(self, n, degree):
        d = polynomial_dictionary(random_connected_graph(n, seed=n), degree)
        assert d.num_atoms == degree * n + 1
        # same formula at the road-network scale quoted for this dictionary
        assert 2 * 2642 + 1 == 5285

    def test_disconnected_rejected(self):
        with pytest.raises(DisconnectedGraph):
            polynomial_dictionary(Graph(3, edges=((0, 1, 1.0),)), 1)


class TestIndicatorDictionary:
    def test_toy_tree_has_seven_atoms(self, path4):
        tree = build_tree(path4, PartitionMethod.SPANNING_TREE)
        assert lspc_dictionary(tree).num_atoms == 7

    def test_single_node_graph(self):
        tree = build_tree(Graph(1), PartitionMethod.SPANNING_TREE)
        d = lspc_dictionary(tree)
        assert d.num_atoms == 1 and d.atoms[0, 0] == 1.0

    def test_atom_count_and_connected_supports(self):
        for g in random_graphs(3, 6, 40, seed=40):
            tree = build_tree(g, PartitionMethod.TWO_MEANS, seed=1)
            d = lspc_dictionary(tree)
            assert d.num_atoms == 2 * g.num_nodes - 1
            for j in range(d.num_atoms):
                support = np.flatnonzero(d.atoms[:, j])
                assert is_connected(g, restrict_to=support)


class TestWaveletBasis:
    def test_toy_vectors(self, path4):
        tree = build_tree(path4, PartitionMethod.SPANNING_TREE)
        w = lspc_wavelet_basis(tree).atoms
        assert np.allclose(w[:, 0], [0.5, 0.5, 0.5, 0.5], atol=1e-15, rtol=0)
        assert np.allclose(w[:, 1], [0.5, 0.5, -0.5, -0.5], atol=1e-15, rtol=0)
        assert np.allclose(w[:, 2], [1 / np.sqrt(2), -1 / np.sqrt(2), 0, 0],
                           atol=1e-15, rtol=0)

    @pytest.mark.parametrize("method", ALL_METHODS)
    def test_orthonormal_on_random_graphs(self, method):
        for g in random_graphs(3, 8, 60, seed=41, weighted=True):
            tree = build_tree(g, method, seed=3)
            w = lspc_wavelet_basis(tree).atoms
            gram = w.T @ w
            assert np.abs(gram - np.eye(g.num_nodes)).max() <= 1e-10

    def test_matches_indicator_times_pairing(self):
        for g in random_graphs(3, 5, 30, seed=42):
            tree = build_tree(g, PartitionMethod.SPANNING_TREE)
            product = lspc_dictionary(tree).atoms @ downsampling_matrix(tree)
            assert np.abs(product - lspc_wavelet_basis(tree).atoms).max() <= 1e-10

    def test_even_partition_reproduces_haar(self):
        g = path_graph(8)
        tree = build_tree(g, PartitionMethod.SPANNING_TREE)
        w = lspc_wavelet_basis(tree).atoms
        haar = haar_matrix(8)
        assert w.shape == haar.shape
        for j in range(8):
            match = np.allclose(w[:, j], haar[:, j], atol=1e-12)
            flipped = np.allclose(w[:, j], -haar[:, j], atol=1e-12)
            assert match or flipped

    def test_sparsity_bound_with_scaling_term(self):
        # nonzero wavelet coefficients stay below cuts * depth plus one
        # scaling coefficient, for arbitrary piecewise-constant signals
        rng = np.random.default_rng(43)
        for g in random_graphs(6, 8, 40, seed=44):
            tree = build_tree(g, ALL_METHODS[int(rng.integers(3))], seed=int(rng.integers(99)))
            w = lspc_wavelet_basis(tree).atoms
            pieces = int(rng.integers(1, 5))
            centers = rng.choice(g.num_nodes, size=pieces, replace=False)
            values = rng.integers(1, 9, size=pieces).astype(float)
            model = PiecewiseConstantModel(tuple(voronoi_pieces(g, centers)), tuple(values))
            x = synthesize(g, model)
            cuts = count_inconsistent_edges(g, x)
            nonzeros = int(np.count_nonzero(np.abs(w.T @ x) > 1e-8 * max(1.0, np.abs(x).max())))
            assert nonzeros <= 1 + cuts * tree.depth


class TestPiecewiseSmoothDictionary:
    def test_degree_zero_matches_indicators(self):
        g = random_connected_graph(10, seed=45)
        tree = build_tree(g, PartitionMethod.SPANNING_TREE)
        assert lsps_dictionary(g, tree, 0).num_atoms == lspc_dictionary(tree).num_atoms

    def test_singleton_sets_contribute_one_atom(self, path4):
        tree = build_tree(path4, PartitionMethod.SPANNING_TREE)
        d = lsps_dictionary(path4, tree, 3)
        singleton_atoms = [m for m in d.meta if m.set_id == (2, 1)]
        assert len(singleton_atoms) == 1

    def test_root_block_size(self, path4):
        tree = build_tree(path4, PartitionMethod.SPANNING_TREE)
        d = lsps_dictionary(path4, tree, 1)
        root_atoms = [m for m in d.meta if m.set_id == (0, 1)]
        assert len(root_atoms) == 1 + 1 * 4

    def test_bandlimited_variant_atom_counts(self):
        g = random_connected_graph(12, seed=46)
        tree = build_tree(g, PartitionMethod.TWO_MEANS, seed=2)
        k = 3
        d = lsps_dictionary(g, tree, k, variant="bandlimited")
        expected = sum(min(k, len(node.local_set)) for node in tree.all_nodes())
        assert d.num_atoms == expected

    def test_zero_padding_outside_sets(self):
        g = random_connected_graph(9, seed=47)
        tree = build_tree(g, PartitionMethod.SPANNING_TREE)
        d = lsps_dictionary(g, tree, 2)
        sets = {node.set_id: set(node.local_set.nodes) for node in tree.all_nodes()}
        for j, info in enumerate(d.meta):
            outside = np.ones(g.num_nodes, dtype=bool)
            outside[sorted(sets[info.set_id])] = False
            assert not np.any(d.atoms[outside, j])


class TestSynthesize:
    def test_piecewise_constant_cut_count(self):
        for g in random_graphs(4, 8, 30, seed=48):
            rng = np.random.default_rng(49)
            centers = rng.choice(g.num_nodes, size=3, replace=False)
            pieces = voronoi_pieces(g, centers)
            values = (1.0, 2.0, 3.0)
            x = synthesize(g, PiecewiseConstantModel(tuple(pieces), values))
            boundary = sum(1 for s, d_, _ in g.edges if x[s] != x[d_])
            assert count_inconsistent_edges(g, x) == boundary

    def test_single_piece_is_constant(self, grid66):
        piece = LocalSet(tuple(range(36)))
        x = synthesize(grid66, PiecewiseConstantModel((piece,), (7.0,)))
        assert np.array_equal(x, np.full(36, 7.0))
        assert count_inconsistent_edges(grid66, x) == 0

    def test_bandlimited_first_vector_constant(self, grid66):
        x = synthesize(grid66, BandlimitedModel(StructureMatrixKind.LAPLACIAN_UNNORMALIZED,
                                                coefficients=(1.0,)))
        assert np.abs(x - x[0]).max() <= 1e-10

    def test_polynomial_model_matches_dictionary(self, rng):
        g = random_connected_graph(8, seed=50)
        d = polynomial_dictionary(g, 2)
        a = rng.standard_normal(d.num_atoms)
        x = synthesize(g, PolynomialModel(2, tuple(a)))
        assert np.allclose(x, d.atoms @ a, atol=1e-12)

    def test_pairwise_smoothness_of_degree_one(self, rng):
        # degree-1 signals vary at most ||a||_1 times the node distance
        for g in random_graphs(4, 6, 20, seed=51):
            d = polynomial_dictionary(g, 1)
            a = rng.standard_normal(d.num_atoms)
            x = d.atoms @ a
            dist = geodesic_distance_matrix(g)
            bound = np.abs(a).sum()
            for i in range(g.num_nodes):
                for j in range(g.num_nodes):
                    assert abs(x[i] - x[j]) <= bound * dist[i, j] + 1e-9

    def test_piecewise_polynomial_origin_validated(self, path4):
        pieces = (LocalSet((0, 1)), LocalSet((2, 3)))
        spec = PolyPiece(constant=1.0, terms=((1, 3, 2.0),))  # origin 3 not in piece 0
        with pytest.raises(InvalidModel):
            synthesize(path4, PiecewisePolynomialModel(pieces, (spec, PolyPiece(0.0))))

    def test_piecewise_polynomial_evaluation(self, path4):
        pieces = (LocalSet((0, 1)), LocalSet((2, 3)))
        specs = (PolyPiece(constant=1.0, terms=((1, 0, 2.0),)), PolyPiece(constant=-1.0))
        x = synthesize(path4, PiecewisePolynomialModel(pieces, specs))
        assert np.array_equal(x, [1.0, 3.0, -1.0, -1.0])

    def test_piecewise_bandlimited_piece_bandwidth_checked(self, path4):
        pieces = (LocalSet((0, 1)), LocalSet((2, 3)))
        with pytest.raises(InvalidModel):
            synthesize(path4, PiecewiseBandlimitedModel(pieces, ((1.0, 2.0, 3.0), (1.0,))))

    def test_overlapping_pieces_rejected(self, path4):
        with pytest.raises(InvalidModel):
            synthesize(path4, PiecewiseConstantModel(
                (LocalSet((0, 1, 2)), LocalSet((2, 3))), (1.0, 2.0)))

    def test_uncovered_pieces_rejected(self, path4):
        with pytest.raises(InvalidModel):
            synthesize(path4, PiecewiseConstantModel((LocalSet((0, 1)),), (1.0,)))

    def test_random_pc_values_need_rng(self, path4):
        model = PiecewiseConstantModel((LocalSet((0, 1)), LocalSet((2, 3))), None)
        with pytest.raises(InvalidModel):
            synthesize(path4, model)
        x = synthesize(path4, model, rng=np.random.default_rng(1))
        assert x[0] == x[1] and x[2] == x[3]

    def test_voronoi_cells_connected(self):
        for g in random_graphs(4, 10, 40, seed=52):
            rng = np.random.default_rng(53)
            centers = rng.choice(g.num_nodes, size=4, replace=False)
            for cell in voronoi_pieces(g, centers):
                assert is_connected(g, restrict_to=cell.nodes)

    def test_random_pc_helper_round_trip(self):
        g = random_connected_graph(20, seed=54)
        model, x = random_piecewise_constant(g, 4, np.random.default_rng(5))
        assert np.array_equal(x, synthesize(g, model))
