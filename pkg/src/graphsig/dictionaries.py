"""Representation dictionaries and generative signal models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DisconnectedGraph, InvalidModel
from .graph import Graph, StructureMatrixKind, geodesic_distance_matrix, induced_graph, is_connected, subgraph_distance_matrix
from .partition import LocalSet, LocalSetTree
from .spectral import FourierBasis, fourier_basis_of

POLYNOMIAL = "polynomial"
LSPC = "lspc"
LSPC_WAVELET = "lspc-wavelet"
LSPS_POLY = "lsps-poly"
LSPS_BL = "lsps-bl"


@dataclass(frozen=True)
class AtomInfo:
    """Per-atom provenance: which set, level, degree or frequency, origin."""

    family: str
    level: int | None = None
    set_id: tuple | None = None
    degree: int | None = None
    origin: int | None = None


@dataclass
class Dictionary:
    """Atom matrix (columns are atoms) with aligned per-atom metadata."""

    atoms: np.ndarray
    meta: list
    family: str
    info: dict = field(default_factory=dict)

    @property
    def num_nodes(self) -> int:
        return self.atoms.shape[0]

    @property
    def num_atoms(self) -> int:
        return self.atoms.shape[1]

    def validate(self) -> "Dictionary":
        if self.atoms.ndim != 2:
            raise InvalidModel("atom matrix must be two dimensional")
        if len(self.meta) != self.num_atoms:
            raise InvalidModel("metadata length must match atom count")
        norms = np.linalg.norm(self.atoms, axis=0)
        if np.any(norms == 0):
            raise InvalidModel("zero atoms are not allowed")
        if self.family == LSPC_WAVELET:
            n, m = self.atoms.shape
            if m != n:
                raise InvalidModel("a wavelet basis must be square")
            gram = self.atoms.T @ self.atoms
            if np.abs(gram - np.eye(n)).max() > 1e-8:
                raise InvalidModel("wavelet basis is not orthonormal")
            sums = self.atoms[:, 1:].sum(axis=0)
            if sums.size and np.abs(sums).max() > 1e-8:
                raise InvalidModel("wavelet vectors after the first must sum to zero")
        return self


def polynomial_dictionary(graph: Graph, degree: int) -> Dictionary:
    """Distance-power dictionary ``[1 | D^(1) | ... | D^(K)]``.

    ``D^(k)[i, j] = d(v_i, v_j)^k`` with one origin node per column, for
    KN + 1 atoms in total. Requires a connected graph so distances stay
    finite.
    """
    if degree < 0:
        raise InvalidModel(f"degree must be nonnegative, got {degree}")
    n = graph.num_nodes
    dist = geodesic_distance_matrix(graph)
    if not np.all(np.isfinite(dist)):
        raise DisconnectedGraph("polynomial dictionary needs finite distances")
    cols = [np.ones((n, 1))]
    meta = [AtomInfo(family=POLYNOMIAL, degree=0)]
    for k in range(1, degree + 1):
        cols.append(dist.T**k)
        meta.extend(AtomInfo(family=POLYNOMIAL, degree=k, origin=j) for j in range(n))
    atoms = np.hstack(cols)
    keep = np.linalg.norm(atoms, axis=0) > 0  # N = 1 makes distance columns vanish
    atoms = atoms[:, keep]
    meta = [m for m, k in zip(meta, keep) if k]
    return Dictionary(atoms=atoms, meta=meta, family=POLYNOMIAL,
                      info={"K": degree, "N": n}).validate()


def lspc_dictionary(tree: LocalSetTree) -> Dictionary:
    """Indicator atoms of every set in a full decomposition tree (2N - 1)."""
    tree.require_full()
    n = tree.num_nodes
    nodes = tree.all_nodes()
    atoms = np.zeros((n, len(nodes)))
    meta = []
    for col, tn in enumerate(nodes):
        atoms[:, col] = tn.local_set.indicator(n)
        meta.append(AtomInfo(family=LSPC, level=tn.level, set_id=tn.set_id))
    return Dictionary(atoms=atoms, meta=meta, family=LSPC,
                      info={"N": n, "T": tree.depth}).validate()


def downsampling_matrix(tree: LocalSetTree) -> np.ndarray:
    """Pairing matrix turning indicator atoms into the wavelet basis.

    The first column rescales the root indicator; each later column
    combines the two children of one partition with weights
    ``g(d_i, d_j) = sqrt(|S_j| / ((|S_i| + |S_j|) |S_i|))``, sign-split so
    the product with the indicator dictionary has unit-norm, zero-sum
    columns.
    """
    tree.require_full()
    nodes = tree.all_nodes()
    row_of = {tn.set_id: i for i, tn in enumerate(nodes)}
    parents = tree.partitions()
    n = tree.num_nodes
    out = np.zeros((len(nodes), n))
    out[row_of[tree.root.set_id], 0] = 1.0 / np.sqrt(n)
    for col, parent in enumerate(parents, start=1):
        s1 = len(parent.left.local_set)
        s2 = len(parent.right.local_set)
        g12 = np.sqrt(s2 / ((s1 + s2) * s1))
        g21 = np.sqrt(s1 / ((s1 + s2) * s2))
        out[row_of[parent.left.set_id], col] = g12
        out[row_of[parent.right.set_id], col] = -g21
    return out


def lspc_wavelet_basis(tree: LocalSetTree) -> Dictionary:
    """Orthonormal piecewise-constant wavelet basis of a full tree.

    The first vector is the constant ``1/sqrt(N)``; each bipartition of a
    set into S1, S2 contributes
    ``sqrt(|S1||S2|/(|S1|+|S2|)) (1_S1/|S1| - 1_S2/|S2|)`` in level order.
    """
    tree.require_full()
    n = tree.num_nodes
    atoms = np.zeros((n, n))
    atoms[:, 0] = 1.0 / np.sqrt(n)
    meta = [AtomInfo(family=LSPC_WAVELET, level=0, set_id=tree.root.set_id)]
    for col, parent in enumerate(tree.partitions(), start=1):
        left = parent.left.local_set
        right = parent.right.local_set
        s1, s2 = len(left), len(right)
        scale = np.sqrt(s1 * s2 / (s1 + s2))
        vec = scale * (left.indicator(n) / s1 - right.indicator(n) / s2)
        atoms[:, col] = vec
        meta.append(AtomInfo(family=LSPC_WAVELET, level=parent.level + 1,
                             set_id=parent.set_id))
    return Dictionary(atoms=atoms, meta=meta, family=LSPC_WAVELET,
                      info={"N": n, "T": tree.depth}).validate()


def lsps_dictionary(graph: Graph, tree: LocalSetTree, degree: int,
                    variant: str = POLYNOMIAL,
                    basis_kind: StructureMatrixKind = StructureMatrixKind.LAPLACIAN_UNNORMALIZED,
                    ) -> Dictionary:
    """Piecewise-smooth dictionary: per-set smooth atoms, zero padded.

    With the polynomial variant each tree set contributes its indicator
    plus distance-power atoms computed inside the induced subgraph. With
    the bandlimited variant each set contributes the first
    ``min(degree, |S|)`` eigenvectors of its induced structure matrix.
    """
    tree.require_full()
    n = graph.num_nodes
    if variant == POLYNOMIAL:
        if degree < 0:
            raise InvalidModel("polynomial variant needs degree >= 0")
    elif variant == "bandlimited":
        if degree < 1:
            raise InvalidModel("bandlimited variant needs bandwidth >= 1")
    else:
        raise InvalidModel(f"unknown variant {variant!r}")
    family = LSPS_POLY if variant == POLYNOMIAL else LSPS_BL
    cols, meta = [], []
    for tn in tree.all_nodes():
        members = list(tn.local_set.nodes)
        size = len(members)
        if variant == POLYNOMIAL:
            cols.append(tn.local_set.indicator(n))
            meta.append(AtomInfo(family=family, level=tn.level, set_id=tn.set_id, degree=0))
            if size >= 2 and degree >= 1:
                dist = subgraph_distance_matrix(graph, members)
                for local_origin, origin in enumerate(members):
                    for k in range(1, degree + 1):
                        col = np.zeros(n)
                        col[members] = dist[:, local_origin] ** k
                        cols.append(col)
                        meta.append(AtomInfo(family=family, level=tn.level,
                                             set_id=tn.set_id, degree=k, origin=origin))
        else:
            if size == 1:
                cols.append(tn.local_set.indicator(n))
                meta.append(AtomInfo(family=family, level=tn.level, set_id=tn.set_id, degree=1))
                continue
            sub = induced_graph(graph, members)
            basis = fourier_basis_of(sub, basis_kind)
            for k in range(min(degree, size)):
                col = np.zeros(n)
                col[members] = basis.V[:, k]
                cols.append(col)
                meta.append(AtomInfo(family=family, level=tn.level,
                                     set_id=tn.set_id, degree=k + 1))
    atoms = np.column_stack(cols)
    return Dictionary(atoms=atoms, meta=meta, family=family,
                      info={"K": degree, "N": n, "T": tree.depth,
                            "variant": variant}).validate()


# -- generative signal models -------------------------------------------------


@dataclass(frozen=True)
class PolynomialModel:
    """x = [1 | D^(1) | ... | D^(K)] a over the whole graph."""

    degree: int
    coefficients: tuple


@dataclass(frozen=True)
class BandlimitedModel:
    """x = V_(K) a for the chosen structure matrix; K = len(a)."""

    kind: StructureMatrixKind
    coefficients: tuple


@dataclass(frozen=True)
class PiecewiseConstantModel:
    """x = sum_c a_c 1_{S_c} over disjoint connected pieces covering V."""

    pieces: tuple
    values: tuple | None = None  # drawn as random integers when omitted


@dataclass(frozen=True)
class PolyPiece:
    """One piece of a piecewise-polynomial signal.

    ``terms`` holds (degree, origin, coefficient) triples; distances are
    measured inside the piece's induced subgraph.
    """

    constant: float
    terms: tuple = ()


@dataclass(frozen=True)
class PiecewisePolynomialModel:
    pieces: tuple
    specs: tuple


@dataclass(frozen=True)
class PiecewiseBandlimitedModel:
    """Per-piece bandlimited signals in the induced-subgraph bases."""

    pieces: tuple
    coefficients: tuple
    kind: StructureMatrixKind = StructureMatrixKind.LAPLACIAN_UNNORMALIZED


def _check_pieces(graph: Graph, pieces) -> list:
    sets = [p if isinstance(p, LocalSet) else LocalSet(tuple(p)) for p in pieces]
    covered = []
    for s in sets:
        covered.extend(s.nodes)
    if len(covered) != len(set(covered)):
        raise InvalidModel("pieces overlap")
    if set(covered) != set(range(graph.num_nodes)):
        raise InvalidModel("pieces must cover every node")
    for s in sets:
        if not is_connected(graph, restrict_to=s.nodes):
            raise InvalidModel(f"piece {s.nodes} is not connected")
    return sets


def _subgraph_basis(graph: Graph, members: list,
                    kind: StructureMatrixKind) -> FourierBasis:
    if len(members) == 1:
        return FourierBasis(V=np.ones((1, 1)), U=np.ones((1, 1)),
                            eigenvalues=np.zeros(1), kind=kind)
    return fourier_basis_of(induced_graph(graph, members), kind)


def synthesize(graph: Graph, model, rng=None) -> np.ndarray:
    """Evaluate a generative signal model exactly.

    ``rng`` is only consulted for fields the model leaves unspecified
    (currently the values of a piecewise-constant model).
    """
    n = graph.num_nodes
    if isinstance(model, PolynomialModel):
        dictionary = polynomial_dictionary(graph, model.degree)
        a = np.asarray(model.coefficients, dtype=float)
        if a.shape[0] != dictionary.num_atoms:
            raise InvalidModel(f"expected {dictionary.num_atoms} coefficients, got {a.shape[0]}")
        return dictionary.atoms @ a
    if isinstance(model, BandlimitedModel):
        a = np.asarray(model.coefficients, dtype=float)
        if not 1 <= a.shape[0] <= n:
            raise InvalidModel("bandwidth must lie in [1, N]")
        basis = fourier_basis_of(graph, model.kind)
        return basis.V[:, : a.shape[0]] @ a
    if isinstance(model, PiecewiseConstantModel):
        sets = _check_pieces(graph, model.pieces)
        if model.values is None:
            if rng is None:
                raise InvalidModel("random piece values need an rng")
            values = rng.integers(1, 10, size=len(sets)).astype(float)
        else:
            values = np.asarray(model.values, dtype=float)
            if values.shape[0] != len(sets):
                raise InvalidModel("one value per piece required")
        x = np.zeros(n)
        for s, v in zip(sets, values):
            x[list(s.nodes)] = v
        return x
    if isinstance(model, PiecewisePolynomialModel):
        sets = _check_pieces(graph, model.pieces)
        if len(model.specs) != len(sets):
            raise InvalidModel("one spec per piece required")
        x = np.zeros(n)
        for s, spec in zip(sets, model.specs):
            members = list(s.nodes)
            x[members] += spec.constant
            if spec.terms:
                dist = subgraph_distance_matrix(graph, members)
                pos = {v: i for i, v in enumerate(members)}
                for k, origin, coeff in spec.terms:
                    if origin not in pos:
                        raise InvalidModel(f"origin {origin} outside its piece")
                    x[members] += coeff * dist[:, pos[origin]] ** int(k)
        return x
    if isinstance(model, PiecewiseBandlimitedModel):
        sets = _check_pieces(graph, model.pieces)
        if len(model.coefficients) != len(sets):
            raise InvalidModel("one coefficient vector per piece required")
        x = np.zeros(n)
        for s, coeffs in zip(sets, model.coefficients):
            members = list(s.nodes)
            a = np.asarray(coeffs, dtype=float)
            if not 1 <= a.shape[0] <= len(members):
                raise InvalidModel("piece bandwidth must lie in [1, |S|]")
            basis = _subgraph_basis(graph, members, model.kind)
            x[members] += basis.V[:, : a.shape[0]] @ a
        return x
    raise InvalidModel(f"unknown signal model {type(model).__name__}")


# -- model helpers -------------------------------------------------------------


def voronoi_pieces(graph: Graph, centers) -> list:
    """Partition nodes by nearest center (geodesic); cells are connected.

    Ties go to the earliest center in the list, which keeps every cell
    connected along shortest paths.
    """
    centers = [int(c) for c in centers]
    dist = geodesic_distance_matrix(graph, indices=centers)
    owner = np.argmin(dist, axis=0)  # first minimum wins ties
    return [LocalSet(tuple(np.flatnonzero(owner == i)))
            for i in range(len(centers))]


def random_piecewise_constant(graph: Graph, num_pieces: int, rng,
                              low: int = 1, high: int = 10):
    """Random community-centered piecewise-constant model and its signal."""
    centers = rng.choice(graph.num_nodes, size=num_pieces, replace=False)
    pieces = voronoi_pieces(graph, centers)
    values = rng.integers(low, high + 1, size=len(pieces)).astype(float)
    model = PiecewiseConstantModel(pieces=tuple(pieces), values=tuple(values))
    return model, synthesize(graph, model)
