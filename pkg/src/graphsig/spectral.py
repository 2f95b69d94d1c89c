"""Graph Fourier bases, variation, bandlimited spaces, localization, uncertainty."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.csgraph as csgraph

from .errors import (
    AsymmetricInput,
    BandOutOfRange,
    DimensionMismatch,
    EmptySet,
    NonConvergedEigensolve,
    NotUnitNorm,
    ZeroSignal,
    ZeroSpectralRadius,
)
from .graph import Graph, StructureMatrixKind, geodesic_distance_matrix, graph_diameter

_SYM_TOL = 1e-10


@dataclass(frozen=True)
class FourierBasis:
    """Eigenpairs of a structure matrix, ordered from low to high frequency.

    ``V`` holds the basis vectors as columns (inverse transform), ``U`` is
    the forward transform with ``U @ V = I``. For symmetric kinds
    ``U = V.T`` and the columns of ``V`` are orthonormal. Laplacian kinds
    are ordered by ascending eigenvalue, shift kinds by descending
    eigenvalue, which both run from smooth to oscillatory.
    """

    V: np.ndarray
    U: np.ndarray
    eigenvalues: np.ndarray
    kind: StructureMatrixKind

    @property
    def num_nodes(self) -> int:
        return self.V.shape[0]

    def transform(self, x: np.ndarray) -> np.ndarray:
        return self.U @ np.asarray(x, dtype=float)

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        return self.V @ np.asarray(coeffs, dtype=float)


def _is_symmetric(matrix: np.ndarray) -> bool:
    scale = max(1.0, float(np.abs(matrix).max()) if matrix.size else 1.0)
    return bool(np.allclose(matrix, matrix.T, atol=_SYM_TOL * scale, rtol=0.0))


def _stationary_scaling(matrix: np.ndarray) -> np.ndarray:
    """Recover a positive row-scaling that symmetrizes a transition-type matrix.

    For P = diag(d)^-1 W with symmetric W the vector d (up to a scale per
    connected component) is a nonnegative left fixed point of P, found here
    per component of the sparsity pattern.
    """
    n = matrix.shape[0]
    pattern = np.abs(matrix) > 0
    ncomp, labels = csgraph.connected_components(pattern, directed=False)
    d = np.zeros(n)
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        if idx.size == 1:
            d[idx] = 1.0
            continue
        block = matrix[np.ix_(idx, idx)]
        vals, vecs = np.linalg.eig(block.T)
        k = int(np.argmin(np.abs(vals - 1.0)))
        v = np.real(vecs[:, k])
        if np.abs(v).max() == 0:
            raise AsymmetricInput("could not recover degree scaling from matrix")
        v = v * np.sign(v[np.argmax(np.abs(v))])
        if np.any(v <= 0):
            raise AsymmetricInput("matrix is not a transition matrix of an undirected graph")
        d[idx] = v
    return d


def _order_and_sign(eigenvalues: np.ndarray, V: np.ndarray, ascending: bool):
    order = np.argsort(eigenvalues if ascending else -eigenvalues, kind="stable")
    lam = eigenvalues[order]
    V = V[:, order]
    # deterministic ordering inside (numerically) repeated eigenvalues
    scale = max(1.0, float(np.abs(lam).max()))
    group_start = 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or abs(lam[i] - lam[group_start]) > 1e-8 * scale:
            if i - group_start > 1:
                block = V[:, group_start:i]
                keys = [int(np.argmax(np.abs(block[:, j]))) for j in range(block.shape[1])]
                sub = np.argsort(keys, kind="stable")
                V[:, group_start:i] = block[:, sub]
                lam[group_start:i] = lam[group_start:i][sub]
            group_start = i
    # sign: first entry that is not negligible must be positive
    for j in range(V.shape[1]):
        col = V[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * max(1.0, np.abs(col).max()))
        if nz.size and col[nz[0]] < 0:
            V[:, j] = -col
    return lam, V


def fourier_basis(matrix: np.ndarray, kind: StructureMatrixKind,
                  degrees: np.ndarray | None = None) -> FourierBasis:
    """Eigendecompose a structure matrix into a frequency-ordered basis.

    Transition-type matrices are asymmetric; they are handled through the
    symmetric similarity transform ``diag(d)^1/2 P diag(d)^-1/2`` so the
    spectrum stays real and the eigenvectors stable. Pass ``degrees`` to
    supply d directly, otherwise it is recovered from the matrix.

    Raises
    ------
    AsymmetricInput
        If the (similarity-transformed) matrix is not symmetric, which in
        particular rejects matrices of directed graphs.
    NonConvergedEigensolve
        If the underlying eigensolver fails.
    """
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise DimensionMismatch(f"expected a square matrix, got {matrix.shape}")
    transition_like = kind in (StructureMatrixKind.TRANSITION,
                               StructureMatrixKind.LAPLACIAN_TRANSITION)
    if transition_like:
        if degrees is None:
            base = matrix if kind is StructureMatrixKind.TRANSITION else np.eye(n) - matrix
            d = _stationary_scaling(base)
        else:
            d = np.asarray(degrees, dtype=float)
            if d.shape != (n,):
                raise DimensionMismatch("degrees must have one entry per node")
            if np.any(d <= 0):
                raise AsymmetricInput("degrees must be positive for transition kinds")
        sqrt_d = np.sqrt(d)
        C = (sqrt_d[:, None] * matrix) / sqrt_d[None, :]
        if not _is_symmetric(C):
            raise AsymmetricInput(f"{kind.value} matrix does not symmetrize; directed input?")
        C = 0.5 * (C + C.T)
        try:
            lam, Y = np.linalg.eigh(C)
        except np.linalg.LinAlgError as exc:
            raise NonConvergedEigensolve(str(exc)) from None
        V = Y / sqrt_d[:, None]
        V = V / np.linalg.norm(V, axis=0)
    else:
        if not _is_symmetric(matrix):
            raise AsymmetricInput(f"{kind.value} matrix must be symmetric; directed input?")
        try:
            lam, V = np.linalg.eigh(0.5 * (matrix + matrix.T))
        except np.linalg.LinAlgError as exc:
            raise NonConvergedEigensolve(str(exc)) from None
    lam, V = _order_and_sign(lam, V, ascending=kind.is_laplacian)
    if transition_like:
        # v_i^T diag(d) v_j vanishes for i != j, so scaled rows of (diag(d) V)^T
        # give the left inverse
        U = (V * np.asarray(d, dtype=float)[:, None]).T
        U = U / np.sum(U.T * V, axis=0)[:, None]
    else:
        U = V.T
    return FourierBasis(V=V, U=U, eigenvalues=lam, kind=kind)


def fourier_basis_of(graph: Graph, kind: StructureMatrixKind) -> FourierBasis:
    """Convenience wrapper: build the structure matrix, then the basis."""
    from .graph import build_matrix

    return fourier_basis(build_matrix(graph, kind), kind, degrees=graph.degrees)


def spectral_radius(matrix: np.ndarray) -> float:
    vals = np.linalg.eigvals(matrix)
    return float(np.abs(vals).max())


def variation(x: np.ndarray, matrix: np.ndarray, kind: StructureMatrixKind) -> float:
    """Quadratic smoothness of a signal under the given structure matrix.

    Shift kinds use ``|| x - A x / |lambda_max| ||_2^2`` with lambda_max the
    largest-magnitude eigenvalue; Laplacian kinds use ``x^T L x``.
    """
    x = np.asarray(x, dtype=float)
    matrix = np.asarray(matrix, dtype=float)
    if x.shape[0] != matrix.shape[0]:
        raise DimensionMismatch(f"signal length {x.shape[0]} vs matrix {matrix.shape}")
    if kind.is_shift:
        radius = spectral_radius(matrix)
        if radius <= 1e-300:
            raise ZeroSpectralRadius("shift variation undefined for zero spectral radius")
        diff = x - matrix @ x / radius
        return float(diff @ diff)
    return float(x @ (matrix @ x))


def bandlimited_project(basis: FourierBasis, K: int, x: np.ndarray) -> np.ndarray:
    """Keep the first K frequency coefficients and resynthesize."""
    n = basis.num_nodes
    if not 1 <= K <= n:
        raise BandOutOfRange(f"K={K} outside [1, {n}]")
    x = np.asarray(x, dtype=float)
    if x.shape[0] != n:
        raise DimensionMismatch("signal length does not match basis")
    coeffs = basis.U[:K] @ x
    return basis.V[:, :K] @ coeffs


def sample_bandlimited(basis: FourierBasis, K: int, rng) -> np.ndarray:
    """Random unit-norm signal in the span of the first K basis vectors."""
    if not 1 <= K <= basis.num_nodes:
        raise BandOutOfRange(f"K={K} outside [1, {basis.num_nodes}]")
    a = rng.standard_normal(K)
    x = basis.V[:, :K] @ a
    norm = np.linalg.norm(x)
    if norm == 0:
        return sample_bandlimited(basis, K, rng)
    return x / norm


@dataclass(frozen=True)
class LocalizationReport:
    """Vertex-domain localization summary of one signal.

    ipr is the fourth-moment participation ratio in [1/N, 1]; ecr is the
    fraction S*/N of entries holding the target energy share; ngd is the
    diameter-normalized mean geodesic spread of that energy support, set
    to 0 (and flagged) when the support has fewer than two nodes.
    """

    ipr: float
    ecr: float
    ngd: float
    s_star: int
    support: tuple
    ngd_defined: bool


def localization_report(graph: Graph, x: np.ndarray, energy: float = 0.95,
                        distances: np.ndarray | None = None) -> LocalizationReport:
    """IPR, ECR and NGD of a signal.

    ``distances`` may carry a precomputed all-pairs geodesic matrix to
    avoid recomputing it per signal.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[0] != graph.num_nodes:
        raise DimensionMismatch("signal length does not match graph")
    sq = x * x
    total = sq.sum()
    if total == 0:
        raise ZeroSignal("localization metrics undefined for the zero signal")
    ipr = float((sq * sq).sum() / total**2)

    order = np.lexsort((np.arange(x.shape[0]), -np.abs(x)))
    cumulative = np.cumsum(sq[order])
    s_star = int(np.searchsorted(cumulative, energy * total - 1e-12 * total) + 1)
    s_star = min(s_star, x.shape[0])
    ecr = s_star / x.shape[0]

    support = tuple(sorted(int(i) for i in order[:s_star]))
    if len(support) < 2:
        return LocalizationReport(ipr, ecr, 0.0, s_star, support, ngd_defined=False)
    if distances is None:
        distances = geodesic_distance_matrix(graph)
    diameter = graph_diameter(graph, distances=distances)
    if diameter == 0:
        return LocalizationReport(ipr, ecr, 0.0, s_star, support, ngd_defined=False)
    idx = np.asarray(support)
    pair = distances[np.ix_(idx, idx)]
    iu = np.triu_indices(len(idx), k=1)
    vals = pair[iu]
    vals = np.where(np.isfinite(vals), vals, diameter)  # dispersed support scores high
    mean_dist = float(vals.mean())
    return LocalizationReport(ipr, ecr, mean_dist / diameter, s_star, support, ngd_defined=True)


@dataclass(frozen=True)
class UncertaintyReport:
    """Both sides of the vertex/spectrum concentration inequality."""

    eps_vertex: float
    eps_spectrum: float
    lhs: float
    rhs: float
    holds: bool


def uncertainty_check(basis: FourierBasis, vertex_set, band_set,
                      x: np.ndarray) -> UncertaintyReport:
    """Evaluate the vertex/spectrum uncertainty inequality for one signal.

    eps_vertex is the energy of x outside the vertex set, eps_spectrum the
    energy outside the band projection. The certified lower bound on
    ``|vertex_set| * |band_set|`` degenerates to 0 once the two
    concentrations sum to 1 or more, making the inequality vacuous.
    """
    x = np.asarray(x, dtype=float)
    n = basis.num_nodes
    if x.shape[0] != n:
        raise DimensionMismatch("signal length does not match basis")
    if abs(np.linalg.norm(x) - 1.0) > 1e-8:
        raise NotUnitNorm(f"need a unit-norm signal, got norm {np.linalg.norm(x)}")
    gamma = sorted(set(int(i) for i in vertex_set))
    omega = sorted(set(int(i) for i in band_set))
    if not gamma or not omega:
        raise EmptySet("vertex and band sets must be nonempty")
    if gamma[0] < 0 or gamma[-1] >= n or omega[0] < 0 or omega[-1] >= n:
        raise DimensionMismatch("set indices out of range")

    masked = np.zeros(n)
    masked[gamma] = x[gamma]
    eps_vertex = float(np.sum((x - masked) ** 2))

    V_sub = basis.V[:, omega]
    U_sub = basis.U[omega]
    eps_spectrum = float(np.sum((x - V_sub @ (U_sub @ x)) ** 2))

    lhs = float(len(gamma) * len(omega))
    concentration = eps_vertex + eps_spectrum
    if concentration >= 1.0:
        rhs = 0.0
    else:
        max_entry = float(np.abs(U_sub).max())
        rhs = (1.0 - concentration) ** 2 / max_entry**2
    return UncertaintyReport(eps_vertex, eps_spectrum, lhs, rhs, holds=bool(lhs >= rhs))
