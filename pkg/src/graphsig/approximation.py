"""K-term approximation, greedy sparse coding, and error metrics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dictionaries import Dictionary, LSPC_WAVELET
from .errors import KOutOfRange, ZeroReference
from .spectral import FourierBasis


@dataclass(frozen=True)
class SparseCode:
    """Sparse expansion: values on ``support`` (selection order), zeros elsewhere."""

    coefficients: np.ndarray
    support: tuple
    residual_norm: float

    @property
    def sparsity(self) -> int:
        return len(self.support)


def _expansion_pair(basis):
    """Forward/inverse transform pair for a basis-like object."""
    if isinstance(basis, FourierBasis):
        return basis.U, basis.V
    if isinstance(basis, Dictionary):
        if basis.family != LSPC_WAVELET:
            raise ValueError("nonlinear approximation needs a basis, not a redundant dictionary")
        return basis.atoms.T, basis.atoms
    raise TypeError(f"unsupported basis type {type(basis).__name__}")


def _largest_magnitude(values: np.ndarray, k: int) -> np.ndarray:
    # stable: magnitude descending, ties by lower index
    order = np.lexsort((np.arange(values.shape[0]), -np.abs(values)))
    return order[:k]


def nonlinear_approx(basis, x: np.ndarray, K: int):
    """Keep the K largest-magnitude expansion coefficients.

    Works for any biorthonormal pair (graph Fourier basis) or orthonormal
    wavelet dictionary. Returns the reconstruction and its sparse code.
    """
    forward, inverse = _expansion_pair(basis)
    x = np.asarray(x, dtype=float)
    n = forward.shape[1]
    if x.shape[0] != n:
        raise KOutOfRange(f"signal length {x.shape[0]} does not match basis size {n}")
    if not 0 <= K <= forward.shape[0]:
        raise KOutOfRange(f"K={K} outside [0, {forward.shape[0]}]")
    coeffs = forward @ x
    keep = _largest_magnitude(coeffs, K)
    sparse = np.zeros_like(coeffs)
    sparse[keep] = coeffs[keep]
    approx = inverse @ sparse
    return approx, SparseCode(coefficients=sparse, support=tuple(int(i) for i in keep),
                              residual_norm=float(np.linalg.norm(x - approx)))


def omp(dictionary: Dictionary, x: np.ndarray, K: int) -> SparseCode:
    """Orthogonal matching pursuit with a least-squares refit each step.

    Atoms are scored by normalized correlation with the residual; ties go
    to the lower index. If the selected atoms become linearly dependent
    the last pick is dropped and the pursuit stops early with a warning.
    """
    atoms = dictionary.atoms
    x = np.asarray(x, dtype=float)
    if K < 1:
        raise KOutOfRange(f"OMP needs K >= 1, got {K}")
    if x.shape[0] != atoms.shape[0]:
        raise KOutOfRange("signal length does not match dictionary")
    norms = np.linalg.norm(atoms, axis=0)
    residual = x.copy()
    support: list = []
    coeffs = np.zeros(atoms.shape[1])
    x_scale = max(1.0, float(np.linalg.norm(x)))
    for _ in range(min(K, atoms.shape[1])):
        if np.linalg.norm(residual) <= 1e-13 * x_scale:
            break
        scores = np.abs(atoms.T @ residual) / norms
        if support:
            scores[support] = -1.0
        pick = int(np.argmax(scores))
        trial = support + [pick]
        sub = atoms[:, trial]
        solution, _, rank, _ = np.linalg.lstsq(sub, x, rcond=None)
        if rank < len(trial):
            warnings.warn("selected atoms are linearly dependent; stopping early",
                          RuntimeWarning, stacklevel=2)
            break
        support = trial
        fitted = solution
        residual = x - sub @ fitted
    coeffs[:] = 0.0
    if support:
        coeffs[support] = fitted
    return SparseCode(coefficients=coeffs, support=tuple(support),
                      residual_norm=float(np.linalg.norm(residual)))


def matching_pursuit(dictionary: Dictionary, x: np.ndarray, K: int) -> SparseCode:
    """Plain matching pursuit: project, subtract, repeat; atoms may repeat."""
    atoms = dictionary.atoms
    x = np.asarray(x, dtype=float)
    if K < 1:
        raise KOutOfRange(f"matching pursuit needs K >= 1, got {K}")
    if x.shape[0] != atoms.shape[0]:
        raise KOutOfRange("signal length does not match dictionary")
    norms = np.linalg.norm(atoms, axis=0)
    residual = x.copy()
    coeffs = np.zeros(atoms.shape[1])
    order: list = []
    x_scale = max(1.0, float(np.linalg.norm(x)))
    for _ in range(K):
        if np.linalg.norm(residual) <= 1e-13 * x_scale:
            break
        correlations = atoms.T @ residual
        pick = int(np.argmax(np.abs(correlations) / norms))
        step = correlations[pick] / norms[pick] ** 2
        coeffs[pick] += step
        residual = residual - step * atoms[:, pick]
        if pick not in order:
            order.append(pick)
    return SparseCode(coefficients=coeffs, support=tuple(order),
                      residual_norm=float(np.linalg.norm(residual)))


def normalized_mse(x: np.ndarray, approx: np.ndarray) -> float:
    """Squared reconstruction error relative to the signal energy."""
    x = np.asarray(x, dtype=float)
    approx = np.asarray(approx, dtype=float)
    denom = float(x @ x)
    if denom == 0:
        raise ZeroReference("normalized MSE undefined for a zero signal")
    diff = approx - x
    return float(diff @ diff) / denom
