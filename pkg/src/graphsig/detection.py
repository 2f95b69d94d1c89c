"""Sparse-coding hypothesis test for a structured signal in Gaussian noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .approximation import matching_pursuit
from .dictionaries import Dictionary
from .errors import EmptyDictionary, InvalidLevel


@dataclass(frozen=True)
class DetectionResult:
    statistic: float
    threshold: float
    reject: bool
    budget: int


def detection_threshold(dictionary: Dictionary, sigma: float, delta: float) -> float:
    """Threshold ``sigma * sqrt(2 log(K N T / delta))`` from dictionary metadata.

    K (smoothness order) and T (tree depth) are clamped to at least 1 so
    degenerate dictionaries still yield a usable union bound.
    """
    k_eff = max(int(dictionary.info.get("K", 1)), 1)
    t_eff = max(int(dictionary.info.get("T", 1)), 1)
    n = int(dictionary.info.get("N", dictionary.num_nodes))
    return float(sigma * np.sqrt(2.0 * np.log(k_eff * n * t_eff / delta)))


def detect(y: np.ndarray, dictionary: Dictionary, budget: int, sigma: float,
           delta: float) -> DetectionResult:
    """Reject the pure-noise hypothesis when a sparse code has a large entry.

    Runs matching pursuit with the given sparsity budget on unit-norm
    copies of the atoms (the threshold calibrates per-atom correlations
    against sigma) and compares the largest coefficient magnitude to the
    union-bound threshold.
    """
    if not 0 < delta < 1:
        raise InvalidLevel(f"delta must lie in (0, 1), got {delta}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if budget < 1:
        raise ValueError(f"budget must be at least 1, got {budget}")
    if dictionary.num_atoms == 0:
        raise EmptyDictionary("cannot detect with an empty dictionary")
    norms = np.linalg.norm(dictionary.atoms, axis=0)
    unit = Dictionary(atoms=dictionary.atoms / norms, meta=dictionary.meta,
                      family=dictionary.family, info=dictionary.info)
    code = matching_pursuit(unit, np.asarray(y, dtype=float), budget)
    statistic = float(np.abs(code.coefficients).max()) if code.support else 0.0
    threshold = detection_threshold(dictionary, sigma, delta)
    return DetectionResult(statistic=statistic, threshold=threshold,
                           reject=bool(statistic > threshold), budget=budget)
