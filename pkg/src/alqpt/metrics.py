"""Reconstruction quality metrics."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = [
    "UndefinedRatioError",
    "AlignedSimilarity",
    "similarity",
    "phase_aligned_similarity",
    "improvement",
]


class UndefinedRatioError(ZeroDivisionError):
    pass


class AlignedSimilarity(NamedTuple):
    value: float
    phase: float
    degenerate: bool


def _check(target: np.ndarray, model: np.ndarray):
    if target.shape != model.shape:
        raise ValueError(f"dimension mismatch: {target.shape} vs {model.shape}")


def similarity(target: np.ndarray, model: np.ndarray) -> float:
    """1 - ||C - U||_F / (2 ||U||_F), clipped to [0, 1] against rounding."""
    _check(target, model)
    value = 1.0 - np.linalg.norm(model - target) / (2.0 * np.linalg.norm(target))
    return float(min(1.0, max(0.0, value)))


def phase_aligned_similarity(target: np.ndarray, model: np.ndarray, tol: float = 1e-12):
    """Best :func:`similarity` over a global phase on the model.

    The optimum is ``exp(-i arg tr(U^dagger C))``.  When that trace vanishes
    every phase is equally good and the raw value is returned, flagged.
    """
    _check(target, model)
    t = np.vdot(target, model)  # tr(U^dagger C)
    if abs(t) <= tol * np.linalg.norm(target) ** 2:
        return AlignedSimilarity(similarity(target, model), 0.0, True)
    phi = -float(np.angle(t))
    return AlignedSimilarity(similarity(target, np.exp(1j * phi) * model), phi, False)


def improvement(al_similarity: float, rand_similarity: float) -> float:
    if rand_similarity <= 1e-12:
        raise UndefinedRatioError(f"RAND similarity {rand_similarity} is too small for a ratio")
    return al_similarity / rand_similarity
