"""Kernel functions shared by the kernel predictors and the rejector SVM."""

from __future__ import annotations

import numpy as np

__all__ = ["linear_kernel", "polynomial_kernel", "rbf_kernel", "squared_distances", "median_bandwidth"]


def squared_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.maximum(sq, 0.0)


def linear_kernel(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.atleast_2d(A) @ np.atleast_2d(B).T


def polynomial_kernel(A: np.ndarray, B: np.ndarray, degree: int = 3) -> np.ndarray:
    return (1.0 + np.atleast_2d(A) @ np.atleast_2d(B).T) ** degree


def rbf_kernel(A: np.ndarray, B: np.ndarray, bandwidth: float) -> np.ndarray:
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    return np.exp(-squared_distances(A, B) / (2.0 * bandwidth**2))


def median_bandwidth(X: np.ndarray, seed: int = 0, max_rows: int = 512) -> float:
    """Median pairwise distance heuristic, subsampling large inputs for speed."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] > max_rows:
        rng = np.random.default_rng(seed)
        X = X[rng.choice(X.shape[0], size=max_rows, replace=False)]
    dists = np.sqrt(squared_distances(X, X))
    upper = dists[np.triu_indices_from(dists, k=1)]
    positive = upper[upper > 0]
    if positive.size == 0:
        return 1.0
    return float(np.median(positive))
