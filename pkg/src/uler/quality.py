"""Machine-side explanation quality metrics: stability, faithfulness, complexity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .explain import Explanation, ExplainerConfig, rerun_explanations
from .feedback import pearson
from .models import Predictor

__all__ = [
    "FaithfulnessConfig",
    "stability",
    "faithfulness",
    "faithfulness_from_raw",
    "complexity",
    "harmonic_mean",
]

DEFAULT_RELEVANCE_TOLERANCE = 1e-12
DEFAULT_N_PERTURBATIONS = 25


@dataclass(frozen=True)
class FaithfulnessConfig:
    """Monte-Carlo settings for the sufficiency/necessity estimates.

    ``relevance_tolerance`` decides which |z_i| count as zero; the default
    keeps the literal ">0" rule, under which continuous attributions almost
    never leave a feature irrelevant.
    """

    n_perturbations: int = DEFAULT_N_PERTURBATIONS
    relevance_tolerance: float = DEFAULT_RELEVANCE_TOLERANCE
    seed: int = 0

    def __post_init__(self):
        if self.n_perturbations < 1:
            raise ValueError("n_perturbations must be >= 1")
        if self.relevance_tolerance < 0:
            raise ValueError("relevance_tolerance must be >= 0")


def stability(predictor: Predictor, x: np.ndarray, z: Explanation, cfg: ExplainerConfig, runs: int = 10) -> float:
    """Mean Pearson correlation between ``z`` and ``runs`` re-generated explanations."""
    reruns = rerun_explanations(predictor, x, cfg, runs)
    return float(np.mean([pearson(z.relevance, e.relevance) for e in reruns]))


def harmonic_mean(a: float, b: float) -> float:
    if a <= 0.0 or b <= 0.0:
        return 0.0
    return 2.0 * a * b / (a + b)


def faithfulness_from_raw(suf_raw: float, nec_raw: float) -> float:
    """Combine raw sufficiency/necessity prediction changes into one score.

    Both are normalized to [0, 1] (higher better) with exp(-suf) and
    1 - exp(-nec), then merged by the harmonic mean.
    """
    return harmonic_mean(math.exp(-suf_raw), 1.0 - math.exp(-nec_raw))


def faithfulness(
    predictor: Predictor,
    x: np.ndarray,
    z: Explanation,
    background: np.ndarray,
    cfg: FaithfulnessConfig = FaithfulnessConfig(),
) -> float:
    """Faithfulness of ``z`` for the prediction at ``x``.

    Sufficiency perturbs only the irrelevant features, necessity only the
    relevant ones; perturbed features are redrawn from the background
    marginals while the rest stay fixed. The prediction change is the
    absolute difference in class-1 probability (classification) or
    predicted value (regression).
    """
    x = np.asarray(x, dtype=float).ravel()
    background = np.atleast_2d(np.asarray(background, dtype=float))
    if background.shape[0] == 0:
        raise ValueError("background must be nonempty")
    rng = np.random.default_rng(cfg.seed)
    relevant = np.flatnonzero(np.abs(z.relevance) > cfg.relevance_tolerance)
    irrelevant = np.setdiff1d(np.arange(x.size), relevant)
    fx = float(predictor.predict(x))

    def mean_change(idx: np.ndarray) -> float:
        if idx.size == 0:
            return 0.0
        rows = np.tile(x, (cfg.n_perturbations, 1))
        draws = rng.integers(0, background.shape[0], size=(cfg.n_perturbations, idx.size))
        rows[:, idx] = background[draws, idx]
        return float(np.mean(np.abs(predictor.predict(rows) - fx)))

    suf_raw = mean_change(irrelevant)
    nec_raw = mean_change(relevant)
    return faithfulness_from_raw(suf_raw, nec_raw)


def complexity(z: Explanation) -> float:
    """Entropy of the fractional absolute contributions; ln d when z is all zero."""
    magnitudes = np.abs(z.relevance)
    total = magnitudes.sum()
    if total == 0.0:
        return math.log(z.d)
    p = magnitudes / total
    nonzero = p[p > 0]
    return float(-np.sum(nonzero * np.log(nonzero)))
