"""Feature-attribution explanations.

KernelSHAP approximates Shapley values by a weighted least-squares fit
over sampled feature coalitions; masked features are replaced by
background rows and the predictions averaged over the background.
``exact_shapley`` enumerates every coalition and serves as the
verification oracle for the sampled path.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .models import Predictor

__all__ = [
    "Explanation",
    "ExplainerConfig",
    "kernel_shap",
    "exact_shapley",
    "rerun_explanations",
    "explanations_to_csv",
    "explanations_from_csv",
    "explanations_to_json",
]

MAX_EXACT_FEATURES = 12


@dataclass(frozen=True)
class Explanation:
    """Signed per-feature relevance for one prediction, in output units."""

    relevance: np.ndarray
    base_value: float
    instance_id: str = ""

    def __post_init__(self):
        relevance = np.asarray(self.relevance, dtype=float)
        object.__setattr__(self, "relevance", relevance)
        if relevance.ndim != 1 or relevance.size == 0:
            raise ValueError("relevance must be a nonempty vector")
        if not np.isfinite(relevance).all() or not math.isfinite(self.base_value):
            raise ValueError("relevance and base_value must be finite")

    @property
    def d(self) -> int:
        return self.relevance.size


@dataclass(frozen=True)
class ExplainerConfig:
    """Coalition budget, background rows, and seed for KernelSHAP.

    ``n_samples`` counts interior coalitions only; the empty and full
    coalitions are always handled analytically. Backgrounds larger than
    ``background_cap`` are subsampled (seeded).
    """

    background: np.ndarray
    n_samples: int = 100
    seed: int = 0
    background_cap: int = 100

    def __post_init__(self):
        background = np.atleast_2d(np.asarray(self.background, dtype=float))
        object.__setattr__(self, "background", background)
        if background.shape[0] == 0:
            raise ValueError("background must be nonempty")


def _masked_values(predictor: Predictor, x: np.ndarray, background: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """v(S) for each mask row: mean prediction with out-of-coalition features
    replaced by background rows."""
    m, d = masks.shape
    nb = background.shape[0]
    rows = np.where(masks[:, None, :], x[None, None, :], background[None, :, :])
    preds = predictor.predict(rows.reshape(m * nb, d))
    return preds.reshape(m, nb).mean(axis=1)


def _kernel_weight(d: int, size: int) -> float:
    return (d - 1) / (math.comb(d, size) * size * (d - size))


def _size_mass(d: int, size: int) -> float:
    # total Shapley-kernel mass of all coalitions of one size
    return (d - 1) / (size * (d - size))


def _draw_coalitions(d: int, budget: int, rng: np.random.Generator):
    """Pick interior coalitions: exhaustive by descending kernel weight while
    the budget allows, the remainder by kernel-weighted random sampling.

    Returns (masks bool array, weights) where enumerated coalitions carry
    their exact kernel weight and sampled ones split the leftover mass evenly.
    """
    masks: list[np.ndarray] = []
    weights: list[float] = []
    enumerated_sizes: set[int] = set()

    pair_order = []
    for s in range(1, d // 2 + 1):
        pair = [s] if s == d - s else [s, d - s]
        pair_order.append(pair)

    remaining = budget
    for pair in pair_order:
        count = sum(math.comb(d, s) for s in pair)
        if count > remaining:
            break
        for s in pair:
            w = _kernel_weight(d, s)
            for combo in itertools.combinations(range(d), s):
                mask = np.zeros(d, dtype=bool)
                mask[list(combo)] = True
                masks.append(mask)
                weights.append(w)
            enumerated_sizes.add(s)
        remaining -= count

    leftover_sizes = [s for s in range(1, d) if s not in enumerated_sizes]
    if remaining > 0 and leftover_sizes:
        size_weights = np.array([_size_mass(d, s) for s in leftover_sizes])
        size_probs = size_weights / size_weights.sum()
        seen = {mask.tobytes() for mask in masks}
        sampled: list[np.ndarray] = []
        sampled_sizes: list[int] = []
        attempts = 0
        # paired (antithetic) sampling: adding a coalition together with its
        # complement keeps the design balanced and cuts estimator variance
        while len(sampled) < remaining and attempts < 50 * budget:
            attempts += 1
            s = leftover_sizes[rng.choice(len(leftover_sizes), p=size_probs)]
            combo = rng.choice(d, size=s, replace=False)
            mask = np.zeros(d, dtype=bool)
            mask[combo] = True
            for candidate in (mask, ~mask):
                size = int(candidate.sum())
                if size not in leftover_sizes or len(sampled) >= remaining:
                    continue
                key = candidate.tobytes()
                if key in seen:
                    continue
                seen.add(key)
                sampled.append(candidate.copy())
                sampled_sizes.append(size)
        if sampled:
            counts = {s: sampled_sizes.count(s) for s in set(sampled_sizes)}
            covered_mass = sum(_size_mass(d, s) for s in counts)
            uncovered = float(size_weights.sum()) - covered_mass
            for mask, size in zip(sampled, sampled_sizes):
                # a size's sampled coalitions share its kernel mass; mass of
                # sizes that got no samples is spread evenly over all samples
                weights.append(_size_mass(d, size) / counts[size] + uncovered / len(sampled))
            masks.extend(sampled)

    return np.array(masks, dtype=bool), np.asarray(weights, dtype=float)


def _solve_constrained_wls(masks, values, weights, fx, base, d):
    """WLS for the relevance vector under the efficiency constraint.

    The constraint sum(z) = fx - base is eliminated by substituting the last
    coordinate, which makes full enumeration reproduce exact Shapley values.
    """
    last = masks[:, d - 1].astype(float)
    targets = values - base - last * (fx - base)
    design = masks[:, : d - 1].astype(float) - last[:, None]
    sqrt_w = np.sqrt(weights)
    sol, *_ = np.linalg.lstsq(design * sqrt_w[:, None], targets * sqrt_w, rcond=None)
    z = np.empty(d)
    z[: d - 1] = sol
    z[d - 1] = (fx - base) - sol.sum()
    return z


def kernel_shap(predictor: Predictor, x: np.ndarray, cfg: ExplainerConfig, instance_id: str = "") -> Explanation:
    """KernelSHAP attribution of the prediction at ``x``.

    Explains the predicted class-1 probability for classifiers and the
    predicted value for regressors. Deterministic per ``cfg.seed``.
    """
    x = np.asarray(x, dtype=float).ravel()
    d = x.size
    if d < 2:
        raise ValueError("kernel_shap needs d >= 2")
    if cfg.n_samples < 2 * d:
        raise ValueError(f"n_samples must be >= 2d = {2 * d}")

    rng = np.random.default_rng(cfg.seed)
    background = cfg.background
    if background.shape[0] > cfg.background_cap:
        keep = rng.choice(background.shape[0], size=cfg.background_cap, replace=False)
        background = background[keep]

    fx = float(predictor.predict(x))
    base = float(np.mean(predictor.predict(background)))

    budget = min(cfg.n_samples, 2**d - 2)
    masks, weights = _draw_coalitions(d, budget, rng)
    values = _masked_values(predictor, x, background, masks)
    z = _solve_constrained_wls(masks, values, weights, fx, base, d)
    return Explanation(relevance=z, base_value=base, instance_id=instance_id)


def exact_shapley(predictor: Predictor, x: np.ndarray, background: np.ndarray, instance_id: str = "") -> Explanation:
    """Exact Shapley values by full coalition enumeration (d <= 12)."""
    x = np.asarray(x, dtype=float).ravel()
    d = x.size
    if d > MAX_EXACT_FEATURES:
        raise ValueError(f"exact enumeration limited to d <= {MAX_EXACT_FEATURES}")
    background = np.atleast_2d(np.asarray(background, dtype=float))
    if background.shape[0] == 0:
        raise ValueError("background must be nonempty")

    codes = np.arange(2**d)
    masks = (codes[:, None] >> np.arange(d)) & 1
    values = _masked_values(predictor, x, background, masks.astype(bool))
    sizes = masks.sum(axis=1)
    # weight of a marginal contribution given |S| features already present
    size_weight = np.array(
        [math.factorial(s) * math.factorial(d - s - 1) / math.factorial(d) for s in range(d)]
    )

    z = np.empty(d)
    for i in range(d):
        without = codes[(codes >> i) & 1 == 0]
        with_i = without | (1 << i)
        z[i] = float(np.sum(size_weight[sizes[without]] * (values[with_i] - values[without])))
    return Explanation(relevance=z, base_value=float(values[0]), instance_id=instance_id)


def rerun_explanations(predictor: Predictor, x: np.ndarray, cfg: ExplainerConfig, runs: int) -> list[Explanation]:
    """Re-generate the explanation ``runs`` times with seeds cfg.seed + run index."""
    if runs < 2:
        raise ValueError("runs must be >= 2")
    return [kernel_shap(predictor, x, replace(cfg, seed=cfg.seed + r)) for r in range(runs)]


def explanations_to_csv(path, explanations: list[Explanation], provenance: str | None = None) -> None:
    path = Path(path)
    d = explanations[0].d if explanations else 0
    with path.open("w", newline="", encoding="utf-8") as handle:
        if provenance:
            handle.write(f"# {provenance}\n")
        writer = csv.writer(handle)
        writer.writerow(["instance_id", "base_value"] + [f"z_{i + 1}" for i in range(d)])
        for e in explanations:
            writer.writerow([e.instance_id, repr(e.base_value)] + [repr(float(v)) for v in e.relevance])


def explanations_from_csv(path) -> list[Explanation]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        rows = [row for row in csv.reader(handle) if row and not row[0].startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty explanations file")
    out = []
    for row in rows[1:]:
        out.append(
            Explanation(
                relevance=np.asarray([float(v) for v in row[2:]]),
                base_value=float(row[1]),
                instance_id=row[0],
            )
        )
    return out


def explanations_to_json(explanations: list[Explanation]) -> str:
    return json.dumps(
        [
            {
                "instance_id": e.instance_id,
                "base_value": e.base_value,
                "relevance": [float(v) for v in e.relevance],
            }
            for e in explanations
        ]
    )
