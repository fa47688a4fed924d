"""Rejector suite: the augmentation-trained SVM rejector, its input-space
variants and ablation, the standard learning-to-reject baselines, and the
explanation-metric baselines, plus threshold calibration.

Every rejector exposes a score where higher means a better explanation;
rejection happens strictly below the calibrated threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .explain import Explanation, ExplainerConfig
from .feedback import JudgedExplanation
from .models import BootstrapEnsemble, Predictor, PredictorKind, fit_predictor, predictive_variance
from .quality import FaithfulnessConfig, complexity, faithfulness, stability
from .svm import KernelSVM, KernelSvmConfig

__all__ = [
    "AugmentationConfig",
    "RejectionContext",
    "TargetRate",
    "MatchTrainLowQualityFraction",
    "Decision",
    "Rejector",
    "REJECTOR_KINDS",
    "ULER_INPUT_SPACES",
    "augment",
    "make_rejector",
    "calibrate_threshold",
    "decide",
]

REJECTOR_KINDS = (
    "ULER",
    "ULER_ZX",
    "ULER_ZY",
    "ULER_ZXY",
    "ULER_NoAug",
    "RandRej",
    "NovRejX",
    "NovRejZ",
    "PredAmb",
    "StabRej",
    "FaithRej",
    "ComplRej",
    "PASTARejLite",
)

ULER_INPUT_SPACES = {
    "ULER": "z",
    "ULER_ZX": "zx",
    "ULER_ZY": "zy",
    "ULER_ZXY": "zxy",
    "ULER_NoAug": "z",
}


@dataclass(frozen=True)
class AugmentationConfig:
    """How many perturbed copies per explanation and how loud the noise is.

    Each unmasked coordinate is drawn from a Gaussian centred on the
    original value. In the default "std" mode the variance is
    epsilon0 * sigma_i, sigma_i being the per-feature standard deviation
    across the training explanations; "var" mode uses epsilon0 * sigma_i**2
    instead (noise std sqrt(epsilon0) * sigma_i), which keeps epsilon0 a
    relative scale when the explanation magnitudes are far from 1.
    """

    k: int = 10
    epsilon0: float = 0.5
    seed: int = 0
    variance_mode: str = "std"

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.epsilon0 < 0:
            raise ValueError("epsilon0 must be >= 0")
        if self.variance_mode not in ("std", "var"):
            raise ValueError("variance_mode must be 'std' or 'var'")


@dataclass
class RejectionContext:
    """Side information aligned with a batch of explanations.

    Only the fields a rejector kind needs have to be present; a missing
    field raises a descriptive error at fit/score time.
    """

    instances: np.ndarray | None = None
    predictions: np.ndarray | None = None
    predictor: Predictor | None = None
    ensemble: BootstrapEnsemble | None = None
    explainer_cfg: ExplainerConfig | None = None
    background: np.ndarray | None = None

    def require(self, kind: str, **fields):
        missing = [name for name, value in fields.items() if value is None]
        if missing:
            raise ValueError(f"{kind} needs context fields {missing}")


@dataclass(frozen=True)
class TargetRate:
    rate: float

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("rate must lie in [0, 1]")


@dataclass(frozen=True)
class MatchTrainLowQualityFraction:
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")


@dataclass(frozen=True)
class Decision:
    rejected: bool
    prediction: float | None = None
    explanation: Explanation | None = None


def _derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(1)[0])


def _explanation_matrix(items) -> np.ndarray:
    rows = [it.explanation.relevance if isinstance(it, JudgedExplanation) else it.relevance for it in items]
    return np.asarray(rows, dtype=float)


def augment(judged: JudgedExplanation, sigma: np.ndarray, cfg: AugmentationConfig) -> list[JudgedExplanation]:
    """k label-preserving perturbed copies of one judged explanation.

    Low-quality explanations are perturbed only on their correct entries,
    high-quality ones only on their wrong entries; masked coordinates are
    copied bit for bit. Deterministic per seed.
    """
    z = judged.explanation.relevance
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != z.shape:
        raise ValueError("sigma must have one entry per feature")
    mask = np.zeros(z.size, dtype=bool)
    perturb_idx = judged.correct_set if judged.label == 0 else judged.wrong_set
    mask[perturb_idx] = True
    sigma_term = np.maximum(sigma, 0.0) if cfg.variance_mode == "std" else np.maximum(sigma, 0.0) ** 2
    scale = np.where(mask, np.sqrt(cfg.epsilon0 * sigma_term), 0.0)

    rng = np.random.default_rng(cfg.seed)
    noise = rng.standard_normal((cfg.k, z.size)) * scale
    out = []
    for i in range(cfg.k):
        perturbed = np.where(scale > 0, z + noise[i], z)
        out.append(
            JudgedExplanation(
                Explanation(perturbed, judged.explanation.base_value, f"{judged.explanation.instance_id}#aug{i}"),
                judged.label,
                judged.wrong_set,
                judged.correct_set,
            )
        )
    return out


class Rejector:
    """Base class: fit on judged explanations, score unjudged ones."""

    kind: str = ""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.threshold: float | None = None
        self.calibration: tuple[str, float] | None = None

    def fit(self, train: list[JudgedExplanation], ctx: RejectionContext) -> "Rejector":
        return self

    def score(self, explanations: list[Explanation], ctx: RejectionContext) -> np.ndarray:
        raise NotImplementedError

    def calibrate(self, val_scores: np.ndarray, strategy) -> float:
        self.threshold = calibrate_threshold(val_scores, strategy)
        name = type(strategy).__name__
        value = strategy.rate if isinstance(strategy, TargetRate) else strategy.gamma
        self.calibration = (name, float(value))
        return self.threshold

    def hyperparameters(self) -> dict:
        return {}

    def _fitted_state(self) -> dict:
        return {}

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "hyperparameters": self.hyperparameters(),
                "parameters": self._fitted_state(),
                "threshold": self.threshold,
                "calibration": None
                if self.calibration is None
                else {"strategy": self.calibration[0], "value": self.calibration[1]},
            }
        )


class RandRejector(Rejector):
    """Uniform random scores; the sanity floor every rejector must beat."""

    kind = "RandRej"

    def score(self, explanations, ctx):
        rng = np.random.default_rng(self.seed)
        return rng.uniform(size=len(explanations))

    def hyperparameters(self):
        return {"seed": self.seed}


class NoveltyRejector(Rejector):
    """Distance to the k-th nearest training point, squashed by 1/(1+x).

    ``space`` selects whether distances are measured between instances (x)
    or between explanations (z).
    """

    def __init__(self, space: str, k_nn: int = 5, seed: int = 0):
        super().__init__(seed)
        if space not in ("x", "z"):
            raise ValueError("space must be 'x' or 'z'")
        self.space = space
        self.k_nn = int(k_nn)
        self.kind = "NovRejX" if space == "x" else "NovRejZ"
        self.reference: np.ndarray | None = None

    def _points(self, items, ctx):
        if self.space == "z":
            return _explanation_matrix(items)
        ctx.require(self.kind, instances=ctx.instances)
        return np.atleast_2d(np.asarray(ctx.instances, dtype=float))

    def fit(self, train, ctx):
        self.reference = self._points(train, ctx)
        return self

    def score(self, explanations, ctx):
        if self.reference is None:
            raise ValueError("fit the rejector first")
        query = self._points(explanations, ctx)
        sq = (
            (query * query).sum(axis=1)[:, None]
            + (self.reference * self.reference).sum(axis=1)[None, :]
            - 2.0 * query @ self.reference.T
        )
        dists = np.sqrt(np.maximum(sq, 0.0))
        k = min(self.k_nn, self.reference.shape[0])
        kth = np.partition(dists, k - 1, axis=1)[:, k - 1]
        return 1.0 / (1.0 + kth)

    def hyperparameters(self):
        return {"k_nn": self.k_nn}

    def _fitted_state(self):
        return {"n_reference": 0 if self.reference is None else int(self.reference.shape[0])}


class PredAmbRejector(Rejector):
    """Prediction-confidence baseline.

    Classification scores the class-probability margin; regression scores
    1/(1+variance) from a bootstrap ensemble.
    """

    kind = "PredAmb"

    def score(self, explanations, ctx):
        if ctx.ensemble is not None:
            ctx.require(self.kind, instances=ctx.instances)
            variances = np.array(
                [predictive_variance(ctx.ensemble, x) for x in np.atleast_2d(ctx.instances)]
            )
            return 1.0 / (1.0 + variances)
        probs = ctx.predictions
        if probs is None:
            ctx.require(self.kind, predictor=ctx.predictor, instances=ctx.instances)
            probs = ctx.predictor.predict(np.atleast_2d(ctx.instances))
        probs = np.asarray(probs, dtype=float)
        return np.abs(2.0 * probs - 1.0)


class StabilityRejector(Rejector):
    kind = "StabRej"

    def __init__(self, runs: int = 10, seed: int = 0):
        super().__init__(seed)
        self.runs = runs

    def score(self, explanations, ctx):
        ctx.require(self.kind, predictor=ctx.predictor, instances=ctx.instances, explainer_cfg=ctx.explainer_cfg)
        X = np.atleast_2d(ctx.instances)
        return np.array(
            [
                stability(ctx.predictor, X[i], e, ctx.explainer_cfg, self.runs)
                for i, e in enumerate(explanations)
            ]
        )

    def hyperparameters(self):
        return {"runs": self.runs}


class FaithfulnessRejector(Rejector):
    kind = "FaithRej"

    def __init__(self, n_perturbations: int = 25, relevance_tolerance: float = 1e-12, seed: int = 0):
        super().__init__(seed)
        self.n_perturbations = n_perturbations
        self.relevance_tolerance = relevance_tolerance

    def score(self, explanations, ctx):
        ctx.require(self.kind, predictor=ctx.predictor, instances=ctx.instances, background=ctx.background)
        X = np.atleast_2d(ctx.instances)
        scores = []
        for i, e in enumerate(explanations):
            cfg = FaithfulnessConfig(
                n_perturbations=self.n_perturbations,
                relevance_tolerance=self.relevance_tolerance,
                seed=_derive_seed(self.seed, i),
            )
            scores.append(faithfulness(ctx.predictor, X[i], e, ctx.background, cfg))
        return np.asarray(scores)

    def hyperparameters(self):
        return {"n_perturbations": self.n_perturbations, "relevance_tolerance": self.relevance_tolerance}


class ComplexityRejector(Rejector):
    kind = "ComplRej"

    def score(self, explanations, ctx):
        return np.array([1.0 / (1.0 + complexity(e)) for e in explanations])


class PastaLiteRejector(Rejector):
    """Linear scorer trained on the human labels: logistic regression on z."""

    kind = "PASTARejLite"

    def __init__(self, l2: float = 1.0, seed: int = 0):
        super().__init__(seed)
        self.l2 = l2
        self.model: Predictor | None = None

    def fit(self, train, ctx):
        Z = _explanation_matrix(train)
        labels = np.array([float(j.label) for j in train])
        self.model = fit_predictor(PredictorKind.LOGISTIC_REGRESSION, Z, labels, l2=self.l2, seed=self.seed)
        return self

    def score(self, explanations, ctx):
        if self.model is None:
            raise ValueError("fit the rejector first")
        return self.model.predict(_explanation_matrix(explanations))

    def hyperparameters(self):
        return {"l2": self.l2}

    def _fitted_state(self):
        if self.model is None:
            return {}
        return {"weights": [float(w) for w in self.model.weights], "intercept": self.model.intercept}


class UlerRejector(Rejector):
    """Kernel-SVM rejector trained on feedback-masked Gaussian augmentations.

    The input space is the explanation alone or the explanation concatenated
    with the instance and/or the prediction (class-1 probability for
    classification, raw value for regression). Augmentation happens in
    explanation space first; side inputs are concatenated afterwards, the
    copies inheriting their parent's.
    """

    def __init__(
        self,
        kind: str = "ULER",
        kernel: str = "rbf",
        C: float = 1.0,
        k: int = 10,
        epsilon0: float = 0.5,
        degree: int = 3,
        bandwidth: float | None = None,
        variance_mode: str = "std",
        seed: int = 0,
    ):
        super().__init__(seed)
        if kind not in ULER_INPUT_SPACES:
            raise ValueError(f"kind must be one of {sorted(ULER_INPUT_SPACES)}")
        self.kind = kind
        self.input_space = ULER_INPUT_SPACES[kind]
        if kind == "ULER_NoAug":
            k = 0
        self.aug = AugmentationConfig(k=k, epsilon0=epsilon0, seed=seed, variance_mode=variance_mode)
        self.svm_config = KernelSvmConfig(kernel=kernel, C=C, degree=degree, bandwidth=bandwidth)
        self.svm: KernelSVM | None = None

    def _side_features(self, n_items, ctx) -> np.ndarray | None:
        parts = []
        if "x" in self.input_space:
            ctx.require(self.kind, instances=ctx.instances)
            parts.append(np.atleast_2d(np.asarray(ctx.instances, dtype=float)))
        if "y" in self.input_space:
            ctx.require(self.kind, predictions=ctx.predictions)
            parts.append(np.asarray(ctx.predictions, dtype=float).reshape(-1, 1))
        if not parts:
            return None
        sides = np.hstack(parts)
        if sides.shape[0] != n_items:
            raise ValueError("context rows must align with the explanation batch")
        return sides

    def fit(self, train, ctx):
        Z = _explanation_matrix(train)
        sigma = Z.std(axis=0)
        sides = self._side_features(len(train), ctx)

        rows = [Z]
        labels = [np.array([float(j.label) for j in train])]
        side_rows = [sides] if sides is not None else None
        for i, judged in enumerate(train):
            if self.aug.k == 0:
                break
            cfg = replace(self.aug, seed=_derive_seed(self.aug.seed, i))
            copies = augment(judged, sigma, cfg)
            rows.append(_explanation_matrix(copies))
            labels.append(np.full(len(copies), float(judged.label)))
            if side_rows is not None:
                side_rows.append(np.repeat(sides[i : i + 1], len(copies), axis=0))

        X_fit = np.vstack(rows)
        if side_rows is not None:
            X_fit = np.hstack([X_fit, np.vstack(side_rows)])
        y_fit = np.concatenate(labels)
        self.svm = KernelSVM(self.svm_config, seed=self.seed).fit(X_fit, y_fit)
        return self

    def score(self, explanations, ctx):
        if self.svm is None:
            raise ValueError("fit the rejector first")
        X = _explanation_matrix(explanations)
        sides = self._side_features(len(explanations), ctx)
        if sides is not None:
            X = np.hstack([X, sides])
        return self.svm.decision_function(X)

    def hyperparameters(self):
        return {
            "kernel": self.svm_config.kernel,
            "C": self.svm_config.C,
            "k": self.aug.k,
            "epsilon0": self.aug.epsilon0,
            "variance_mode": self.aug.variance_mode,
            "degree": self.svm_config.degree,
            "bandwidth": self.svm_config.bandwidth,
        }

    def _fitted_state(self):
        return {} if self.svm is None else self.svm.to_json_dict()


def make_rejector(kind: str, seed: int = 0, **params) -> Rejector:
    """Factory keyed by the rejector kind names used in experiment configs."""
    if kind in ULER_INPUT_SPACES:
        return UlerRejector(kind=kind, seed=seed, **params)
    if kind == "RandRej":
        return RandRejector(seed=seed, **params)
    if kind == "NovRejX":
        return NoveltyRejector("x", seed=seed, **params)
    if kind == "NovRejZ":
        return NoveltyRejector("z", seed=seed, **params)
    if kind == "PredAmb":
        return PredAmbRejector(seed=seed, **params)
    if kind == "StabRej":
        return StabilityRejector(seed=seed, **params)
    if kind == "FaithRej":
        return FaithfulnessRejector(seed=seed, **params)
    if kind == "ComplRej":
        return ComplexityRejector(seed=seed, **params)
    if kind == "PASTARejLite":
        return PastaLiteRejector(seed=seed, **params)
    raise ValueError(f"unknown rejector kind '{kind}'; valid kinds: {list(REJECTOR_KINDS)}")


def calibrate_threshold(scores, strategy) -> float:
    """Empirical-quantile threshold; rejection is strict (score < tau).

    TargetRate rejects the requested fraction of the calibration scores;
    MatchTrainLowQualityFraction does the same with the training-set
    low-quality fraction.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise ValueError("scores must be nonempty")
    if isinstance(strategy, TargetRate):
        rate = strategy.rate
    elif isinstance(strategy, MatchTrainLowQualityFraction):
        rate = strategy.gamma
    else:
        raise TypeError("strategy must be TargetRate or MatchTrainLowQualityFraction")
    n = scores.size
    m = int(np.floor(rate * n + 0.5))
    ordered = np.sort(scores)
    if m <= 0:
        return float(ordered[0])
    if m >= n:
        return float(np.nextafter(ordered[-1], np.inf))
    return float(ordered[m])


def decide(model: Rejector, explanation: Explanation, ctx: RejectionContext) -> Decision:
    """Abstain when the score falls strictly below the calibrated threshold,
    otherwise return the prediction-explanation pair."""
    if model.threshold is None:
        raise ValueError("calibrate the rejector before deciding")
    score = float(model.score([explanation], ctx)[0])
    if score < model.threshold:
        return Decision(rejected=True)
    if ctx.predictions is not None:
        prediction = float(np.asarray(ctx.predictions, dtype=float).ravel()[0])
    elif ctx.predictor is not None and ctx.instances is not None:
        prediction = float(ctx.predictor.predict(np.atleast_2d(ctx.instances)[0]))
    else:
        prediction = None
    return Decision(rejected=False, prediction=prediction, explanation=explanation)
