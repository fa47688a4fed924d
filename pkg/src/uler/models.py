"""Small trainable predictors.

The deployed predictor is a linear model (ridge or logistic regression);
the judgment oracle is its RBF-kernel counterpart (kernel ridge or kernel
logistic regression). A bootstrap ensemble provides predictive variance
for regression tasks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .kernels import median_bandwidth, rbf_kernel

__all__ = [
    "PredictorKind",
    "Predictor",
    "BootstrapEnsemble",
    "SingularSystemError",
    "fit_predictor",
    "fit_bootstrap_ensemble",
    "predictive_variance",
]

MAX_NEWTON_ITER = 200
NEWTON_TOL = 1e-8


class SingularSystemError(ValueError):
    """Normal equations are singular; raise the l2 penalty to fix."""


class PredictorKind(str, Enum):
    LINEAR_REGRESSION = "linear_regression"
    LOGISTIC_REGRESSION = "logistic_regression"
    KERNEL_RIDGE = "kernel_ridge"
    KERNEL_LOGISTIC = "kernel_logistic"


_CLASSIFIER_KINDS = {PredictorKind.LOGISTIC_REGRESSION, PredictorKind.KERNEL_LOGISTIC}
_KERNEL_KINDS = {PredictorKind.KERNEL_RIDGE, PredictorKind.KERNEL_LOGISTIC}


@dataclass
class Predictor:
    """A fitted predictor; immutable in practice once returned by :func:`fit_predictor`.

    Linear kinds store ``weights``; kernel kinds store ``support`` points and
    ``dual_coef``. Classification kinds predict the probability of class 1.
    """

    kind: PredictorKind
    d: int
    intercept: float
    l2: float
    weights: np.ndarray | None = None
    support: np.ndarray | None = None
    dual_coef: np.ndarray | None = None
    bandwidth: float | None = None

    @property
    def is_classifier(self) -> bool:
        return self.kind in _CLASSIFIER_KINDS

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise ValueError(f"expected {self.d} features, got {X.shape[1]}")
        if self.kind in _KERNEL_KINDS:
            K = rbf_kernel(X, self.support, self.bandwidth)
            return K @ self.dual_coef + self.intercept
        return X @ self.weights + self.intercept

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Predicted value (regression) or probability of class 1 (classification)."""
        X = np.asarray(X, dtype=float)
        squeeze = X.ndim == 1
        raw = self.decision_values(X)
        if self.is_classifier:
            raw = _sigmoid(raw)
        return float(raw[0]) if squeeze else raw

    def predict_label(self, X: np.ndarray) -> np.ndarray:
        probs = np.atleast_1d(self.predict(X))
        return (probs >= 0.5).astype(float)

    def to_json(self) -> str:
        payload = {
            "kind": self.kind.value,
            "d": self.d,
            "intercept": self.intercept,
            "l2": self.l2,
            "weights": None if self.weights is None else [float(v) for v in self.weights],
            "support": None if self.support is None else [[float(v) for v in row] for row in self.support],
            "dual_coef": None if self.dual_coef is None else [float(v) for v in self.dual_coef],
            "bandwidth": self.bandwidth,
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "Predictor":
        p = json.loads(text)
        return cls(
            kind=PredictorKind(p["kind"]),
            d=int(p["d"]),
            intercept=float(p["intercept"]),
            l2=float(p["l2"]),
            weights=None if p["weights"] is None else np.asarray(p["weights"], dtype=float),
            support=None if p["support"] is None else np.asarray(p["support"], dtype=float),
            dual_coef=None if p["dual_coef"] is None else np.asarray(p["dual_coef"], dtype=float),
            bandwidth=p["bandwidth"],
        )


@dataclass
class BootstrapEnsemble:
    """Resampled copies of one predictor kind; used for predictive variance."""

    members: list[Predictor] = field(default_factory=list)
    resample_seed: int = 0

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValueError("ensemble needs at least 2 members")
        kinds = {m.kind for m in self.members}
        if len(kinds) != 1:
            raise ValueError("all ensemble members must share a kind")


def _sigmoid(u: np.ndarray) -> np.ndarray:
    out = np.empty_like(u, dtype=float)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    expu = np.exp(u[~pos])
    out[~pos] = expu / (1.0 + expu)
    return out


def _solve_spd(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b for symmetric positive definite A, detecting singularity."""
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise SingularSystemError(
            "singular normal equations; raise l2 to regularize the fit"
        ) from None
    return np.linalg.solve(A, b)


def _fit_linear_regression(X, y, l2):
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    A = Xc.T @ Xc + l2 * np.eye(X.shape[1])
    w = _solve_spd(A, Xc.T @ (y - y_mean))
    return w, float(y_mean - x_mean @ w)


def _log_loss(u: np.ndarray, y: np.ndarray) -> float:
    # numerically stable sum of log(1 + exp(u)) - y * u
    return float(np.sum(np.logaddexp(0.0, u) - y * u))


def _fit_logistic(X, y, l2):
    """Damped Newton on the L2-regularized logistic loss (intercept unpenalized)."""
    n, d = X.shape
    X1 = np.hstack([X, np.ones((n, 1))])
    theta = np.zeros(d + 1)
    penalty = np.append(np.full(d, l2), 0.0)
    for _ in range(MAX_NEWTON_ITER):
        u = X1 @ theta
        p = _sigmoid(u)
        grad = X1.T @ (p - y) + penalty * theta
        if np.linalg.norm(grad) <= NEWTON_TOL:
            break
        W = p * (1.0 - p)
        H = (X1 * W[:, None]).T @ X1 + np.diag(penalty) + 1e-12 * np.eye(d + 1)
        step = np.linalg.solve(H, grad)
        loss = _log_loss(u, y) + 0.5 * float(penalty @ (theta**2))
        scale = 1.0
        for _ in range(30):
            cand = theta - scale * step
            cand_loss = _log_loss(X1 @ cand, y) + 0.5 * float(penalty @ (cand**2))
            if cand_loss <= loss:
                break
            scale *= 0.5
        theta = theta - scale * step
    return theta[:d], float(theta[d])


def _fit_kernel_ridge(X, y, l2, bandwidth):
    K = rbf_kernel(X, X, bandwidth)
    y_mean = float(y.mean())
    alpha = _solve_spd(K + l2 * np.eye(len(y)), y - y_mean)
    return alpha, y_mean


def _fit_kernel_logistic(X, y, l2, bandwidth):
    """Damped Newton on the dual-represented regularized logistic objective."""
    n = X.shape[0]
    K = rbf_kernel(X, X, bandwidth)
    alpha = np.zeros(n)
    b = 0.0

    def objective(a, b0):
        u = K @ a + b0
        return _log_loss(u, y) + 0.5 * l2 * float(a @ K @ a)

    for _ in range(MAX_NEWTON_ITER):
        u = K @ alpha + b
        p = _sigmoid(u)
        resid = p - y
        grad_a = K @ (resid + l2 * alpha)
        grad_b = float(resid.sum())
        grad_norm = np.sqrt(np.sum(grad_a**2) + grad_b**2)
        if grad_norm <= NEWTON_TOL:
            break
        W = p * (1.0 - p)
        KW = K * W[None, :]
        H = np.empty((n + 1, n + 1))
        H[:n, :n] = KW @ K + l2 * K + 1e-10 * np.eye(n)
        H[:n, n] = K @ W
        H[n, :n] = W @ K
        H[n, n] = float(W.sum()) + 1e-10
        step = np.linalg.solve(H, np.append(grad_a, grad_b))
        loss = objective(alpha, b)
        scale = 1.0
        for _ in range(30):
            cand_a = alpha - scale * step[:n]
            cand_b = b - scale * step[n]
            if objective(cand_a, cand_b) <= loss:
                break
            scale *= 0.5
        alpha = alpha - scale * step[:n]
        b = b - scale * step[n]
    return alpha, float(b)


def fit_predictor(
    kind: PredictorKind,
    X: np.ndarray,
    y: np.ndarray,
    *,
    l2: float = 1e-2,
    bandwidth: float | None = None,
    seed: int = 0,
) -> Predictor:
    """Fit one predictor. Deterministic per seed.

    Linear kinds are solved to stationarity (closed form or Newton with
    gradient norm <= 1e-8); kernel kinds are solved in the dual. The RBF
    bandwidth defaults to the median pairwise distance of the training set.
    """
    kind = PredictorKind(kind)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y disagree on the number of rows")
    if l2 < 0:
        raise ValueError("l2 must be >= 0")
    if kind in _KERNEL_KINDS and l2 <= 0:
        raise ValueError("kernel kinds require l2 > 0")
    if kind in _CLASSIFIER_KINDS and not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("classification targets must be 0/1")

    if kind in _KERNEL_KINDS and bandwidth is None:
        bandwidth = median_bandwidth(X, seed=seed)

    if kind is PredictorKind.LINEAR_REGRESSION:
        w, b = _fit_linear_regression(X, y, l2)
        return Predictor(kind, X.shape[1], b, l2, weights=w)
    if kind is PredictorKind.LOGISTIC_REGRESSION:
        w, b = _fit_logistic(X, y, l2)
        return Predictor(kind, X.shape[1], b, l2, weights=w)
    if kind is PredictorKind.KERNEL_RIDGE:
        alpha, b = _fit_kernel_ridge(X, y, l2, bandwidth)
        return Predictor(kind, X.shape[1], b, l2, support=X.copy(), dual_coef=alpha, bandwidth=bandwidth)
    alpha, b = _fit_kernel_logistic(X, y, l2, bandwidth)
    return Predictor(kind, X.shape[1], b, l2, support=X.copy(), dual_coef=alpha, bandwidth=bandwidth)


def fit_bootstrap_ensemble(
    kind: PredictorKind,
    X: np.ndarray,
    y: np.ndarray,
    *,
    n_members: int = 10,
    seed: int = 0,
    **fit_kwargs,
) -> BootstrapEnsemble:
    """Fit ``n_members`` predictors on with-replacement resamples of (X, y)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    rng = np.random.default_rng(seed)
    members = []
    for _ in range(n_members):
        idx = rng.integers(0, X.shape[0], size=X.shape[0])
        members.append(fit_predictor(kind, X[idx], y[idx], seed=seed, **fit_kwargs))
    return BootstrapEnsemble(members=members, resample_seed=seed)


def predictive_variance(ensemble: BootstrapEnsemble, x: np.ndarray) -> float:
    """Population variance of the member predictions at ``x``."""
    preds = np.array([m.predict(np.asarray(x, dtype=float)) for m in ensemble.members])
    return float(np.var(preds))
