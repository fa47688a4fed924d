"""Datasets: CSV ingestion, synthetic benchmark generation, splits, standardization."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

__all__ = [
    "Task",
    "CsvError",
    "Dataset",
    "SplitIndices",
    "SyntheticSpec",
    "Scaler",
    "load_csv",
    "make_synthetic",
    "split",
    "standardize",
]

TRAIN_FRACTION = 0.70
VAL_FRACTION = 0.10


class Task(str, Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


class CsvError(ValueError):
    """A dataset file could not be parsed."""


@dataclass(frozen=True)
class Dataset:
    """Dense feature matrix plus targets for one prediction task.

    Classification targets are 0/1; regression targets are finite reals.
    """

    features: np.ndarray
    targets: np.ndarray
    feature_names: tuple[str, ...]
    task: Task

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise ValueError("features must be a nonempty 2-D matrix")
        if targets.shape != (features.shape[0],):
            raise ValueError("targets must be a vector with one entry per row")
        if not np.isfinite(features).all():
            raise ValueError("features contain NaN or Inf")
        if not np.isfinite(targets).all():
            raise ValueError("targets contain NaN or Inf")
        if len(self.feature_names) != features.shape[1]:
            raise ValueError("feature_names must have one entry per column")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("feature_names must be unique")
        if self.task is Task.CLASSIFICATION and not np.isin(targets, (0.0, 1.0)).all():
            bad = sorted(set(targets) - {0.0, 1.0})
            raise ValueError(f"non-binary target: values {bad} outside {{0,1}}")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(self.features[idx], self.targets[idx], self.feature_names, self.task)


@dataclass(frozen=True)
class SplitIndices:
    """Disjoint train/val/test row indices covering an index set exactly."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in ("train", "val", "test"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=int))


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the planted-mismatch generator.

    ``mismatch_strength`` scales a smooth region-gated component of the
    latent target that a linear predictor cannot track but an RBF-kernel
    predictor can, so downstream explanation quality degrades in that
    region.
    """

    n: int
    d: int
    task: Task
    mismatch_strength: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 50:
            raise ValueError("synthetic spec requires n >= 50")
        if self.d < 2:
            raise ValueError("synthetic spec requires d >= 2")
        if self.mismatch_strength < 0:
            raise ValueError("mismatch_strength must be >= 0")


@dataclass
class Scaler:
    """Per-feature affine transform fitted on a subset of rows.

    ``stds`` stores the population standard deviation as measured; features
    with zero variance are only centered when transforming.
    """

    feature_names: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        divisor = np.where(self.stds > 0, self.stds, 1.0)
        return (np.asarray(X, dtype=float) - self.means) / divisor

    def to_json(self) -> str:
        return json.dumps(
            {
                "feature_names": list(self.feature_names),
                "means": [float(v) for v in self.means],
                "stds": [float(v) for v in self.stds],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Scaler":
        payload = json.loads(text)
        return cls(
            feature_names=tuple(payload["feature_names"]),
            means=np.asarray(payload["means"], dtype=float),
            stds=np.asarray(payload["stds"], dtype=float),
        )


def load_csv(path, target_column: str, task: Task) -> Dataset:
    """Parse a numeric CSV with a header row into a Dataset.

    The target column is removed from the features. Lines starting with
    ``#`` (provenance headers) are skipped. Raises CsvError naming the
    offending row and column on any malformed cell.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        rows = [row for row in csv.reader(handle) if row and not row[0].startswith("#")]
    if not rows:
        raise CsvError(f"{path}: empty file")
    header = [name.strip() for name in rows[0]]
    if target_column not in header:
        raise CsvError(f"{path}: missing column '{target_column}' (header: {header})")
    target_idx = header.index(target_column)

    parsed = np.empty((len(rows) - 1, len(header)), dtype=float)
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise CsvError(f"{path}: row {r} has {len(row)} cells, expected {len(header)}")
        for c, cell in enumerate(row):
            try:
                parsed[r - 1, c] = float(cell)
            except ValueError:
                raise CsvError(
                    f"{path}: non-numeric cell '{cell.strip()}' at row {r}, column '{header[c]}'"
                ) from None
    if parsed.shape[0] == 0:
        raise CsvError(f"{path}: no data rows")

    targets = parsed[:, target_idx]
    features = np.delete(parsed, target_idx, axis=1)
    names = tuple(name for i, name in enumerate(header) if i != target_idx)
    try:
        return Dataset(features, targets, names, task)
    except ValueError as exc:
        raise CsvError(f"{path}: {exc}") from None


MISMATCH_SCALE = 1.5
MAX_INTERACTION_PAIRS = 3


def make_synthetic(spec: SyntheticSpec) -> Dataset:
    """Deterministic synthetic benchmark with a planted predictor/oracle mismatch.

    Features are i.i.d. standard normal. The latent score is a fixed linear
    direction plus a few pairwise feature products scaled by
    ``mismatch_strength``; the products carry instance-dependent attribution
    signs that a linear predictor averages away but a kernel predictor
    tracks, so explanation quality degrades exactly where the products
    dominate.
    """
    rng = np.random.default_rng(spec.seed)
    X = rng.standard_normal((spec.n, spec.d))
    base = np.array([(-1.0) ** i * (1.0 + (i % 3)) for i in range(spec.d)])
    base /= np.linalg.norm(base)
    interactions = np.zeros(spec.n)
    for j in range(min(MAX_INTERACTION_PAIRS, spec.d // 2)):
        interactions += (-1.0) ** j * X[:, 2 * j] * X[:, 2 * j + 1]
    latent = X @ base + MISMATCH_SCALE * spec.mismatch_strength * interactions
    if spec.task is Task.REGRESSION:
        targets = latent + 0.05 * rng.standard_normal(spec.n)
    else:
        targets = (latent >= np.median(latent)).astype(float)
    names = tuple(f"f{i}" for i in range(spec.d))
    return Dataset(X, targets, names, spec.task)


def _largest_remainder(counts: np.ndarray, fraction: float, total: int, caps: np.ndarray) -> np.ndarray:
    """Allocate ``total`` slots across strata proportionally to ``counts``."""
    ideal = counts * fraction
    alloc = np.floor(ideal).astype(int)
    alloc = np.minimum(alloc, caps)
    remainders = ideal - alloc
    order = np.argsort(-remainders, kind="stable")
    i = 0
    while alloc.sum() < total and i < 2 * len(alloc):
        s = order[i % len(alloc)]
        if alloc[s] < caps[s]:
            alloc[s] += 1
        i += 1
    # trim any overshoot caused by caps
    i = 0
    while alloc.sum() > total:
        s = order[len(order) - 1 - (i % len(alloc))]
        if alloc[s] > 0:
            alloc[s] -= 1
        i += 1
    return alloc


def split(dataset: Dataset, seed: int, labels=None) -> SplitIndices:
    """70/10/20 split, stratified when a label is available.

    Stratification uses ``labels`` when given, else the target for
    classification tasks, else nothing. Deterministic per seed.
    """
    n = dataset.n
    if n < 10:
        raise ValueError("need n >= 10 for three nonempty splits")
    n_train = math.floor(TRAIN_FRACTION * n)
    n_val = math.floor(VAL_FRACTION * n)
    n_test = n - n_train - n_val
    if min(n_train, n_val, n_test) < 1:
        raise ValueError(f"n={n} too small for three nonempty parts")

    if labels is not None:
        strata = np.asarray(labels)
    elif dataset.task is Task.CLASSIFICATION:
        strata = dataset.targets
    else:
        strata = np.zeros(n)
    if strata.shape != (n,):
        raise ValueError("labels must align with dataset rows")

    rng = np.random.default_rng(seed)
    values = np.unique(strata)
    counts = np.array([int(np.sum(strata == v)) for v in values])
    train_alloc = _largest_remainder(counts, TRAIN_FRACTION, n_train, caps=counts)
    val_alloc = _largest_remainder(counts, VAL_FRACTION, n_val, caps=counts - train_alloc)

    train_parts, val_parts, test_parts = [], [], []
    for v, t, w in zip(values, train_alloc, val_alloc):
        members = np.flatnonzero(strata == v)
        members = members[rng.permutation(len(members))]
        train_parts.append(members[:t])
        val_parts.append(members[t : t + w])
        test_parts.append(members[t + w :])
    return SplitIndices(
        train=np.concatenate(train_parts),
        val=np.concatenate(val_parts),
        test=np.concatenate(test_parts),
    )


def standardize(dataset: Dataset, fit_indices) -> tuple[Dataset, Scaler]:
    """Center/scale every row using statistics measured on ``fit_indices`` only.

    Uses the population standard deviation; zero-variance features are left
    centered without rescaling.
    """
    fit_idx = np.asarray(fit_indices, dtype=int)
    if fit_idx.size == 0:
        raise ValueError("fit_indices must be nonempty")
    fit_rows = dataset.features[fit_idx]
    scaler = Scaler(
        feature_names=dataset.feature_names,
        means=fit_rows.mean(axis=0),
        stds=fit_rows.std(axis=0),
    )
    transformed = Dataset(
        scaler.transform(dataset.features), dataset.targets, dataset.feature_names, dataset.task
    )
    return transformed, scaler
