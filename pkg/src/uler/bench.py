"""Experiment harness: repeated splits, grid search, rejection-rate sweeps,
metrics, and result persistence.

Each repeat derives independent random streams from the master seed so that
serial and parallel execution produce identical outputs.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as _scipy_stats

from .data import Dataset, SyntheticSpec, Task, load_csv, make_synthetic, split, standardize
from .explain import ExplainerConfig, kernel_shap
from .feedback import (
    JudgedExplanation,
    JudgmentConfig,
    aggregate_annotations,
    annotations_from_csv,
    judged_from_csv,
    simulate_judgment,
)
from .models import PredictorKind, fit_bootstrap_ensemble, fit_predictor
from .reject import REJECTOR_KINDS, RejectionContext, make_rejector

__all__ = [
    "ConfigError",
    "ExperimentError",
    "ExperimentConfig",
    "ResultRecord",
    "ExperimentResult",
    "DEFAULT_GRIDS",
    "DEFAULT_RATES",
    "auroc",
    "set_composition",
    "expand_grid",
    "grid_search",
    "run_experiment",
    "paired_t_test",
    "write_results_csv",
    "write_curves_csv",
    "write_summary_json",
]

SCHEMA_VERSION = 1
DEFAULT_RATES = tuple(round(i / 100.0, 2) for i in range(1, 26))

_ULER_GRID = {"kernel": ["linear", "poly", "rbf"], "C": [0.1, 1.0, 10.0], "k": [5, 10, 20], "epsilon0": [0.1, 0.5, 1.0]}
DEFAULT_GRIDS: dict[str, dict] = {
    "ULER": dict(_ULER_GRID),
    "ULER_ZX": dict(_ULER_GRID),
    "ULER_ZY": dict(_ULER_GRID),
    "ULER_ZXY": dict(_ULER_GRID),
    "ULER_NoAug": {"kernel": ["linear", "poly", "rbf"], "C": [0.1, 1.0, 10.0]},
    "RandRej": {},
    "NovRejX": {"k_nn": [1, 5, 10]},
    "NovRejZ": {"k_nn": [1, 5, 10]},
    "PredAmb": {},
    "StabRej": {},
    "FaithRej": {},
    "ComplRej": {},
    "PASTARejLite": {},
}

# kinds that work from the explanation alone, usable with annotation-sourced runs
Z_ONLY_KINDS = ("ULER", "ULER_NoAug", "RandRej", "NovRejZ", "ComplRej", "PASTARejLite")


class ConfigError(ValueError):
    """Invalid experiment config; the message carries a JSON-pointer path."""


class ExperimentError(RuntimeError):
    """Failure inside a run, tagged with (repeat, rejector) context."""


def auroc(scores, labels) -> float:
    """Probability that a random high-quality item outscores a random
    low-quality one, ties counting one half (Mann-Whitney). NaN when only
    one class is present."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = labels == 1
    neg = labels == 0
    n1 = int(pos.sum())
    n0 = int(neg.sum())
    if n1 == 0 or n0 == 0:
        return float("nan")
    order = np.argsort(scores, kind="mergesort")
    _, inverse, counts = np.unique(scores[order], return_inverse=True, return_counts=True)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    midranks_by_group = starts + (counts + 1) / 2.0
    ranks = np.empty(scores.size)
    ranks[order] = midranks_by_group[inverse]
    u = ranks[pos].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


@dataclass(frozen=True)
class SetComposition:
    pct_low_accepted: float
    pct_low_rejected: float
    n_accepted: int
    n_rejected: int


def set_composition(scores, labels, rate: float) -> SetComposition:
    """Reject the round(rate*n) lowest-scoring items (stable ties) and report
    the low-quality fraction of each side."""
    if not 0.0 < rate < 1.0:
        raise ValueError("rate must lie strictly inside (0, 1)")
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    n = scores.size
    n_rejected = int(math.floor(rate * n + 0.5))
    order = np.argsort(scores, kind="stable")
    rejected = order[:n_rejected]
    accepted = order[n_rejected:]

    def low_fraction(idx):
        if idx.size == 0:
            return float("nan")
        return float(np.mean(labels[idx] == 0))

    return SetComposition(
        pct_low_accepted=low_fraction(accepted),
        pct_low_rejected=low_fraction(rejected),
        n_accepted=int(accepted.size),
        n_rejected=n_rejected,
    )


def paired_t_test(a, b) -> tuple[float, float]:
    """Paired t-test on matched score sequences; returns (statistic, p-value)."""
    result = _scipy_stats.ttest_rel(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return float(result.statistic), float(result.pvalue)


def expand_grid(grid: dict) -> list[dict]:
    """All combinations of a {name: [values]} grid, in declaration order."""
    if not grid:
        return [{}]
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def grid_search(
    kind: str,
    grid: dict,
    train: list[JudgedExplanation],
    val: list[JudgedExplanation],
    train_ctx: RejectionContext,
    val_ctx: RejectionContext,
    seed: int = 0,
):
    """Exhaustive search maximizing validation AUROC; ties keep grid order.

    Returns (best_params, fitted_rejector, best_val_auroc).
    """
    candidates = expand_grid(grid)
    if not candidates:
        raise ValueError("grid must be nonempty")
    val_labels = np.array([j.label for j in val])
    val_expl = [j.explanation for j in val]
    best = None
    for params in candidates:
        model = make_rejector(kind, seed=seed, **params).fit(train, train_ctx)
        score = auroc(model.score(val_expl, val_ctx), val_labels)
        key = -np.inf if math.isnan(score) else score
        if best is None or key > best[0]:
            best = (key, params, model, score)
    return best[1], best[2], best[3]


@dataclass(frozen=True)
class ResultRecord:
    dataset: str
    rejector: str
    repeat: int
    seed: int
    rate: float
    auroc: float
    pct_low_quality_accepted: float
    pct_low_quality_rejected: float
    n_accepted: int
    n_rejected: int
    hyperparameters: str


@dataclass
class ExperimentResult:
    records: list[ResultRecord]
    summary: dict
    curves: list[dict]
    gammas: list[float] = field(default_factory=list)


@dataclass
class ExperimentConfig:
    """Validated experiment description; build from a JSON dict via from_dict."""

    dataset: dict
    judgments: dict
    rejectors: list[str]
    grids: dict[str, dict]
    repeats: int
    rejection_rates: tuple[float, ...]
    master_seed: int
    predictor_fraction: float
    predictor_l2: float
    oracle_l2: float
    oracle_bandwidth: float | None
    oracle_support_cap: int
    ensemble_members: int
    explainer_n_samples: int
    explainer_background_cap: int

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        def fail(path, message):
            raise ConfigError(f"{path}: {message}")

        if not isinstance(raw, dict):
            fail("/", "config must be a JSON object")
        dataset = raw.get("dataset")
        judgments = raw.get("judgments", {"source": "simulate"})
        if not isinstance(judgments, dict) or judgments.get("source") not in ("simulate", "annotations"):
            fail("/judgments/source", "must be 'simulate' or 'annotations'")

        if judgments["source"] == "simulate":
            if not isinstance(dataset, dict):
                fail("/dataset", "required object with source 'synthetic' or 'csv'")
            source = dataset.get("source")
            if source == "synthetic":
                for key in ("n", "d", "task"):
                    if key not in dataset:
                        fail(f"/dataset/{key}", "required for synthetic datasets")
            elif source == "csv":
                for key in ("path", "target_column", "task"):
                    if key not in dataset:
                        fail(f"/dataset/{key}", "required for csv datasets")
            else:
                fail("/dataset/source", "must be 'synthetic' or 'csv'")
            if dataset["task"] not in ("classification", "regression"):
                fail("/dataset/task", "must be 'classification' or 'regression'")
        else:
            for key in ("annotations_path", "explanations_path"):
                if key not in judgments and "judged_path" not in judgments:
                    fail(f"/judgments/{key}", "required for annotation-sourced runs (or provide judged_path)")
            dataset = dataset or {}

        rejectors = raw.get("rejectors")
        if not isinstance(rejectors, list) or not rejectors:
            fail("/rejectors", "must be a nonempty list of rejector kinds")
        for i, kind in enumerate(rejectors):
            if kind not in REJECTOR_KINDS:
                fail(f"/rejectors/{i}", f"unknown rejector '{kind}'; valid kinds: {list(REJECTOR_KINDS)}")
            if judgments["source"] == "annotations" and kind not in Z_ONLY_KINDS:
                fail(
                    f"/rejectors/{i}",
                    f"'{kind}' needs instance/prediction context; annotation-sourced runs support {list(Z_ONLY_KINDS)}",
                )
        if len(set(rejectors)) != len(rejectors):
            fail("/rejectors", "duplicate rejector kinds")

        grids = raw.get("grids", {})
        if not isinstance(grids, dict):
            fail("/grids", "must be an object mapping kind -> grid")
        for kind, grid in grids.items():
            if kind not in REJECTOR_KINDS:
                fail(f"/grids/{kind}", "unknown rejector kind")
            if not isinstance(grid, dict) or not all(isinstance(v, list) and v for v in grid.values()):
                fail(f"/grids/{kind}", "grid values must be nonempty lists")

        repeats = raw.get("repeats", 10)
        if not isinstance(repeats, int) or repeats < 1:
            fail("/repeats", "must be an integer >= 1")
        rates = tuple(raw.get("rejection_rates", DEFAULT_RATES))
        for i, rate in enumerate(rates):
            if not 0.0 < rate < 1.0:
                fail(f"/rejection_rates/{i}", "rates must lie in (0, 1)")

        predictor = raw.get("predictor", {})
        explainer = raw.get("explainer", {})
        fraction = float(predictor.get("fraction", 0.5))
        if not 0.0 < fraction < 1.0:
            fail("/predictor/fraction", "must lie in (0, 1)")

        return cls(
            dataset=dict(dataset),
            judgments=dict(judgments),
            rejectors=list(rejectors),
            grids={k: dict(v) for k, v in grids.items()},
            repeats=repeats,
            rejection_rates=rates,
            master_seed=int(raw.get("master_seed", 0)),
            predictor_fraction=fraction,
            predictor_l2=float(predictor.get("l2", 1e-2)),
            oracle_l2=float(predictor.get("oracle_l2", 1e-3)),
            oracle_bandwidth=predictor.get("oracle_bandwidth"),
            oracle_support_cap=int(predictor.get("oracle_support_cap", 400)),
            ensemble_members=int(predictor.get("ensemble_members", 10)),
            explainer_n_samples=int(explainer.get("n_samples", 100)),
            explainer_background_cap=int(explainer.get("background_cap", 32)),
        )

    def grid_for(self, kind: str) -> dict:
        return self.grids.get(kind, DEFAULT_GRIDS[kind])

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "dataset": self.dataset,
            "judgments": self.judgments,
            "rejectors": self.rejectors,
            "grids": self.grids,
            "repeats": self.repeats,
            "rejection_rates": list(self.rejection_rates),
            "master_seed": self.master_seed,
            "predictor": {
                "fraction": self.predictor_fraction,
                "l2": self.predictor_l2,
                "oracle_l2": self.oracle_l2,
                "oracle_bandwidth": self.oracle_bandwidth,
                "oracle_support_cap": self.oracle_support_cap,
                "ensemble_members": self.ensemble_members,
            },
            "explainer": {
                "n_samples": self.explainer_n_samples,
                "background_cap": self.explainer_background_cap,
            },
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def dataset_id(self) -> str:
        if self.judgments["source"] == "annotations":
            path = self.judgments.get("annotations_path") or self.judgments.get("judged_path")
            return Path(path).stem
        if self.dataset["source"] == "csv":
            return Path(self.dataset["path"]).stem
        d = self.dataset
        return f"synthetic-{d['task']}-n{d['n']}-d{d['d']}-m{d.get('mismatch_strength', 1.0)}"


def _load_dataset(cfg: ExperimentConfig) -> Dataset:
    d = cfg.dataset
    if d["source"] == "synthetic":
        spec = SyntheticSpec(
            n=int(d["n"]),
            d=int(d["d"]),
            task=Task(d["task"]),
            mismatch_strength=float(d.get("mismatch_strength", 1.0)),
            seed=int(d.get("seed", 0)),
        )
        return make_synthetic(spec)
    return load_csv(d["path"], d["target_column"], Task(d["task"]))


def _two_way_split(n: int, fraction: float, seed: int, strata: np.ndarray | None):
    rng = np.random.default_rng(seed)
    if strata is None:
        strata = np.zeros(n)
    first_parts, second_parts = [], []
    for value in np.unique(strata):
        members = np.flatnonzero(strata == value)
        members = members[rng.permutation(len(members))]
        cut = int(round(fraction * len(members)))
        first_parts.append(members[:cut])
        second_parts.append(members[cut:])
    return np.concatenate(first_parts), np.concatenate(second_parts)


@dataclass
class _RepeatData:
    judged: list[JudgedExplanation]
    train_pos: np.ndarray
    val_pos: np.ndarray
    test_pos: np.ndarray
    contexts: dict[str, RejectionContext]
    gamma: float


def _seed_for(cfg: ExperimentConfig, repeat: int, slot: int) -> int:
    return int(np.random.SeedSequence(cfg.master_seed, spawn_key=(repeat, slot)).generate_state(1)[0])


def _kind_seed(cfg: ExperimentConfig, repeat: int, kind: str) -> int:
    kind_index = REJECTOR_KINDS.index(kind)
    return int(
        np.random.SeedSequence(cfg.master_seed, spawn_key=(repeat, 1000 + kind_index)).generate_state(1)[0]
    )


def _simulated_repeat_data(cfg: ExperimentConfig, dataset: Dataset, repeat: int) -> _RepeatData:
    task = dataset.task
    strata = dataset.targets if task is Task.CLASSIFICATION else None
    pred_idx, judged_idx = _two_way_split(dataset.n, cfg.predictor_fraction, _seed_for(cfg, repeat, 0), strata)
    dataset, _ = standardize(dataset, pred_idx)
    X = dataset.features
    y = dataset.targets

    f_kind = PredictorKind.LOGISTIC_REGRESSION if task is Task.CLASSIFICATION else PredictorKind.LINEAR_REGRESSION
    o_kind = PredictorKind.KERNEL_LOGISTIC if task is Task.CLASSIFICATION else PredictorKind.KERNEL_RIDGE
    predictor = fit_predictor(f_kind, X[pred_idx], y[pred_idx], l2=cfg.predictor_l2, seed=_seed_for(cfg, repeat, 1))

    oracle_rng = np.random.default_rng(_seed_for(cfg, repeat, 2))
    if pred_idx.size > cfg.oracle_support_cap:
        oracle_idx = pred_idx[oracle_rng.choice(pred_idx.size, size=cfg.oracle_support_cap, replace=False)]
    else:
        oracle_idx = pred_idx
    oracle = fit_predictor(
        o_kind,
        X[oracle_idx],
        y[oracle_idx],
        l2=cfg.oracle_l2,
        bandwidth=cfg.oracle_bandwidth,
        seed=_seed_for(cfg, repeat, 2),
    )

    bg_rng = np.random.default_rng(_seed_for(cfg, repeat, 3))
    if pred_idx.size > cfg.explainer_background_cap:
        background = X[pred_idx[bg_rng.choice(pred_idx.size, size=cfg.explainer_background_cap, replace=False)]]
    else:
        background = X[pred_idx]

    explain_seed = _seed_for(cfg, repeat, 4)
    judge_cfg = JudgmentConfig(
        tau_z=float(cfg.judgments.get("tau_z", JudgmentConfig().tau_z)),
        u_pct=float(cfg.judgments.get("u_pct", JudgmentConfig().u_pct)),
    )
    judged: list[JudgedExplanation] = []
    for pos, row in enumerate(judged_idx):
        base_cfg = ExplainerConfig(
            background=background,
            n_samples=cfg.explainer_n_samples,
            seed=int(np.random.SeedSequence(explain_seed, spawn_key=(int(row),)).generate_state(1)[0]),
            background_cap=cfg.explainer_background_cap,
        )
        z_f = kernel_shap(predictor, X[row], base_cfg, instance_id=str(int(row)))
        z_o = kernel_shap(oracle, X[row], base_cfg, instance_id=str(int(row)))
        judged.append(simulate_judgment(z_f, z_o, judge_cfg))

    labels = np.array([j.label for j in judged])
    gamma = float(np.mean(labels == 0))
    judged_view = dataset.subset(judged_idx)
    parts = split(judged_view, _seed_for(cfg, repeat, 5), labels=labels)

    ensemble = None
    if task is Task.REGRESSION:
        ensemble = fit_bootstrap_ensemble(
            f_kind,
            X[pred_idx],
            y[pred_idx],
            n_members=cfg.ensemble_members,
            seed=_seed_for(cfg, repeat, 6),
            l2=cfg.predictor_l2,
        )

    contexts = {}
    base_explainer = ExplainerConfig(
        background=background,
        n_samples=cfg.explainer_n_samples,
        seed=explain_seed,
        background_cap=cfg.explainer_background_cap,
    )
    for name, pos_idx in (("train", parts.train), ("val", parts.val), ("test", parts.test)):
        rows = judged_view.features[pos_idx]
        contexts[name] = RejectionContext(
            instances=rows,
            predictions=predictor.predict(rows),
            predictor=predictor,
            ensemble=ensemble,
            explainer_cfg=base_explainer,
            background=background,
        )
    return _RepeatData(
        judged=judged,
        train_pos=parts.train,
        val_pos=parts.val,
        test_pos=parts.test,
        contexts=contexts,
        gamma=gamma,
    )


def _annotation_repeat_data(cfg: ExperimentConfig, repeat: int) -> _RepeatData:
    if "judged_path" in cfg.judgments:
        judged = judged_from_csv(cfg.judgments["judged_path"])
    else:
        from .explain import explanations_from_csv

        records = annotations_from_csv(cfg.judgments["annotations_path"])
        explanations = {e.instance_id: e for e in explanations_from_csv(cfg.judgments["explanations_path"])}
        judged, _ = aggregate_annotations(records, explanations)
    labels = np.array([j.label for j in judged])
    gamma = float(np.mean(labels == 0))
    matrix = np.asarray([j.explanation.relevance for j in judged])
    view = Dataset(matrix, labels, tuple(f"z{i}" for i in range(matrix.shape[1])), Task.CLASSIFICATION)
    parts = split(view, _seed_for(cfg, repeat, 5), labels=labels)
    contexts = {name: RejectionContext() for name in ("train", "val", "test")}
    return _RepeatData(judged, parts.train, parts.val, parts.test, contexts, gamma)


def _run_repeat(cfg: ExperimentConfig, repeat: int) -> tuple[list[ResultRecord], float]:
    if cfg.judgments["source"] == "simulate":
        data = _simulated_repeat_data(cfg, _load_dataset(cfg), repeat)
    else:
        data = _annotation_repeat_data(cfg, repeat)

    train = [data.judged[i] for i in data.train_pos]
    val = [data.judged[i] for i in data.val_pos]
    test = [data.judged[i] for i in data.test_pos]
    test_expl = [j.explanation for j in test]
    test_labels = np.array([j.label for j in test])
    dataset_id = cfg.dataset_id()

    records: list[ResultRecord] = []
    for kind in cfg.rejectors:
        seed = _kind_seed(cfg, repeat, kind)
        try:
            params, model, _ = grid_search(
                kind,
                cfg.grid_for(kind),
                train,
                val,
                data.contexts["train"],
                data.contexts["val"],
                seed=seed,
            )
            scores = np.asarray(model.score(test_expl, data.contexts["test"]), dtype=float)
            rejector_auroc = auroc(scores, test_labels)
            hyper = json.dumps(params, sort_keys=True)
            for rate in cfg.rejection_rates:
                comp = set_composition(scores, test_labels, rate)
                records.append(
                    ResultRecord(
                        dataset=dataset_id,
                        rejector=kind,
                        repeat=repeat,
                        seed=seed,
                        rate=rate,
                        auroc=rejector_auroc,
                        pct_low_quality_accepted=comp.pct_low_accepted,
                        pct_low_quality_rejected=comp.pct_low_rejected,
                        n_accepted=comp.n_accepted,
                        n_rejected=comp.n_rejected,
                        hyperparameters=hyper,
                    )
                )
        except Exception as exc:
            raise ExperimentError(f"repeat {repeat}, rejector {kind}: {exc}") from exc
    return records, data.gamma


def _repeat_worker(raw_cfg: dict, repeat: int):
    return _run_repeat(ExperimentConfig.from_dict(raw_cfg), repeat)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Run every repeat, collect per-rate records, and summarize.

    ``workers > 1`` distributes repeats over processes; outputs are identical
    to a serial run because every repeat owns its derived seed streams.
    """
    if workers > 1:
        raw = cfg.to_dict()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_repeat_worker, [raw] * cfg.repeats, range(cfg.repeats)))
    else:
        outcomes = [_run_repeat(cfg, repeat) for repeat in range(cfg.repeats)]

    records: list[ResultRecord] = []
    gammas: list[float] = []
    for repeat_records, gamma in outcomes:
        records.extend(repeat_records)
        gammas.append(gamma)

    summary = {
        "schema_version": SCHEMA_VERSION,
        "dataset": cfg.dataset_id(),
        "master_seed": cfg.master_seed,
        "config_hash": cfg.config_hash(),
        "repeats": cfg.repeats,
        "gamma_per_repeat": gammas,
        "rejectors": {},
    }
    curves: list[dict] = []
    for kind in cfg.rejectors:
        kind_records = [r for r in records if r.rejector == kind]
        per_repeat_auroc = {}
        for r in kind_records:
            per_repeat_auroc[r.repeat] = r.auroc
        aurocs = np.array([per_repeat_auroc[i] for i in sorted(per_repeat_auroc)])
        summary["rejectors"][kind] = {
            "mean_auroc": float(np.nanmean(aurocs)),
            "std_auroc": float(np.nanstd(aurocs)),
            "auroc_per_repeat": [float(a) for a in aurocs],
        }
        for rate in cfg.rejection_rates:
            rate_records = [r for r in kind_records if r.rate == rate]
            curves.append(
                {
                    "rejector": kind,
                    "rate": rate,
                    "mean_pct_low_accepted": float(np.nanmean([r.pct_low_quality_accepted for r in rate_records])),
                    "mean_pct_low_rejected": float(np.nanmean([r.pct_low_quality_rejected for r in rate_records])),
                }
            )
    return ExperimentResult(records=records, summary=summary, curves=curves, gammas=gammas)


_RESULT_COLUMNS = [
    "dataset",
    "rejector",
    "repeat",
    "seed",
    "rate",
    "auroc",
    "pct_low_quality_accepted",
    "pct_low_quality_rejected",
    "n_accepted",
    "n_rejected",
    "hyperparameters",
]


def write_results_csv(path, records: list[ResultRecord], provenance: str | None = None) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        if provenance:
            handle.write(f"# {provenance}\n")
        writer = csv.writer(handle)
        writer.writerow(_RESULT_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.dataset,
                    r.rejector,
                    r.repeat,
                    r.seed,
                    repr(r.rate),
                    repr(r.auroc),
                    repr(r.pct_low_quality_accepted),
                    repr(r.pct_low_quality_rejected),
                    r.n_accepted,
                    r.n_rejected,
                    r.hyperparameters,
                ]
            )


def write_curves_csv(path, curves: list[dict], provenance: str | None = None) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        if provenance:
            handle.write(f"# {provenance}\n")
        writer = csv.writer(handle)
        writer.writerow(["rejector", "rate", "mean_pct_low_accepted", "mean_pct_low_rejected"])
        for row in curves:
            writer.writerow(
                [
                    row["rejector"],
                    repr(row["rate"]),
                    repr(row["mean_pct_low_accepted"]),
                    repr(row["mean_pct_low_rejected"]),
                ]
            )


def write_summary_json(path, summary: dict, provenance: dict | None = None) -> None:
    payload = dict(summary)
    if provenance:
        payload["provenance"] = provenance
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
