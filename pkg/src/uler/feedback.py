"""Quality judgments over explanations.

Two sources: simulated judgments against an oracle explanation (label by
Pearson correlation, wrong-feature sets by an L1-mass prefix rule), and
aggregation of real Likert-scale annotations with the standard exclusion
filters.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .explain import Explanation

__all__ = [
    "JudgedExplanation",
    "JudgmentConfig",
    "AnnotationRecord",
    "ExclusionReport",
    "AggregationError",
    "pearson",
    "simulate_judgment",
    "aggregate_annotations",
    "judged_to_csv",
    "judged_from_csv",
    "annotations_from_csv",
    "annotations_to_csv",
]

DEFAULT_TAU_Z = 0.25
DEFAULT_U_PCT = 0.75
DEFAULT_SD_CUTOFF = 1.25
DEFAULT_RATING_CUTOFF = 3.0


@dataclass(frozen=True)
class JudgedExplanation:
    """Explanation plus its binary quality label and wrong/correct index sets."""

    explanation: Explanation
    label: int
    wrong_set: np.ndarray
    correct_set: np.ndarray

    def __post_init__(self):
        wrong = np.asarray(sorted(int(i) for i in np.atleast_1d(self.wrong_set)), dtype=int)
        correct = np.asarray(sorted(int(i) for i in np.atleast_1d(self.correct_set)), dtype=int)
        object.__setattr__(self, "wrong_set", wrong)
        object.__setattr__(self, "correct_set", correct)
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")
        d = self.explanation.d
        union = set(wrong.tolist()) | set(correct.tolist())
        if set(wrong.tolist()) & set(correct.tolist()):
            raise ValueError("wrong_set and correct_set must be disjoint")
        if union != set(range(d)):
            raise ValueError("wrong_set and correct_set must cover all features")


@dataclass(frozen=True)
class JudgmentConfig:
    tau_z: float = DEFAULT_TAU_Z
    u_pct: float = DEFAULT_U_PCT

    def __post_init__(self):
        if not -1.0 <= self.tau_z <= 1.0:
            raise ValueError("tau_z must lie in [-1, 1]")
        if not 0.0 < self.u_pct < 1.0:
            raise ValueError("u_pct must lie in (0, 1)")


@dataclass(frozen=True)
class AnnotationRecord:
    explanation_id: str
    annotator_id: str
    rating: int
    flagged_features: tuple[int, ...]
    attention_pass: bool

    def __post_init__(self):
        if self.rating not in (1, 2, 3, 4, 5):
            raise ValueError(f"rating must be 1..5, got {self.rating}")
        object.__setattr__(self, "flagged_features", tuple(int(i) for i in self.flagged_features))


@dataclass
class ExclusionReport:
    """Who was dropped during aggregation and why."""

    excluded_annotators: list[tuple[str, str]] = field(default_factory=list)
    excluded_explanations: list[tuple[str, str]] = field(default_factory=list)
    n_annotators_in: int = 0
    n_annotators_kept: int = 0
    n_explanations_in: int = 0
    n_explanations_kept: int = 0

    def to_json_dict(self) -> dict:
        return {
            "excluded_annotators": [{"annotator_id": a, "reason": r} for a, r in self.excluded_annotators],
            "excluded_explanations": [{"explanation_id": e, "reason": r} for e, r in self.excluded_explanations],
            "n_annotators_in": self.n_annotators_in,
            "n_annotators_kept": self.n_annotators_kept,
            "n_explanations_in": self.n_explanations_in,
            "n_explanations_kept": self.n_explanations_kept,
        }


class AggregationError(ValueError):
    def __init__(self, message: str, report: ExclusionReport):
        super().__init__(message)
        self.report = report


def pearson(a, b) -> float:
    """Pearson correlation; 0 by convention when either vector is constant."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size:
        raise ValueError("vectors must share a length")
    if a.size < 2:
        raise ValueError("need length >= 2")
    ac = a - a.mean()
    bc = b - b.mean()
    denom = np.sqrt((ac @ ac) * (bc @ bc))
    if denom == 0.0:
        return 0.0
    return float(np.clip((ac @ bc) / denom, -1.0, 1.0))


def simulate_judgment(z: Explanation, z_oracle: Explanation, cfg: JudgmentConfig = JudgmentConfig()) -> JudgedExplanation:
    """Label ``z`` against the oracle explanation and build its wrong-feature set.

    High quality iff the Pearson correlation reaches ``tau_z``. The wrong
    set is the shortest prefix of features, ordered by descending
    |z_i - z_oracle_i| (ties by index), whose differences cover ``u_pct``
    of the L1 distance for low-quality explanations, and ``1 - u_pct`` of
    it for high-quality ones. Identical explanations are high quality with
    an empty wrong set.
    """
    if z.d != z_oracle.d:
        raise ValueError("explanations must share a dimension")
    d = z.d
    diffs = np.abs(z.relevance - z_oracle.relevance)
    l1 = float(diffs.sum())
    if l1 == 0.0:
        return JudgedExplanation(z, 1, np.empty(0, dtype=int), np.arange(d))

    label = 1 if pearson(z.relevance, z_oracle.relevance) >= cfg.tau_z else 0
    q = cfg.u_pct if label == 0 else 1.0 - cfg.u_pct
    order = np.lexsort((np.arange(d), -diffs))
    cumulative = np.cumsum(diffs[order])
    k = int(np.searchsorted(cumulative, q * l1)) + 1
    k = min(k, d)
    wrong = order[:k]
    correct = order[k:]
    return JudgedExplanation(z, label, wrong, correct)


def _population_std(values: list[int]) -> float:
    return float(np.std(np.asarray(values, dtype=float)))


def aggregate_annotations(
    records: list[AnnotationRecord],
    explanations: dict[str, Explanation],
    sd_cutoff: float = DEFAULT_SD_CUTOFF,
    rating_cutoff: float = DEFAULT_RATING_CUTOFF,
    max_attention_failures: int = 1,
) -> tuple[list[JudgedExplanation], ExclusionReport]:
    """Aggregate per-annotator records into judged explanations.

    Annotators are dropped when they fail ``max_attention_failures`` or more
    attention checks, rate every trial identically, or never flag a feature
    across their whole session. Explanations are dropped when their rating
    population-stddev exceeds ``sd_cutoff`` or no annotations survive. The
    label is high quality iff the mean rating is >= ``rating_cutoff``;
    the wrong set contains features flagged by a strict majority of the
    surviving annotators.
    """
    report = ExclusionReport()
    by_annotator: dict[str, list[AnnotationRecord]] = defaultdict(list)
    for rec in records:
        by_annotator[rec.annotator_id].append(rec)
    report.n_annotators_in = len(by_annotator)
    report.n_explanations_in = len({rec.explanation_id for rec in records})

    surviving: list[AnnotationRecord] = []
    for annotator in sorted(by_annotator):
        recs = by_annotator[annotator]
        failures = sum(1 for r in recs if not r.attention_pass)
        if failures >= max_attention_failures:
            report.excluded_annotators.append((annotator, f"failed {failures} attention check(s)"))
            continue
        if len({r.rating for r in recs}) == 1:
            report.excluded_annotators.append((annotator, "all ratings identical"))
            continue
        if all(len(r.flagged_features) == 0 for r in recs):
            report.excluded_annotators.append((annotator, "no features flagged in any trial"))
            continue
        surviving.extend(recs)
    report.n_annotators_kept = report.n_annotators_in - len(report.excluded_annotators)

    if not surviving:
        raise AggregationError("no annotations survive the annotator filters", report)

    by_explanation: dict[str, list[AnnotationRecord]] = defaultdict(list)
    for rec in surviving:
        by_explanation[rec.explanation_id].append(rec)

    judged: list[JudgedExplanation] = []
    all_ids = sorted({rec.explanation_id for rec in records})
    for explanation_id in all_ids:
        recs = by_explanation.get(explanation_id, [])
        if not recs:
            report.excluded_explanations.append((explanation_id, "no surviving annotations"))
            continue
        ratings = [r.rating for r in recs]
        sd = _population_std(ratings)
        if sd > sd_cutoff:
            report.excluded_explanations.append(
                (explanation_id, f"rating stddev {sd:.2f} > {sd_cutoff}")
            )
            continue
        if explanation_id not in explanations:
            raise AggregationError(f"unknown explanation_id '{explanation_id}'", report)
        explanation = explanations[explanation_id]
        label = 1 if float(np.mean(ratings)) >= rating_cutoff else 0
        flag_counts = defaultdict(int)
        for r in recs:
            for i in set(r.flagged_features):
                flag_counts[i] += 1
        majority = len(recs) / 2.0
        wrong = np.asarray(sorted(i for i, c in flag_counts.items() if c > majority), dtype=int)
        correct = np.asarray([i for i in range(explanation.d) if i not in set(wrong.tolist())], dtype=int)
        judged.append(JudgedExplanation(explanation, label, wrong, correct))

    report.n_explanations_kept = len(judged)
    if not judged:
        raise AggregationError("every explanation was excluded", report)
    return judged, report


def judged_to_csv(path, judged: list[JudgedExplanation], provenance: str | None = None) -> None:
    """Explanation CSV columns plus the label and semicolon-separated wrong set."""
    path = Path(path)
    d = judged[0].explanation.d if judged else 0
    with path.open("w", newline="", encoding="utf-8") as handle:
        if provenance:
            handle.write(f"# {provenance}\n")
        writer = csv.writer(handle)
        writer.writerow(
            ["instance_id", "base_value"] + [f"z_{i + 1}" for i in range(d)] + ["label", "wrong_set"]
        )
        for j in judged:
            e = j.explanation
            writer.writerow(
                [e.instance_id, repr(e.base_value)]
                + [repr(float(v)) for v in e.relevance]
                + [j.label, ";".join(str(i) for i in j.wrong_set)]
            )


def judged_from_csv(path) -> list[JudgedExplanation]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        rows = [row for row in csv.reader(handle) if row and not row[0].startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty judged-explanations file")
    out = []
    for row in rows[1:]:
        relevance = np.asarray([float(v) for v in row[2:-2]])
        wrong = np.asarray([int(v) for v in row[-1].split(";") if v != ""], dtype=int)
        correct = np.asarray([i for i in range(relevance.size) if i not in set(wrong.tolist())], dtype=int)
        out.append(
            JudgedExplanation(
                Explanation(relevance, float(row[1]), row[0]),
                int(row[-2]),
                wrong,
                correct,
            )
        )
    return out


def annotations_from_csv(path) -> list[AnnotationRecord]:
    """Annotation CSV: explanation_id, annotator_id, rating, flagged_features, attention_pass."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        rows = [row for row in csv.reader(handle) if row and not row[0].startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty annotations file")
    header = [h.strip() for h in rows[0]]
    expected = ["explanation_id", "annotator_id", "rating", "flagged_features", "attention_pass"]
    if header != expected:
        raise ValueError(f"{path}: expected header {expected}, got {header}")
    records = []
    for r, row in enumerate(rows[1:], start=1):
        try:
            flagged = tuple(int(v) for v in row[3].split(";") if v != "")
            records.append(
                AnnotationRecord(
                    explanation_id=row[0],
                    annotator_id=row[1],
                    rating=int(row[2]),
                    flagged_features=flagged,
                    attention_pass=row[4].strip() == "1",
                )
            )
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}: bad annotation at row {r}: {exc}") from None
    return records


def annotations_to_csv(path, records: list[AnnotationRecord]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["explanation_id", "annotator_id", "rating", "flagged_features", "attention_pass"])
        for rec in records:
            writer.writerow(
                [
                    rec.explanation_id,
                    rec.annotator_id,
                    rec.rating,
                    ";".join(str(i) for i in rec.flagged_features),
                    1 if rec.attention_pass else 0,
                ]
            )
