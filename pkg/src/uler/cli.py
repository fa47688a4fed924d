"""Command-line front end: synth, run, ingest-annotations, explain, calibrate.

Every output file carries a provenance header (tool version, config hash,
master seed). The default output directory comes from ULER_OUT_DIR.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import ConfigError, ExperimentConfig, run_experiment, write_curves_csv, write_results_csv, write_summary_json
from .data import SyntheticSpec, Task, load_csv, make_synthetic
from .explain import ExplainerConfig, explanations_from_csv, explanations_to_csv, kernel_shap
from .feedback import AggregationError, aggregate_annotations, annotations_from_csv, judged_to_csv
from .models import Predictor, PredictorKind, fit_predictor
from .reject import MatchTrainLowQualityFraction, TargetRate, calibrate_threshold

__all__ = ["main"]


def _out_dir(value: str | None) -> Path:
    path = Path(value or os.environ.get("ULER_OUT_DIR", "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _provenance(seed, config_hash: str) -> str:
    return json.dumps(
        {"tool": "uler", "version": __version__, "config_hash": config_hash, "master_seed": seed},
        sort_keys=True,
    )


def _hash_dict(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n=args.n,
        d=args.d,
        task=Task(args.task),
        mismatch_strength=args.mismatch_strength,
        seed=args.seed,
    )
    dataset = make_synthetic(spec)
    out = _out_dir(args.out)
    spec_dict = {
        "n": spec.n,
        "d": spec.d,
        "task": spec.task.value,
        "mismatch_strength": spec.mismatch_strength,
        "seed": spec.seed,
    }
    provenance = _provenance(spec.seed, _hash_dict(spec_dict))

    csv_path = out / "dataset.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as handle:
        handle.write(f"# {provenance}\n")
        writer = csv.writer(handle)
        writer.writerow(list(dataset.feature_names) + ["target"])
        for row, target in zip(dataset.features, dataset.targets):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(target))])
    (out / "dataset_provenance.json").write_text(
        json.dumps({"spec": spec_dict, "provenance": json.loads(provenance)}, indent=2, sort_keys=True),
        encoding="utf-8",
    )
    print(f"wrote {csv_path} ({dataset.n} rows, {dataset.d} features)")
    return 0


def _cmd_run(args) -> int:
    raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.repeats is not None:
        raw["repeats"] = args.repeats
    if args.master_seed is not None:
        raw["master_seed"] = args.master_seed
    cfg = ExperimentConfig.from_dict(raw)
    result = run_experiment(cfg, workers=args.workers)
    out = _out_dir(args.out)
    provenance = _provenance(cfg.master_seed, cfg.config_hash())
    write_results_csv(out / "results.csv", result.records, provenance)
    write_curves_csv(out / "curves.csv", result.curves, provenance)
    write_summary_json(out / "summary.json", result.summary, json.loads(provenance))
    for kind, entry in result.summary["rejectors"].items():
        print(f"{kind}: AUROC {entry['mean_auroc']:.3f} +/- {entry['std_auroc']:.3f}")
    print(f"wrote {out / 'results.csv'}, {out / 'curves.csv'}, {out / 'summary.json'}")
    return 0


def _cmd_ingest_annotations(args) -> int:
    records = annotations_from_csv(args.annotations)
    explanations = {e.instance_id: e for e in explanations_from_csv(args.explanations)}
    missing = sorted({r.explanation_id for r in records} - set(explanations))
    if missing:
        print(f"error: annotation explanation_ids without explanations: {missing}", file=sys.stderr)
        return 1
    out = _out_dir(args.out)
    provenance = _provenance(args.seed, _hash_dict({"annotations": str(args.annotations)}))
    try:
        judged, report = aggregate_annotations(
            records,
            explanations,
            sd_cutoff=args.sd_cutoff,
            rating_cutoff=args.rating_cutoff,
            max_attention_failures=args.max_attention_failures,
        )
    except AggregationError as exc:
        (out / "exclusions.json").write_text(
            json.dumps(exc.report.to_json_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )
        print(f"error: {exc}", file=sys.stderr)
        return 1
    judged_to_csv(out / "judged.csv", judged, provenance)
    (out / "exclusions.json").write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True), encoding="utf-8"
    )
    print(
        f"kept {report.n_annotators_kept}/{report.n_annotators_in} annotators, "
        f"{report.n_explanations_kept}/{report.n_explanations_in} explanations"
    )
    print(f"wrote {out / 'judged.csv'}, {out / 'exclusions.json'}")
    return 0


def _cmd_explain(args) -> int:
    dataset = load_csv(args.data, args.target_column, Task(args.task))
    if args.model_json:
        predictor = Predictor.from_json(Path(args.model_json).read_text(encoding="utf-8"))
    else:
        kind = (
            PredictorKind.LOGISTIC_REGRESSION
            if dataset.task is Task.CLASSIFICATION
            else PredictorKind.LINEAR_REGRESSION
        )
        predictor = fit_predictor(kind, dataset.features, dataset.targets, l2=args.l2, seed=args.seed)
    cfg = ExplainerConfig(
        background=dataset.features,
        n_samples=args.n_samples,
        seed=args.seed,
        background_cap=args.background_cap,
    )
    explanations = [
        kernel_shap(predictor, dataset.features[i], cfg, instance_id=str(i)) for i in range(dataset.n)
    ]
    out = _out_dir(args.out)
    provenance = _provenance(args.seed, _hash_dict({"data": str(args.data), "n_samples": args.n_samples}))
    explanations_to_csv(out / "explanations.csv", explanations, provenance)
    (out / "model.json").write_text(predictor.to_json(), encoding="utf-8")
    print(f"wrote {out / 'explanations.csv'} ({len(explanations)} explanations)")
    return 0


def _cmd_calibrate(args) -> int:
    with Path(args.scores).open(newline="", encoding="utf-8") as handle:
        rows = [row for row in csv.reader(handle) if row and not row[0].startswith("#")]
    header = rows[0]
    if "score" not in header:
        print(f"error: scores file needs a 'score' column, got {header}", file=sys.stderr)
        return 1
    idx = header.index("score")
    scores = np.array([float(row[idx]) for row in rows[1:]])

    if args.strategy == "target-rate":
        if args.rate is None:
            print("error: --rate is required for target-rate", file=sys.stderr)
            return 1
        strategy = TargetRate(args.rate)
        value = args.rate
    else:
        if args.gamma is None:
            print("error: --gamma is required for match-train-gamma", file=sys.stderr)
            return 1
        strategy = MatchTrainLowQualityFraction(args.gamma)
        value = args.gamma
    tau = calibrate_threshold(scores, strategy)
    rejected = int(np.sum(scores < tau))
    out = _out_dir(args.out)
    payload = {
        "threshold": tau,
        "strategy": args.strategy,
        "value": value,
        "n_scores": int(scores.size),
        "n_rejected_on_input": rejected,
        "provenance": json.loads(_provenance(0, _hash_dict({"scores": str(args.scores), "strategy": args.strategy}))),
    }
    (out / "calibration.json").write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    print(f"tau = {tau!r} ({rejected}/{scores.size} rejected on the calibration scores)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uler", description=__doc__)
    parser.add_argument("--version", action="version", version=f"uler {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic benchmark dataset CSV")
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--d", type=int, required=True)
    synth.add_argument("--task", choices=[t.value for t in Task], default="classification")
    synth.add_argument("--mismatch-strength", type=float, default=1.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", default=None)
    synth.set_defaults(func=_cmd_synth)

    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=None)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--repeats", type=int, default=None, help="override config repeats")
    run.add_argument("--master-seed", type=int, default=None, help="override config master seed")
    run.set_defaults(func=_cmd_run)

    ingest = sub.add_parser("ingest-annotations", help="aggregate human annotations into judged explanations")
    ingest.add_argument("--annotations", required=True)
    ingest.add_argument("--explanations", required=True)
    ingest.add_argument("--sd-cutoff", type=float, default=1.25)
    ingest.add_argument("--rating-cutoff", type=float, default=3.0)
    ingest.add_argument("--max-attention-failures", type=int, default=1)
    ingest.add_argument("--seed", type=int, default=0)
    ingest.add_argument("--out", default=None)
    ingest.set_defaults(func=_cmd_ingest_annotations)

    explain = sub.add_parser("explain", help="batch explanations for a dataset and model")
    explain.add_argument("--data", required=True)
    explain.add_argument("--target-column", required=True)
    explain.add_argument("--task", choices=[t.value for t in Task], required=True)
    explain.add_argument("--model-json", default=None, help="reuse a serialized predictor")
    explain.add_argument("--l2", type=float, default=1e-2)
    explain.add_argument("--n-samples", type=int, default=100)
    explain.add_argument("--background-cap", type=int, default=100)
    explain.add_argument("--seed", type=int, default=0)
    explain.add_argument("--out", default=None)
    explain.set_defaults(func=_cmd_explain)

    calibrate = sub.add_parser("calibrate", help="pick a rejection threshold from validation scores")
    calibrate.add_argument("--scores", required=True, help="CSV with a 'score' column")
    calibrate.add_argument("--strategy", choices=["target-rate", "match-train-gamma"], required=True)
    calibrate.add_argument("--rate", type=float, default=None)
    calibrate.add_argument("--gamma", type=float, default=None)
    calibrate.add_argument("--out", default=None)
    calibrate.set_defaults(func=_cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
