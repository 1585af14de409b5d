"""Command-line interface: blastsel <subcommand>."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .classifiers import (
    ForestParams,
    MlpParams,
    TreeParams,
    load_model,
    predict,
    save_model,
    train_model,
)
from .core import load_dataset, save_dataset
from .errors import BlastselError
from .filters import DEFAULT_MI_BINS, compute_scores, select_top_k
from .imgprep import preprocess_dir
from .metaheuristics import (
    AcoParams,
    FitnessSpec,
    GaParams,
    SearchResult,
    baco_select,
    exhaustive_select,
    ga_baco_select,
    ga_select,
)
from .metrics import auc, classification_metrics, confusion_matrix, roc_curve
from .pipeline import PipelineConfig, generate_synthetic, roc_csv, run_pipeline

_FILTER_NAMES = {
    "variance": "variance",
    "anova": "anova_f",
    "mi": "mutual_info",
    "rf": "rf_importance",
}

_MODEL_NAMES = {"mlp": "mlp", "dt": "tree", "rf": "forest", "gnb": "gnb"}


def _cmd_run(args) -> int:
    cfg = PipelineConfig.from_json(args.config)
    report = run_pipeline(cfg)
    print(
        f"accuracy={report.accuracy:.4f} precision={report.precision:.4f} "
        f"recall={report.recall:.4f} f1={report.f1:.4f} auc={report.auc:.4f}"
    )
    print(f"report written to {cfg.output_dir}")
    return 0


def _cmd_preprocess(args) -> int:
    written, skipped = preprocess_dir(args.input, args.output, skip_empty=args.skip_empty)
    print(f"wrote {written} images to {args.output}")
    if skipped:
        print(f"skipped {len(skipped)} empty-foreground images: {', '.join(skipped)}")
    return 0


def _cmd_select(args) -> int:
    ds = load_dataset(args.input)
    method = _FILTER_NAMES[args.method]
    scores = compute_scores(
        method,
        ds,
        bins=args.bins,
        forest_params=ForestParams(n_trees=args.trees, seed=args.seed),
    )
    mask = select_top_k(scores, args.k)
    doc = {"method": method, "k": args.k, "seed": args.seed, "indices": mask.indices()}
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"selected {args.k} of {ds.n_features} features -> {args.output}")
    return 0


def _parse_search_config(path) -> tuple[AcoParams, GaParams, FitnessSpec, int]:
    raw = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    seed = int(raw.get("seed", 0))
    aco_kwargs = dict(raw.get("aco", {}))
    if "tau_bounds" in aco_kwargs:
        aco_kwargs["tau_bounds"] = tuple(aco_kwargs["tau_bounds"])
    aco = AcoParams(**aco_kwargs)
    ga = GaParams(**raw.get("ga", {}))
    spec = FitnessSpec(
        surrogate=raw.get("surrogate", "gnb"),
        val_fraction=raw.get("val_fraction", 0.2),
        size_penalty_lambda=raw.get("size_penalty_lambda", 0.01),
        seed=seed,
    )
    return aco, ga, spec, seed


def _cmd_metasearch(args) -> int:
    ds = load_dataset(args.input)
    aco, ga, spec, seed = _parse_search_config(args.config)
    if args.algo == "ga":
        result = ga_select(ds, ga, spec, seed)
    elif args.algo == "baco":
        result = baco_select(ds, aco, spec, seed)
    elif args.algo == "gabaco":
        result = ga_baco_select(ds, aco, ga, spec, seed)
    else:
        mask, fitness = exhaustive_select(ds, spec)
        result = SearchResult(mask, fitness, [fitness], 2**ds.n_features - 1)
    doc = {
        "algo": args.algo,
        "indices": result.best_mask.indices(),
        "fitness": result.best_fitness,
        "history": list(result.history),
        "evaluations": result.evaluations,
        "seed": seed,
        "params": {
            "aco": {
                "n_ants": aco.n_ants,
                "alpha": aco.alpha,
                "beta": aco.beta,
                "n_iterations": aco.n_iterations,
                "rho": aco.rho,
                "tau0": aco.tau0,
                "deposit_scale": aco.deposit_scale,
                "q_elites": aco.q_elites,
                "tau_bounds": list(aco.tau_bounds),
            },
            "ga": {
                "n_generations": ga.n_generations,
                "pop_size": ga.pop_size,
                "crossover_rate": ga.crossover_rate,
                "mutation_rate": ga.mutation_rate,
                "tournament_size": ga.tournament_size,
                "elitism": ga.elitism,
            },
            "fitness": {
                "surrogate": spec.surrogate,
                "val_fraction": spec.val_fraction,
                "size_penalty_lambda": spec.size_penalty_lambda,
            },
        },
    }
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(
        f"{args.algo}: fitness {result.best_fitness:.6f} with "
        f"{result.best_mask.n_selected} features -> {args.output}"
    )
    return 0


def _cmd_train(args) -> int:
    ds = load_dataset(args.input)
    kind = _MODEL_NAMES[args.model]
    params = None
    if kind == "mlp":
        params = MlpParams(seed=args.seed)
    elif kind == "tree":
        params = TreeParams(seed=args.seed)
    elif kind == "forest":
        params = ForestParams(seed=args.seed)
    model = train_model(kind, ds, params)
    save_model(model, args.output)
    print(f"trained {kind} on {ds.n_samples} samples -> {args.output}")
    return 0


def _cmd_evaluate(args) -> int:
    model = load_model(args.model)
    ds = load_dataset(args.input)
    labels, scores = predict(model, ds.features)
    cm = confusion_matrix(ds.labels, labels)
    accuracy, precision, recall, f1 = classification_metrics(cm)
    doc = {
        "confusion": {"tp": cm.tp, "fp": cm.fp, "fn": cm.fn, "tn": cm.tn},
        "accuracy": accuracy,
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }
    if len(np.unique(ds.labels)) == 2:
        doc["auc"] = auc(ds.labels, scores)
        if args.roc:
            with open(args.roc, "w", encoding="utf-8") as fh:
                fh.write(roc_csv(roc_curve(ds.labels, scores)))
    print(json.dumps(doc, sort_keys=True, indent=2))
    return 0


def _cmd_synth(args) -> int:
    ds, informative = generate_synthetic(args.n, args.d, args.informative, args.noise, args.seed)
    save_dataset(ds, args.output)
    if args.truth:
        with open(args.truth, "w", encoding="utf-8") as fh:
            json.dump({"informative": informative}, fh)
            fh.write("\n")
    print(f"wrote {args.n}x{args.d} dataset ({args.informative} informative) -> {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blastsel", description=__doc__)
    parser.add_argument("--version", action="version", version=f"blastsel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the full pipeline from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("preprocess", help="preprocess a directory of cell images")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--skip-empty", action="store_true",
                   help="skip images with no foreground instead of failing")
    p.set_defaults(fn=_cmd_preprocess)

    p = sub.add_parser("select", help="filter-score features and keep the top k")
    p.add_argument("--method", choices=sorted(_FILTER_NAMES), required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--bins", type=int, default=DEFAULT_MI_BINS)
    p.add_argument("--trees", type=int, default=100)
    p.set_defaults(fn=_cmd_select)

    p = sub.add_parser("metasearch", help="wrapper subset search over a training set")
    p.add_argument("--algo", choices=["ga", "baco", "gabaco", "exhaustive"], required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--config", default=None, help="JSON with aco/ga/fitness parameters")
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(fn=_cmd_metasearch)

    p = sub.add_parser("train", help="train a classifier on a feature CSV")
    p.add_argument("--model", choices=sorted(_MODEL_NAMES), required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a saved model on a feature CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--roc", default=None, help="optionally write the ROC curve CSV here")
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic benchmark dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--informative", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--truth", default=None, help="optionally write informative indices here")
    p.set_defaults(fn=_cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (BlastselError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
