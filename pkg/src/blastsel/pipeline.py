"""End-to-end orchestration: ingest, filter, subset search, final model, report.

A run is driven by a single JSON config and a master seed. Every stage seed is
derived from the master seed and recorded in the report, so a run is exactly
reproducible from its config. Deterministic outputs (report.json, roc.csv,
selected_features.json, model.json) are byte-stable across runs and thread
counts; wall-clock timings go to a separate timings.json.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import __version__
from .classifiers import (
    ForestParams,
    MlpParams,
    TreeParams,
    model_to_dict,
    predict,
    train_model,
)
from .core import Dataset, FeatureMask, SplitSpec, apply_mask, load_dataset, stratified_split
from .errors import PipelineStageError
from .filters import DEFAULT_MI_BINS, compute_scores, select_top_k
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
from .metrics import RocCurve, auc, classification_metrics, confusion_matrix, roc_curve
from .util import derive_seed

SEARCH_ALGOS = ("ga", "baco", "gabaco", "exhaustive")


def _from_dict(cls, data: dict):
    """Build a flat dataclass from a dict, rejecting unknown keys."""
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = dict(data)
    for f in fields(cls):
        if f.name in kwargs and isinstance(kwargs[f.name], list):
            kwargs[f.name] = tuple(kwargs[f.name])
    return cls(**kwargs)


@dataclass(frozen=True)
class FilterConfig:
    method: str = "rf_importance"
    k: int = 532
    mi_bins: int = DEFAULT_MI_BINS
    rf_trees: int = 100


@dataclass(frozen=True)
class SearchConfig:
    algo: str = "gabaco"
    aco: AcoParams = AcoParams()
    ga: GaParams = GaParams()
    surrogate: str = "gnb"
    val_fraction: float = 0.2
    size_penalty_lambda: float = 0.01

    def __post_init__(self):
        if self.algo not in SEARCH_ALGOS:
            raise ValueError(f"unknown search algo: {self.algo}")


@dataclass(frozen=True)
class FinalClassifierConfig:
    kind: str = "mlp"
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PipelineConfig:
    input_path: str
    output_dir: str
    master_seed: int = 0
    t_percent: float = 0.2
    filter: FilterConfig = FilterConfig()
    search: SearchConfig = SearchConfig()
    final: FinalClassifierConfig = FinalClassifierConfig()

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        data = dict(data)
        if "filter" in data:
            data["filter"] = _from_dict(FilterConfig, data["filter"])
        if "search" in data:
            sd = dict(data["search"])
            if "aco" in sd:
                sd["aco"] = _from_dict(AcoParams, sd["aco"])
            if "ga" in sd:
                sd["ga"] = _from_dict(GaParams, sd["ga"])
            data["search"] = _from_dict(SearchConfig, sd)
        if "final" in data:
            data["final"] = _from_dict(FinalClassifierConfig, data["final"])
        return _from_dict(cls, data)

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        aco = self.search.aco
        return {
            "input_path": self.input_path,
            "output_dir": self.output_dir,
            "master_seed": self.master_seed,
            "t_percent": self.t_percent,
            "filter": {
                "method": self.filter.method,
                "k": self.filter.k,
                "mi_bins": self.filter.mi_bins,
                "rf_trees": self.filter.rf_trees,
            },
            "search": {
                "algo": self.search.algo,
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
                    "n_generations": self.search.ga.n_generations,
                    "pop_size": self.search.ga.pop_size,
                    "crossover_rate": self.search.ga.crossover_rate,
                    "mutation_rate": self.search.ga.mutation_rate,
                    "tournament_size": self.search.ga.tournament_size,
                    "elitism": self.search.ga.elitism,
                },
                "surrogate": self.search.surrogate,
                "val_fraction": self.search.val_fraction,
                "size_penalty_lambda": self.search.size_penalty_lambda,
            },
            "final": {"kind": self.final.kind, "params": dict(self.final.params)},
        }


@dataclass
class EvaluationReport:
    version: str
    config: dict
    seeds: dict
    dataset: dict          # n_samples, n_features, train_size, test_size
    filter_method: str
    filter_selected: list[int]
    search_algo: str
    search_selected: list[int]  # original feature indices
    best_fitness: float
    fitness_history: list[float]
    fitness_evaluations: int
    confusion: dict        # tp, fp, fn, tn
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float
    roc_point_count: int
    roc: RocCurve | None = field(default=None, compare=False, repr=False)
    timings: dict = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "seeds": self.seeds,
            "dataset": self.dataset,
            "filter_method": self.filter_method,
            "filter_selected": self.filter_selected,
            "search_algo": self.search_algo,
            "search_selected": self.search_selected,
            "best_fitness": self.best_fitness,
            "fitness_history": self.fitness_history,
            "fitness_evaluations": self.fitness_evaluations,
            "confusion": self.confusion,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": self.auc,
            "roc_point_count": self.roc_point_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationReport":
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "EvaluationReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def generate_synthetic(
    n: int,
    d: int,
    n_informative: int,
    noise: float = 0.0,
    seed: int = 0,
    margin: float = 0.25,
) -> tuple[Dataset, list[int]]:
    """Gaussian features with labels from a noisy linear rule over a hidden subset.

    The threshold is the median score, so classes balance within one sample.
    After labeling, each sample's informative block is pushed `margin` away
    from the boundary along the rule direction; the push never changes a
    label's side, it only widens the class gap. Returns the dataset and the
    planted informative feature indices.
    """
    if n < 4:
        raise ValueError("need at least 4 samples")
    if not (0 < n_informative <= d):
        raise ValueError("n_informative must be in [1, d]")
    if noise < 0:
        raise ValueError("noise must be >= 0")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    informative = sorted(int(i) for i in rng.choice(d, size=n_informative, replace=False))
    weights = rng.uniform(0.5, 1.5, size=n_informative) * rng.choice([-1.0, 1.0], size=n_informative)
    score = X[:, informative] @ weights
    if noise > 0:
        score = score + noise * rng.standard_normal(n)
    threshold = np.median(score)
    labels = (score > threshold).astype(np.int64)
    if margin > 0:
        push = margin * np.sign(score - threshold)
        X[:, informative] += push[:, None] * (weights / np.linalg.norm(weights))
    ids = tuple(f"s{i:06d}" for i in range(n))
    return Dataset(X, labels, ids), informative


def _derive_seeds(master: int) -> dict:
    return {
        "split": derive_seed(master, "split"),
        "filter": derive_seed(master, "filter"),
        "fitness": derive_seed(master, "fitness"),
        "search": derive_seed(master, "search"),
        "final": derive_seed(master, "final"),
    }


def _final_params(cfg: FinalClassifierConfig, seed: int):
    params = dict(cfg.params)
    if cfg.kind == "mlp":
        params.setdefault("seed", seed)
        if "hidden_sizes" in params:
            params["hidden_sizes"] = tuple(params["hidden_sizes"])
        return MlpParams(**params)
    if cfg.kind == "tree":
        params.setdefault("seed", seed)
        return TreeParams(**params)
    if cfg.kind == "forest":
        params.setdefault("seed", seed)
        return ForestParams(**params)
    if cfg.kind == "gnb":
        if params:
            raise ValueError("gnb takes no parameters")
        return None
    raise ValueError(f"unknown classifier kind: {cfg.kind}")


def _stage(name: str, timings: dict, fn):
    t0 = time.perf_counter()
    try:
        out = fn()
    except PipelineStageError:
        raise
    except Exception as exc:
        raise PipelineStageError(name, exc) from exc
    timings[name] = timings.get(name, 0.0) + (time.perf_counter() - t0)
    return out


def select_and_train(train: Dataset, cfg: PipelineConfig, timings: dict | None = None):
    """Filter scoring, subset search and final training; a function of train only.

    Returns (filter_mask, search_result, combined_mask, model). combined_mask
    lives in the original feature space; the search result's mask indexes the
    filtered feature space.
    """
    seeds = _derive_seeds(cfg.master_seed)
    timings = timings if timings is not None else {}

    def run_filter():
        scores = compute_scores(
            cfg.filter.method,
            train,
            bins=cfg.filter.mi_bins,
            forest_params=ForestParams(n_trees=cfg.filter.rf_trees, seed=seeds["filter"]),
        )
        return scores, select_top_k(scores, cfg.filter.k)

    scores, filter_mask = _stage("filter", timings, run_filter)
    filtered_train = apply_mask(train, filter_mask)

    def run_search():
        spec = FitnessSpec(
            surrogate=cfg.search.surrogate,
            val_fraction=cfg.search.val_fraction,
            size_penalty_lambda=cfg.search.size_penalty_lambda,
            seed=seeds["fitness"],
        )
        aco = cfg.search.aco
        if aco.beta > 0 and aco.heuristic is None:
            aco = replace(aco, heuristic=_heuristic_from_scores(scores.scores[filter_mask.bits]))
        algo = cfg.search.algo
        if algo == "ga":
            return ga_select(filtered_train, cfg.search.ga, spec, seeds["search"])
        if algo == "baco":
            return baco_select(filtered_train, aco, spec, seeds["search"])
        if algo == "gabaco":
            return ga_baco_select(filtered_train, aco, cfg.search.ga, spec, seeds["search"])
        mask, fitness = exhaustive_select(filtered_train, spec)
        return SearchResult(mask, fitness, [fitness], 2**filtered_train.n_features - 1)

    result = _stage("search", timings, run_search)

    filter_indices = np.asarray(filter_mask.indices())
    combined = FeatureMask.from_indices(
        filter_indices[result.best_mask.bits].tolist(), train.n_features
    )

    model = _stage(
        "train",
        timings,
        lambda: train_model(
            cfg.final.kind, apply_mask(train, combined), _final_params(cfg.final, seeds["final"])
        ),
    )
    return filter_mask, result, combined, model


def _heuristic_from_scores(raw: np.ndarray) -> np.ndarray:
    """Nonnegative desirability from filter scores, scaled to max 1."""
    eta = np.where(np.isfinite(raw), raw, 0.0)
    eta = np.clip(eta, 0.0, None)
    finite_max = eta.max()
    if finite_max <= 0:
        return np.ones_like(eta)
    eta = eta / finite_max
    eta[~np.isfinite(raw)] = 1.0  # +inf scores rank at the top
    return eta


def run_pipeline(cfg: PipelineConfig) -> EvaluationReport:
    """Execute every stage and write the report files atomically.

    Test rows never reach filter scoring, the search, or final training.
    """
    timings: dict[str, float] = {}
    wall_start = time.perf_counter()
    seeds = _derive_seeds(cfg.master_seed)

    ds = _stage("load", timings, lambda: load_dataset(cfg.input_path))
    train, test = _stage(
        "split", timings, lambda: stratified_split(ds, SplitSpec(cfg.t_percent, seeds["split"]))
    )

    filter_mask, result, combined, model = select_and_train(train, cfg, timings)

    def evaluate():
        X_test = apply_mask(test, combined).features
        labels, scores = predict(model, X_test)
        cm = confusion_matrix(test.labels, labels)
        curve = roc_curve(test.labels, scores)
        area = auc(test.labels, scores)
        return cm, curve, area

    cm, curve, area = _stage("evaluate", timings, evaluate)
    accuracy, precision, recall, f1 = classification_metrics(cm)

    report = EvaluationReport(
        version=__version__,
        config=cfg.to_dict(),
        seeds={"master": cfg.master_seed, **seeds},
        dataset={
            "n_samples": ds.n_samples,
            "n_features": ds.n_features,
            "train_size": train.n_samples,
            "test_size": test.n_samples,
        },
        filter_method=cfg.filter.method,
        filter_selected=filter_mask.indices(),
        search_algo=cfg.search.algo,
        search_selected=combined.indices(),
        best_fitness=result.best_fitness,
        fitness_history=list(result.history),
        fitness_evaluations=result.evaluations,
        confusion={"tp": cm.tp, "fp": cm.fp, "fn": cm.fn, "tn": cm.tn},
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        auc=area,
        roc_point_count=len(curve.points),
        roc=curve,
        timings=timings,
    )

    def emit():
        os.makedirs(cfg.output_dir, exist_ok=True)
        written = emit_report(report, cfg.output_dir)
        try:
            _atomic_write(os.path.join(cfg.output_dir, "model.json"), _model_json(model))
        except Exception:
            for path in written:
                try:
                    os.remove(path)
                except OSError:
                    pass
            raise

    _stage("emit", timings, emit)
    report.timings["total"] = time.perf_counter() - wall_start
    # total was not known when timings.json was written; rewrite it
    _atomic_write(
        os.path.join(cfg.output_dir, "timings.json"),
        json.dumps(report.timings, sort_keys=True, indent=2) + "\n",
    )
    return report


def _model_json(model) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True) + "\n"


def _atomic_write(path: str, content: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(content)
    os.replace(tmp, path)


def roc_csv(curve: RocCurve) -> str:
    lines = ["threshold,fpr,tpr"]
    for (fpr, tpr), thr in zip(curve.points, curve.thresholds):
        lines.append(f"{thr!r},{fpr!r},{tpr!r}")
    return "\n".join(lines) + "\n"


def emit_report(report: EvaluationReport, out_dir) -> list[str]:
    """Write report.json, roc.csv, selected_features.json and timings.json.

    The first three are deterministic for a given config and master seed;
    timings.json carries the wall-clock measurements. Files appear atomically
    and any already-written files are removed if a later write fails.
    """
    os.makedirs(out_dir, exist_ok=True)
    docs = {
        "report.json": json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n",
        "roc.csv": roc_csv(report.roc) if report.roc is not None else "threshold,fpr,tpr\n",
        "selected_features.json": json.dumps(
            {
                "filter": {"method": report.filter_method, "indices": report.filter_selected},
                "search": {"algo": report.search_algo, "indices": report.search_selected},
            },
            sort_keys=True,
            indent=2,
        )
        + "\n",
        "timings.json": json.dumps(report.timings, sort_keys=True, indent=2) + "\n",
    }
    written = []
    try:
        for name, content in docs.items():
            path = os.path.join(out_dir, name)
            _atomic_write(path, content)
            written.append(path)
    except Exception:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                pass
        raise
    return written
