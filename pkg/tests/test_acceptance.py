"""Acceptance suite: one test per release criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines.
"""

import contextlib
import json
import time
from pathlib import Path

import numpy as np

REPO_ROOT = Path(__file__).resolve().parent.parent

from blastsel.classifiers import MlpParams, model_to_dict, predict, train_mlp
from blastsel.core import SplitSpec, apply_mask, load_dataset, save_dataset, stratified_split
from blastsel.filters import anova_f_scores, mutual_info_scores, variance_scores
from blastsel.imgprep import otsu_threshold
from blastsel.metaheuristics import (
    AcoParams,
    FitnessSpec,
    GaParams,
    baco_select,
    exhaustive_select,
    ga_baco_select,
    ga_select,
)
from blastsel.metrics import ConfusionMatrix, auc, auc_rank, classification_metrics
from blastsel.pipeline import PipelineConfig, generate_synthetic, run_pipeline, select_and_train

from conftest import finite_difference_max_rel_error, make_ds
from test_imgprep import brute_force_otsu


@contextlib.contextmanager
def criterion(label, budget_seconds=None):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        if budget_seconds is not None:
            assert elapsed < budget_seconds, f"took {elapsed:.1f}s, budget {budget_seconds}s"
    except BaseException:
        print(f"\n[FAIL] {label}")
        raise
    print(f"\n[PASS] {label} ({elapsed:.1f}s)")


def test_criterion_1_reference_confusion_matrix():
    with criterion("1. metrics on the reference confusion matrix hit the expected values"):
        cm = ConfusionMatrix(tp=2121, fp=180, fn=120, tn=778)
        accuracy, precision, recall, f1 = classification_metrics(cm)
        assert abs(100 * accuracy - 90.62) <= 0.01
        assert 92.16 <= 100 * precision <= 92.19
        assert 94.63 <= 100 * recall <= 94.66
        assert abs(100 * f1 - 93.39) <= 0.01


def test_criterion_2_otsu_matches_brute_force():
    with criterion("2. Otsu threshold equals the 256-way brute-force argmax on 100 images", budget_seconds=1.0):
        rng = np.random.default_rng(7301)
        for _ in range(100):
            img = rng.integers(0, 256, size=(32, 32)).astype(np.uint8)
            assert otsu_threshold(img) == brute_force_otsu(img)


def test_criterion_3_mlp_gradient_check():
    with criterion("3. MLP analytic gradients match finite differences on 20 instances", budget_seconds=5.0):
        rng = np.random.default_rng(99)
        worst = 0.0
        for seed in range(20):
            hidden = [int(rng.integers(3, 10))]
            if seed % 3 == 0:
                hidden.append(int(rng.integers(2, 6)))
            sizes = [int(rng.integers(2, 6)), *hidden, 1]
            err = finite_difference_max_rel_error(sizes, 5, seed)
            worst = max(worst, err)
        assert worst < 1e-4


def test_criterion_4_searchers_match_exhaustive_oracle():
    with criterion("4. searchers reach the exhaustive optimum on d=12 instances", budget_seconds=120.0):
        aco, ga = AcoParams(), GaParams()
        hits = {"ga": 0, "baco": 0, "gabaco": 0}
        for seed in range(10):
            ds, _ = generate_synthetic(250, 12, 4, noise=0.25, seed=1000 + seed)
            spec = FitnessSpec(seed=seed)
            _, optimum = exhaustive_select(ds, spec)
            if abs(ga_select(ds, ga, spec, seed).best_fitness - optimum) <= 1e-9:
                hits["ga"] += 1
            if abs(baco_select(ds, aco, spec, seed).best_fitness - optimum) <= 1e-9:
                hits["baco"] += 1
            if abs(ga_baco_select(ds, aco, ga, spec, seed).best_fitness - optimum) <= 1e-9:
                hits["gabaco"] += 1
        assert hits["gabaco"] >= 9, hits
        assert hits["ga"] >= 9, hits
        assert hits["baco"] >= 8, hits


def test_criterion_5_planted_feature_recovery():
    with criterion("5. hybrid search recovers planted features and keeps MLP accuracy", budget_seconds=300.0):
        aco, ga = AcoParams(), GaParams()
        recovered_ok = 0
        acc_selected, acc_baseline = [], []
        for seed in range(10):
            ds, informative = generate_synthetic(500, 50, 5, noise=0.2, seed=2000 + seed)
            train, test = stratified_split(ds, SplitSpec(0.2, seed))
            result = ga_baco_select(train, aco, ga, FitnessSpec(seed=seed), seed)
            if len(set(result.best_mask.indices()) & set(informative)) >= 4:
                recovered_ok += 1
            model = train_mlp(apply_mask(train, result.best_mask), MlpParams(seed=seed))
            labels, _ = predict(model, apply_mask(test, result.best_mask).features)
            acc_selected.append(float(np.mean(labels == test.labels)))
            baseline = train_mlp(train, MlpParams(seed=seed))
            labels, _ = predict(baseline, test.features)
            acc_baseline.append(float(np.mean(labels == test.labels)))
        assert recovered_ok >= 8, recovered_ok
        assert np.mean(acc_selected) >= np.mean(acc_baseline) - 0.01


def test_criterion_6_filter_oracles():
    with criterion("6. filter scores match hand-computed oracles"):
        anova_ds = make_ds([[1.0], [2.0], [3.0], [4.0]], [0, 0, 1, 1])
        assert anova_f_scores(anova_ds).scores[0] == 8.0
        mi_ds = make_ds([[0.0], [0.0], [1.0], [1.0]], [0, 0, 1, 1])
        assert abs(mutual_info_scores(mi_ds, bins=2).scores[0] - np.log(2.0)) <= 1e-12
        var_ds = make_ds([[0.0], [2.0]], [0, 1])
        assert variance_scores(var_ds).scores[0] == 1.0


def test_criterion_7_auc_equivalence():
    with criterion("7. trapezoidal AUC equals the pairwise rank statistic on 1000 instances", budget_seconds=5.0):
        rng = np.random.default_rng(555)
        for _ in range(1000):
            n = int(rng.integers(4, 80))
            y = rng.integers(0, 2, n)
            y[:2] = [0, 1]
            scores = rng.random(n)
            if rng.random() < 0.5:
                scores = scores.round(1)
            assert abs(auc(y, scores) - auc_rank(y, scores)) <= 1e-12


def _determinism_config(tmp_path, out_name):
    data = tmp_path / "data.csv"
    if not data.exists():
        ds, _ = generate_synthetic(300, 32, 5, noise=0.2, seed=808)
        save_dataset(ds, data)
    return PipelineConfig.from_dict(
        {
            "input_path": str(data),
            "output_dir": str(tmp_path / out_name),
            "master_seed": 17,
            "filter": {"method": "rf_importance", "k": 12, "rf_trees": 25},
            "search": {
                "algo": "gabaco",
                "aco": {"n_ants": 15, "n_iterations": 4},
                "ga": {"n_generations": 6},
            },
            "final": {"kind": "mlp", "params": {"max_epochs": 60}},
        }
    )


def test_criterion_8_determinism_and_leakage(tmp_path, monkeypatch):
    with criterion("8. byte-identical reports across thread counts; no test-row leakage"):
        deterministic = ("report.json", "roc.csv", "selected_features.json", "model.json")

        monkeypatch.setenv("BLASTSEL_THREADS", "1")
        cfg1 = _determinism_config(tmp_path, "out")
        report = run_pipeline(cfg1)
        first = {n: (tmp_path / "out" / n).read_bytes() for n in deterministic}

        monkeypatch.setenv("BLASTSEL_THREADS", "4")
        run_pipeline(_determinism_config(tmp_path, "out"))
        for name in deterministic:
            assert (tmp_path / "out" / name).read_bytes() == first[name], name

        # drop the test rows, rerun the train-side stages on the surviving file
        ds = load_dataset(cfg1.input_path)
        train, _ = stratified_split(ds, SplitSpec(cfg1.t_percent, report.seeds["split"]))
        train_only = tmp_path / "train_only.csv"
        save_dataset(train, train_only)
        filter_mask, result, combined, model = select_and_train(load_dataset(train_only), cfg1)
        assert filter_mask.indices() == report.filter_selected
        assert combined.indices() == report.search_selected
        model_doc = json.loads((tmp_path / "out" / "model.json").read_text())
        assert model_to_dict(model) == model_doc


def test_criterion_9_end_to_end_desk_run(tmp_path):
    with criterion("9. bundled synthetic pipeline finishes quickly with accuracy > 0.85"):
        start = time.perf_counter()
        ds, _ = generate_synthetic(2000, 256, 10, noise=0.1, seed=20240501, margin=0.0)
        data = tmp_path / "synthetic.csv"
        save_dataset(ds, data)
        cfg = PipelineConfig.from_json(REPO_ROOT / "configs" / "synthetic.json")
        cfg = PipelineConfig.from_dict(
            {**cfg.to_dict(), "input_path": str(data), "output_dir": str(tmp_path / "out")}
        )
        report = run_pipeline(cfg)
        elapsed = time.perf_counter() - start
        print(f"\n    desk run: accuracy={report.accuracy:.4f} in {elapsed:.1f}s")
        assert report.accuracy > 0.85
        assert elapsed < 300.0
        assert (tmp_path / "out" / "report.json").exists()
