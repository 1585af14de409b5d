import json

import numpy as np
import pytest

from blastsel.cli import main
from blastsel.core import load_dataset
from blastsel.imgprep import save_image


def run(*argv) -> int:
    return main(list(argv))


@pytest.fixture
def data_csv(tmp_path):
    path = tmp_path / "data.csv"
    rc = run(
        "synth", "--n", "160", "--d", "12", "--informative", "3",
        "--seed", "5", "--out", str(path),
    )
    assert rc == 0
    return path


class TestSynth:
    def test_writes_loadable_csv(self, data_csv):
        ds = load_dataset(data_csv)
        assert ds.n_samples == 160 and ds.n_features == 12

    def test_truth_file(self, tmp_path):
        out = tmp_path / "d.csv"
        truth = tmp_path / "truth.json"
        run("synth", "--n", "40", "--d", "6", "--informative", "2",
            "--seed", "1", "--out", str(out), "--truth", str(truth))
        doc = json.loads(truth.read_text())
        assert len(doc["informative"]) == 2


class TestSelect:
    def test_writes_mask_json(self, tmp_path, data_csv):
        out = tmp_path / "mask.json"
        rc = run("select", "--method", "anova", "--k", "4",
                 "--in", str(data_csv), "--out", str(out))
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["method"] == "anova_f" and doc["k"] == 4
        assert doc["indices"] == sorted(doc["indices"])
        assert len(doc["indices"]) == 4

    def test_rf_method(self, tmp_path, data_csv):
        out = tmp_path / "mask.json"
        rc = run("select", "--method", "rf", "--k", "3", "--trees", "10",
                 "--in", str(data_csv), "--out", str(out))
        assert rc == 0
        assert len(json.loads(out.read_text())["indices"]) == 3


class TestMetasearch:
    def test_gabaco_result_file(self, tmp_path, data_csv):
        cfg = tmp_path / "search.json"
        cfg.write_text(json.dumps({
            "seed": 3,
            "aco": {"n_ants": 8, "n_iterations": 2},
            "ga": {"n_generations": 3},
        }))
        out = tmp_path / "result.json"
        rc = run("metasearch", "--algo", "gabaco", "--in", str(data_csv),
                 "--config", str(cfg), "--out", str(out))
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["algo"] == "gabaco" and doc["seed"] == 3
        assert len(doc["history"]) == 2
        assert doc["indices"]
        assert doc["params"]["aco"]["n_ants"] == 8

    def test_defaults_without_config(self, tmp_path):
        small = tmp_path / "small.csv"
        run("synth", "--n", "60", "--d", "5", "--informative", "2",
            "--seed", "2", "--out", str(small))
        out = tmp_path / "result.json"
        rc = run("metasearch", "--algo", "exhaustive", "--in", str(small), "--out", str(out))
        assert rc == 0
        assert json.loads(out.read_text())["fitness"] > 0.5


class TestTrainEvaluate:
    def test_train_then_evaluate(self, tmp_path, data_csv, capsys):
        model = tmp_path / "model.json"
        rc = run("train", "--model", "gnb", "--in", str(data_csv), "--out", str(model))
        assert rc == 0
        roc = tmp_path / "roc.csv"
        rc = run("evaluate", "--model", str(model), "--in", str(data_csv), "--roc", str(roc))
        assert rc == 0
        captured = capsys.readouterr().out
        doc = json.loads(captured[captured.index("{"):])
        assert 0.5 <= doc["accuracy"] <= 1.0
        assert roc.read_text().startswith("threshold,fpr,tpr")

    def test_all_model_kinds(self, tmp_path, data_csv):
        for name in ("dt", "rf", "mlp"):
            model = tmp_path / f"{name}.json"
            assert run("train", "--model", name, "--in", str(data_csv),
                       "--out", str(model), "--seed", "1") == 0
            assert model.exists()


class TestRun:
    def test_full_pipeline_command(self, tmp_path, data_csv):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "input_path": str(data_csv),
            "output_dir": str(tmp_path / "out"),
            "master_seed": 3,
            "filter": {"method": "mutual_info", "k": 6},
            "search": {"algo": "ga", "ga": {"n_generations": 3, "pop_size": 8}},
            "final": {"kind": "tree", "params": {"max_depth": 4}},
        }))
        rc = run("run", "--config", str(cfg))
        assert rc == 0
        assert (tmp_path / "out" / "report.json").exists()


class TestPreprocess:
    def test_directory_flow(self, tmp_path):
        in_dir = tmp_path / "in"
        in_dir.mkdir()
        img = np.full((40, 40, 3), 230, dtype=np.uint8)
        img[12:28, 10:30] = (25, 25, 25)
        save_image(img, in_dir / "a.png")
        blank = np.full((40, 40, 3), 230, dtype=np.uint8)
        save_image(blank, in_dir / "b.png")

        out_dir = tmp_path / "out"
        rc = run("preprocess", "--in", str(in_dir), "--out", str(out_dir))
        assert rc == 1  # blank image has no foreground

        rc = run("preprocess", "--in", str(in_dir), "--out", str(out_dir), "--skip-empty")
        assert rc == 0
        assert sorted(p.name for p in out_dir.iterdir()) == ["a.png"]
