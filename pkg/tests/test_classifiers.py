import numpy as np
import pytest

from blastsel.classifiers import (
    ForestParams,
    MlpParams,
    TreeParams,
    load_model,
    predict,
    save_model,
    train_decision_tree,
    train_gaussian_nb,
    train_mlp,
    train_random_forest,
)
from blastsel.classifiers.tree import _grow_tree, tree_p1
from blastsel.core import SplitSpec, stratified_split
from blastsel.errors import DivergenceError, SingleClassError
from blastsel.pipeline import generate_synthetic

from conftest import finite_difference_max_rel_error, make_ds


def two_cluster_dataset():
    X = np.array([[0.0]] * 4 + [[10.0]] * 4)
    y = np.array([0] * 4 + [1] * 4)
    return make_ds(X, y)


class TestGaussianNb:
    def test_near_cluster_prediction(self):
        model = train_gaussian_nb(two_cluster_dataset())
        labels, scores = predict(model, np.array([[1.0]]))
        assert labels[0] == 0
        assert scores[0] < 0.01

    def test_far_cluster_prediction(self):
        model = train_gaussian_nb(two_cluster_dataset())
        labels, scores = predict(model, np.array([[10.0]]))
        assert labels[0] == 1
        assert scores[0] > 0.99

    def test_equidistant_tie_goes_to_class_zero(self):
        ds = make_ds([[-1.0], [1.0], [9.0], [11.0]], [0, 0, 1, 1])
        model = train_gaussian_nb(ds)
        labels, scores = predict(model, np.array([[5.0]]))
        assert scores[0] == 0.5
        assert labels[0] == 0

    def test_duplicating_samples_keeps_statistics(self):
        ds = two_cluster_dataset()
        doubled = make_ds(
            np.vstack([ds.features, ds.features]),
            np.concatenate([ds.labels, ds.labels]),
        )
        a = train_gaussian_nb(ds).state
        b = train_gaussian_nb(doubled).state
        assert np.array_equal(a.priors, b.priors)
        assert np.array_equal(a.means, b.means)
        assert np.array_equal(a.variances, b.variances)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassError):
            train_gaussian_nb(make_ds([[1.0], [2.0]], [1, 1]))

    def test_affine_rescaling_keeps_decisions(self, rng):
        ds, _ = generate_synthetic(100, 4, 2, noise=0.3, seed=6)
        train, test = stratified_split(ds, SplitSpec(0.3, 1))
        base, _ = predict(train_gaussian_nb(train), test.features)
        scale = np.array([2.0, -0.5, 10.0, 0.2])
        shift = np.array([1.0, -4.0, 0.0, 100.0])
        train2 = make_ds(train.features * scale + shift, train.labels)
        rescaled, _ = predict(train_gaussian_nb(train2), test.features * scale + shift)
        assert np.array_equal(base, rescaled)


class TestDecisionTree:
    def test_single_threshold_rule(self, rng):
        X = rng.uniform(0, 1, size=(20, 3))
        y = (X[:, 0] > 0.5).astype(int)
        y[0] = 1 - y[0] if len(np.unique(y)) == 1 else y[0]
        ds = make_ds(X, y)
        model = train_decision_tree(ds, TreeParams(max_depth=5))
        labels, _ = predict(model, X)
        assert np.array_equal(labels, y)
        assert model.state.max_depth_reached() == 1

    def test_pure_labels_single_leaf(self):
        ds = make_ds([[1.0], [2.0], [3.0]], [1, 1, 1])
        model = train_decision_tree(ds, TreeParams())
        assert len(model.state.feature) == 1
        assert model.state.feature[0] == -1
        labels, scores = predict(model, np.array([[0.0], [9.0]]))
        assert labels.tolist() == [1, 1] and scores.tolist() == [1.0, 1.0]

    def test_depth_cap_respected(self, rng):
        X = rng.standard_normal((200, 6))
        y = rng.integers(0, 2, 200)
        y[:2] = [0, 1]
        model = train_decision_tree(make_ds(X, y), TreeParams(max_depth=3))
        assert model.state.max_depth_reached() <= 3

    def test_deterministic(self, rng):
        ds, _ = generate_synthetic(80, 5, 2, noise=0.3, seed=2)
        a = train_decision_tree(ds, TreeParams()).state
        b = train_decision_tree(ds, TreeParams()).state
        assert a.feature == b.feature
        assert a.threshold == b.threshold

    def test_monotone_transform_invariance(self, rng):
        ds, _ = generate_synthetic(60, 4, 2, noise=0.2, seed=7)
        train, test = stratified_split(ds, SplitSpec(0.25, 3))
        base, _ = predict(train_decision_tree(train, TreeParams()), test.features)

        def transform(X):
            out = X.copy()
            out[:, 0] = np.exp(out[:, 0])
            out[:, 1] = out[:, 1] ** 3
            out[:, 2] = 2.0 * out[:, 2] + 7.0
            out[:, 3] = np.arctan(out[:, 3])
            return out

        train2 = make_ds(transform(train.features), train.labels)
        moved, _ = predict(train_decision_tree(train2, TreeParams()), transform(test.features))
        assert np.array_equal(base, moved)


class TestRandomForest:
    def test_pure_labels_predict_that_label(self, rng):
        ds = make_ds(rng.standard_normal((15, 3)), np.zeros(15, dtype=int))
        model = train_random_forest(ds, ForestParams(n_trees=7, seed=1))
        labels, scores = predict(model, rng.standard_normal((5, 3)))
        assert np.all(labels == 0) and np.all(scores == 0.0)

    def test_informative_features_learnable(self):
        accs = []
        for seed in range(5):
            ds, _ = generate_synthetic(300, 50, 5, noise=0.0, seed=seed)
            train, test = stratified_split(ds, SplitSpec(0.25, seed))
            model = train_random_forest(train, ForestParams(n_trees=100, seed=seed))
            labels, _ = predict(model, test.features)
            accs.append(float(np.mean(labels == test.labels)))
        assert np.mean(accs) > 0.9

    def test_same_seed_same_votes(self):
        ds, _ = generate_synthetic(80, 6, 2, noise=0.4, seed=4)
        train, test = stratified_split(ds, SplitSpec(0.25, 2))
        a = predict(train_random_forest(train, ForestParams(n_trees=11, seed=5)), test.features)
        b = predict(train_random_forest(train, ForestParams(n_trees=11, seed=5)), test.features)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_single_tree_full_candidates_equals_cart(self):
        ds, _ = generate_synthetic(60, 4, 2, noise=0.3, seed=9)
        forest = train_random_forest(ds, ForestParams(n_trees=1, seed=13, max_features=4))
        # rebuild the bootstrap sample the forest used for its only tree
        rng = np.random.default_rng(np.random.SeedSequence(entropy=13, spawn_key=(0,)))
        boot = rng.integers(0, ds.n_samples, size=ds.n_samples)
        cart = _grow_tree(ds.features[boot], ds.labels[boot], None, None, None)
        grid = np.random.default_rng(0).standard_normal((50, 4))
        forest_labels, forest_scores = predict(forest, grid)
        cart_scores = tree_p1(cart, grid)
        assert np.array_equal(forest_scores, cart_scores)
        assert np.array_equal(forest_labels, (cart_scores >= 0.5).astype(int))

    def test_tie_votes_to_class_zero(self):
        # two trees, engineered disagreement: vote split 1-1 -> class 0
        ds = make_ds([[0.0], [1.0], [0.4], [0.6]], [0, 1, 1, 0])
        model = train_random_forest(ds, ForestParams(n_trees=2, seed=0))
        labels, scores = predict(model, np.array([[0.5]]))
        per_tree = [tree_p1(t, np.array([[0.5]]))[0] for t in model.state.trees]
        votes = sum(p >= 0.5 for p in per_tree)
        assert labels[0] == (1 if 2 * votes > 2 else 0)


class TestMlp:
    def test_gradient_check_small_instances(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            hidden = [int(rng.integers(3, 9))]
            if seed % 2:
                hidden.append(int(rng.integers(2, 6)))
            sizes = [4, *hidden, 1]
            err = finite_difference_max_rel_error(sizes, 5, seed)
            assert err < 1e-4

    def test_separable_points_learned(self):
        ds = make_ds([[0.0], [10.0]], [0, 1])
        model = train_mlp(ds, MlpParams(seed=0))
        labels, _ = predict(model, ds.features)
        assert np.array_equal(labels, ds.labels)
        history = model.state.loss_history
        assert all(np.isfinite(v) for v in history)
        assert history[-1] < history[0]

    def test_bit_identical_refit(self):
        ds, _ = generate_synthetic(50, 4, 2, noise=0.2, seed=3)
        a = train_mlp(ds, MlpParams(max_epochs=20, seed=11)).state
        b = train_mlp(ds, MlpParams(max_epochs=20, seed=11)).state
        assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))
        assert all(np.array_equal(x, y) for x, y in zip(a.biases, b.biases))

    def test_constant_feature_standardization(self):
        X = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0], [4.0, 5.0]])
        y = np.array([0, 0, 1, 1])
        model = train_mlp(make_ds(X, y), MlpParams(max_epochs=50, seed=1))
        assert model.state.std[1] == 1.0
        labels, _ = predict(model, X)
        assert np.array_equal(labels, y)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_raises(self):
        ds, _ = generate_synthetic(20, 3, 1, seed=5)
        with pytest.raises(DivergenceError):
            train_mlp(ds, MlpParams(learning_rate=1e280, max_epochs=5, seed=0))

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassError):
            train_mlp(make_ds([[0.0], [1.0]], [0, 0]), MlpParams(max_epochs=1))


class TestPredictContract:
    def test_scores_within_unit_interval_all_kinds(self):
        ds, _ = generate_synthetic(80, 5, 2, noise=0.4, seed=12)
        train, test = stratified_split(ds, SplitSpec(0.25, 4))
        models = [
            train_gaussian_nb(train),
            train_decision_tree(train, TreeParams()),
            train_random_forest(train, ForestParams(n_trees=9, seed=2)),
            train_mlp(train, MlpParams(max_epochs=30, seed=2)),
        ]
        for model in models:
            labels, scores = predict(model, test.features)
            assert np.all((scores >= 0.0) & (scores <= 1.0))
            assert np.all((labels == 0) | (labels == 1))
            if model.kind in ("mlp", "tree"):
                assert np.array_equal(labels, (scores >= 0.5).astype(int))

    def test_width_mismatch_rejected(self):
        ds, _ = generate_synthetic(30, 4, 2, seed=1)
        model = train_gaussian_nb(ds)
        with pytest.raises(ValueError):
            predict(model, np.zeros((3, 5)))

    def test_save_load_round_trip_all_kinds(self, tmp_path):
        ds, _ = generate_synthetic(60, 4, 2, noise=0.3, seed=14)
        train, test = stratified_split(ds, SplitSpec(0.25, 9))
        models = {
            "gnb": train_gaussian_nb(train),
            "tree": train_decision_tree(train, TreeParams()),
            "forest": train_random_forest(train, ForestParams(n_trees=6, seed=4)),
            "mlp": train_mlp(train, MlpParams(max_epochs=25, seed=4)),
        }
        for kind, model in models.items():
            path = tmp_path / f"{kind}.json"
            save_model(model, path)
            reloaded = load_model(path)
            a_labels, a_scores = predict(model, test.features)
            b_labels, b_scores = predict(reloaded, test.features)
            assert np.array_equal(a_labels, b_labels)
            assert np.array_equal(a_scores, b_scores)
