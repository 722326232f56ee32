import numpy as np
import pytest

from mlshap import (
    DecisionTree,
    ForestParams,
    RandomForest,
    entropy,
    fit_forest,
    fit_tree,
    forest_from_json,
    forest_to_json,
    tree_rng,
)


def leaf_tree(p):
    return DecisionTree(
        feature=np.array([-1]), threshold=np.array([0.0]),
        left=np.array([-1]), right=np.array([-1]), value=np.array([p]),
    )


class TestEntropy:
    def test_uniform(self):
        assert entropy((1, 1)) == 1.0

    def test_pure(self):
        assert entropy((5, 0)) == 0.0
        assert entropy((0, 5)) == 0.0

    def test_three_one(self):
        # -0.75*log2(0.75) - 0.25*log2(0.25)
        assert entropy((3, 1)) == pytest.approx(0.811278, abs=1e-6)

    def test_both_zero_rejected(self):
        with pytest.raises(ValueError):
            entropy((0, 0))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            entropy((-1, 2))


class TestForestParams:
    @pytest.mark.parametrize("kwargs", [
        {"n_trees": 0}, {"max_depth": 0}, {"min_samples_leaf": 0},
        {"max_features": 0}, {"max_features": "log2"}, {"seed": -1},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ForestParams(**kwargs)

    def test_sqrt_resolution(self):
        assert ForestParams().resolve_max_features(103) == 10
        assert ForestParams(max_features=5).resolve_max_features(3) == 3


class TestFitTree:
    def test_pure_labels_single_leaf(self):
        X = np.array([[0.0], [1.0], [2.0]])
        y = np.array([1, 1, 1])
        tree = fit_tree(X, y, ForestParams(n_trees=1), tree_rng(0, 0))
        assert tree.n_nodes == 1
        assert tree.value[0] == 1.0

    def test_separable_stump(self):
        # 4 points split cleanly by one threshold; depth budget 1.
        X = np.array([[0.0], [1.0], [5.0], [6.0]])
        y = np.array([0, 0, 1, 1])
        params = ForestParams(n_trees=1, max_depth=1, max_features=1)
        tree = fit_tree(X, y, params, tree_rng(0, 0))
        assert tree.n_nodes == 3
        assert 1.0 < tree.threshold[0] < 5.0
        preds = tree.predict(X)
        np.testing.assert_array_equal((preds >= 0.5).astype(int), y)
        # chosen gain is the maximum over every candidate threshold
        chosen_gain = _gain(X, y, 0, tree.threshold[0])
        for thr in (0.5, 3.0, 5.5):
            assert chosen_gain >= _gain(X, y, 0, thr) - 1e-12

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(50, 4))
        y = (X[:, 0] + X[:, 2] > 0).astype(int)
        params = ForestParams(n_trees=1, max_depth=5, max_features=2)
        a = fit_tree(X, y, params, tree_rng(9, 0))
        b = fit_tree(X, y, params, tree_rng(9, 0))
        np.testing.assert_array_equal(a.feature, b.feature)
        np.testing.assert_array_equal(a.threshold, b.threshold)
        np.testing.assert_array_equal(a.value, b.value)

    def test_depth_budget_respected(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(200, 3))
        y = rng.integers(0, 2, size=200)
        params = ForestParams(n_trees=1, max_depth=3, max_features=3)
        tree = fit_tree(X, y, params, tree_rng(0, 0))
        assert tree.max_depth() <= 3

    def test_min_samples_leaf_respected(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 2))
        y = rng.integers(0, 2, size=40)
        params = ForestParams(n_trees=1, max_depth=10, min_samples_leaf=5,
                              max_features=2)
        tree = fit_tree(X, y, params, tree_rng(0, 0))
        counts = _leaf_counts(tree, X)
        assert min(counts) >= 5

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            fit_tree(np.zeros((0, 2)), np.zeros(0), ForestParams(), tree_rng(0, 0))


def _gain(X, y, feature, threshold):
    left = y[X[:, feature] <= threshold]
    right = y[X[:, feature] > threshold]
    if left.size == 0 or right.size == 0:
        return 0.0
    def h(v):
        return entropy((int(np.sum(v == 0)), int(np.sum(v == 1))))
    return h(y) - (left.size * h(left) + right.size * h(right)) / y.size


def _leaf_counts(tree, X):
    node = np.zeros(X.shape[0], dtype=int)
    while True:
        feat = tree.feature[node]
        live = feat >= 0
        if not live.any():
            break
        rows = np.nonzero(live)[0]
        at = node[rows]
        go_left = X[rows, feat[rows]] <= tree.threshold[at]
        node[rows] = np.where(go_left, tree.left[at], tree.right[at])
    return np.bincount(node)[np.bincount(node) > 0]


class TestMonotonePurity:
    def test_chosen_split_beats_every_candidate(self):
        rng = np.random.default_rng(12)
        for trial in range(10):
            X = rng.normal(size=(16, 3))
            y = rng.integers(0, 2, size=16)
            if len(np.unique(y)) < 2:
                continue
            params = ForestParams(n_trees=1, max_depth=1, max_features=3)
            tree = fit_tree(X, y, params, tree_rng(trial, 0))
            if tree.n_nodes == 1:
                continue
            chosen = _gain(X, y, tree.feature[0], tree.threshold[0])
            for f in range(3):
                vs = np.unique(X[:, f])
                for thr in (vs[:-1] + vs[1:]) / 2:
                    assert chosen >= _gain(X, y, f, thr) - 1e-12


class TestFitForest:
    def test_single_tree_no_bootstrap_equals_fit_tree(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(60, 4))
        y = (X[:, 1] > 0).astype(int)
        params = ForestParams(n_trees=1, max_depth=4, bootstrap=False, seed=21)
        forest = fit_forest(X, y, params)
        tree = fit_tree(X, y, params, tree_rng(21, 0))
        np.testing.assert_array_equal(forest.trees[0].feature, tree.feature)
        np.testing.assert_array_equal(forest.trees[0].threshold, tree.threshold)

    def test_all_negative_labels(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(30, 3))
        y = np.zeros(30, dtype=int)
        forest = fit_forest(X, y, ForestParams(n_trees=4, seed=0))
        assert np.all(forest.predict_proba(X) == 0.0)

    def test_seed_determinism_bit_identical(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(80, 5))
        y = (X[:, 0] - X[:, 3] > 0).astype(int)
        params = ForestParams(n_trees=6, max_depth=6, seed=99)
        a = forest_to_json(fit_forest(X, y, params))
        b = forest_to_json(fit_forest(X, y, params))
        assert a == b

    def test_mean_contract(self):
        forest = RandomForest(
            params=ForestParams(n_trees=2), trees=[leaf_tree(0.2), leaf_tree(0.6)],
            n_features=3,
        )
        assert forest.predict_proba(np.zeros(3)) == 0.4

    def test_mean_is_exact_tree_average(self):
        rng = np.random.default_rng(14)
        X = rng.normal(size=(50, 4))
        y = rng.integers(0, 2, size=50)
        forest = fit_forest(X, y, ForestParams(n_trees=7, seed=3))
        Q = rng.normal(size=(20, 4))
        expected = np.mean([t.predict(Q) for t in forest.trees], axis=0)
        np.testing.assert_array_equal(forest.predict_proba(Q), expected)

    def test_probability_range(self):
        rng = np.random.default_rng(7)
        for trial in range(5):
            X = rng.normal(size=(40, 3))
            y = rng.integers(0, 2, size=40)
            forest = fit_forest(X, y, ForestParams(n_trees=3, seed=trial))
            p = forest.predict_proba(rng.normal(size=(25, 3)))
            assert np.all(p >= 0.0) and np.all(p <= 1.0)

    def test_width_mismatch(self):
        forest = RandomForest(ForestParams(n_trees=1), [leaf_tree(0.5)], n_features=4)
        with pytest.raises(ValueError, match="width"):
            forest.predict_proba(np.zeros(3))


class TestForestJson:
    def test_roundtrip_identical(self):
        rng = np.random.default_rng(10)
        X = rng.normal(size=(60, 4))
        y = (X[:, 2] > 0.3).astype(int)
        forest = fit_forest(X, y, ForestParams(n_trees=3, seed=5))
        text = forest_to_json(forest)
        restored = forest_from_json(text)
        assert forest_to_json(restored) == text
        Q = rng.normal(size=(15, 4))
        np.testing.assert_array_equal(restored.predict_proba(Q),
                                      forest.predict_proba(Q))

    def test_rejects_wrong_format(self):
        with pytest.raises(ValueError, match="not a forest"):
            forest_from_json('{"format": "other"}\n')
