import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from mlshap import (
    ParamGrid,
    grid_search,
    hamming_loss,
    make_folds,
    micro_f1,
    subset_accuracy,
)

from _synth import planted_dataset

label_matrices = hnp.arrays(np.int64, st.tuples(st.integers(1, 8), st.integers(1, 6)),
                            elements=st.integers(0, 1))


class TestHammingLoss:
    def test_identical(self):
        Y = np.array([[1, 0], [0, 1]])
        assert hamming_loss(Y, Y) == 0.0

    def test_complement(self):
        Y = np.array([[1, 0], [0, 1]])
        assert hamming_loss(Y, 1 - Y) == 1.0

    def test_one_wrong_bit_of_three(self):
        assert hamming_loss(np.array([[1, 0, 1]]), np.array([[1, 0, 0]])) == pytest.approx(1 / 3)

    @settings(max_examples=40, derandomize=True)
    @given(label_matrices)
    def test_self_is_zero(self, Y):
        assert hamming_loss(Y, Y) == 0.0


class TestSubsetAccuracy:
    def test_identical(self):
        Y = np.array([[1, 0], [0, 1]])
        assert subset_accuracy(Y, Y) == 1.0

    def test_every_row_differs(self):
        Y = np.array([[1, 0], [0, 1]])
        P = np.array([[1, 1], [1, 1]])
        assert subset_accuracy(Y, P) == 0.0

    def test_half(self):
        Y = np.array([[1, 0], [0, 1]])
        P = np.array([[1, 0], [1, 1]])
        assert subset_accuracy(Y, P) == 0.5

    @settings(max_examples=40, derandomize=True)
    @given(label_matrices)
    def test_self_is_one(self, Y):
        assert subset_accuracy(Y, Y) == 1.0


class TestMicroF1:
    def test_identical_nonzero(self):
        Y = np.array([[1, 0], [1, 1]])
        assert micro_f1(Y, Y) == 1.0

    def test_no_predicted_positives(self):
        Y = np.array([[1, 0], [1, 1]])
        assert micro_f1(Y, np.zeros_like(Y)) == 0.0

    def test_confusion_count_arithmetic(self):
        # TP=2, FP=1, FN=1 -> 2*TP / (2*TP + FP + FN) = 4/6
        Y_true = np.array([[1, 1, 0], [1, 0, 0]])
        Y_pred = np.array([[1, 1, 1], [0, 0, 0]])
        assert micro_f1(Y_true, Y_pred) == pytest.approx(2 / 3)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            micro_f1(np.zeros((2, 2)), np.zeros((2, 3)))


class TestParamGrid:
    def test_cross_product_order(self):
        grid = ParamGrid("mlknn", {"k": [1, 2], "s": [0.5, 1.0]})
        assert grid.points == [
            {"k": 1, "s": 0.5}, {"k": 1, "s": 1.0},
            {"k": 2, "s": 0.5}, {"k": 2, "s": 1.0},
        ]

    def test_empty_axis_rejected(self):
        with pytest.raises(ValueError):
            ParamGrid("mlknn", {"k": []})

    def test_no_axes_rejected(self):
        with pytest.raises(ValueError):
            ParamGrid("mlknn", {})


class TestGridSearch:
    def test_single_point_is_best(self, small_dataset):
        plan = make_folds(small_dataset.n_instances, 1, 3, seed=0)
        grid = ParamGrid("mlknn", {"k": [3]})
        report = grid_search(small_dataset, grid, plan)
        assert report.best_index == 0
        assert report.best_params == {"k": 3}

    def test_mlknn_grid_evaluation_counts(self):
        ds = planted_dataset("tune", 60, 4, 2, seed=5)
        plan = make_folds(60, 2, 5, seed=3)
        grid = ParamGrid("mlknn", {"k": list(range(1, 21))})
        report = grid_search(ds, grid, plan)
        assert len(report.points) == 20
        assert all(len(s) == 10 for s in report.scores)
        assert report.total_evaluations == 200

    def test_dominant_point_wins(self):
        # Labels need feature interactions; a depth-1 stump cannot separate
        # them while depth 15 can, so the deep point must win.
        rng = np.random.default_rng(9)
        X = rng.normal(size=(120, 4))
        y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(int)
        ds = planted_dataset("dom", 120, 4, 1, seed=0)
        ds = type(ds)("dom", X, ds.feature_names, y[:, None], ds.label_names[:1])
        plan = make_folds(120, 1, 3, seed=1)
        grid = ParamGrid("br", {"max_depth": [1, 15], "n_trees": [10], "seed": [3]})
        report = grid_search(ds, grid, plan)
        assert report.best_params["max_depth"] == 15

    def test_deterministic(self, small_dataset):
        plan = make_folds(small_dataset.n_instances, 1, 4, seed=2)
        grid = ParamGrid("mlknn", {"k": [2, 4]})
        a = grid_search(small_dataset, grid, plan)
        b = grid_search(small_dataset, grid, plan)
        assert a.to_json() == b.to_json()

    def test_unknown_metric(self, small_dataset):
        plan = make_folds(small_dataset.n_instances, 1, 3, seed=0)
        with pytest.raises(ValueError, match="unknown metric"):
            grid_search(small_dataset, ParamGrid("mlknn", {"k": [3]}), plan,
                        scoring="accuracy")

    def test_foldplan_size_mismatch(self, small_dataset):
        plan = make_folds(small_dataset.n_instances - 1, 1, 3, seed=0)
        with pytest.raises(ValueError, match="fold plan"):
            grid_search(small_dataset, ParamGrid("mlknn", {"k": [3]}), plan)

    def test_loss_metric_minimized_ties_first(self):
        ds = planted_dataset("tie", 40, 3, 2, seed=8)
        plan = make_folds(40, 1, 4, seed=0)
        # identical points -> identical scores -> first wins
        grid = ParamGrid("mlknn", {"k": [5, 5]})
        report = grid_search(ds, grid, plan)
        assert report.best_index == 0
