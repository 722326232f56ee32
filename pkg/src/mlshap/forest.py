"""Entropy decision trees bagged into seed-deterministic random forests.

The trees are binary probabilistic classifiers: each leaf stores the positive
fraction of its training rows, and a forest's prediction is the arithmetic
mean of the leaf probabilities reached in every tree. Each tree derives an
independent rng stream from (forest seed, tree index), so refits are
bit-identical regardless of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _json

FOREST_FORMAT = "mlshap-forest"
FOREST_VERSION = 1


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int = 15
    min_samples_leaf: int = 1
    max_features: int | str = "sqrt"
    seed: int = 0
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be at least 1")
        if self.max_features != "sqrt" and (
            not isinstance(self.max_features, int) or self.max_features < 1
        ):
            raise ValueError('max_features must be "sqrt" or a positive count')
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def resolve_max_features(self, n_features: int) -> int:
        if self.max_features == "sqrt":
            return max(1, math.isqrt(n_features))
        return min(self.max_features, n_features)


@dataclass
class DecisionTree:
    """Flat node arena; ``feature[i] == -1`` marks a leaf.

    ``value[i]`` is the positive fraction of training rows reaching node i
    (the prediction at leaves).
    """

    feature: np.ndarray  # (n_nodes,) int64
    threshold: np.ndarray  # (n_nodes,) float64
    left: np.ndarray  # (n_nodes,) int64, -1 at leaves
    right: np.ndarray  # (n_nodes,) int64, -1 at leaves
    value: np.ndarray  # (n_nodes,) float64 in [0, 1]

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Leaf probability reached by each row of X."""
        node = np.zeros(X.shape[0], dtype=np.intp)
        while True:
            feat = self.feature[node]
            live = feat >= 0
            if not live.any():
                return self.value[node]
            rows = np.nonzero(live)[0]
            at = node[rows]
            go_left = X[rows, feat[rows]] <= self.threshold[at]
            node[rows] = np.where(go_left, self.left[at], self.right[at])

    def max_depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):  # parents precede children (preorder arena)
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[i] + 1
                depth[self.right[i]] = depth[i] + 1
        return int(depth.max()) if self.n_nodes else 0


@dataclass
class RandomForest:
    params: ForestParams
    trees: list[DecisionTree]
    n_features: int

    def __post_init__(self):
        if len(self.trees) != self.params.n_trees:
            raise ValueError("tree count does not match params.n_trees")

    def predict_proba(self, X):
        """Mean leaf probability over all trees; float for a single vector."""
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"input width {X.shape[1]} does not match training width {self.n_features}"
            )
        out = np.mean([tree.predict(X) for tree in self.trees], axis=0)
        return float(out[0]) if single else out


def entropy(class_counts) -> float:
    """Shannon entropy, in bits, of a two-class count pair."""
    neg, pos = class_counts
    if neg < 0 or pos < 0:
        raise ValueError("class counts must be non-negative")
    total = neg + pos
    if total == 0:
        raise ValueError("class counts must not both be zero")
    h = 0.0
    for count in (neg, pos):
        if 0 < count < total:
            p = count / total
            h -= p * math.log2(p)
    return h


def _entropy_from_positive(pos: np.ndarray, total: np.ndarray) -> np.ndarray:
    """Vectorized two-class entropy from positive counts; total > 0."""
    p = pos / total
    out = np.zeros_like(p)
    for q in (p, 1.0 - p):
        inner = (q > 0.0) & (q < 1.0)
        out[inner] -= q[inner] * np.log2(q[inner])
    return out


def _best_split(X, y, rows, feats, min_leaf):
    """Highest-entropy-gain (feature, threshold) over the candidate features.

    Ties resolve to the lowest feature index, then the lowest threshold.
    Returns None when no candidate split is valid or no split gains.
    """
    n = rows.size
    pos_total = int(y[rows].sum())
    parent = _entropy_from_positive(np.array([pos_total]), np.array([n]))[0]
    best_gain = 0.0
    best = None
    for f in feats:
        v = X[rows, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        ys = y[rows][order]
        boundary = np.nonzero(vs[1:] != vs[:-1])[0]  # split after sorted position i
        if boundary.size == 0:
            continue
        n_left = boundary + 1
        n_right = n - n_left
        valid = (n_left >= min_leaf) & (n_right >= min_leaf)
        if not valid.any():
            continue
        boundary = boundary[valid]
        n_left = n_left[valid]
        n_right = n_right[valid]
        pos_left = np.cumsum(ys)[boundary]
        pos_right = pos_total - pos_left
        child = (
            n_left * _entropy_from_positive(pos_left, n_left)
            + n_right * _entropy_from_positive(pos_right, n_right)
        ) / n
        gains = parent - child
        at = int(np.argmax(gains))  # first max -> lowest threshold on ties
        if gains[at] > best_gain:
            best_gain = float(gains[at])
            thr = (vs[boundary[at]] + vs[boundary[at] + 1]) / 2.0
            best = (int(f), float(thr))
    return best


def fit_tree(X, y, params: ForestParams, rng: np.random.Generator) -> DecisionTree:
    """Grow one greedy entropy tree over per-node random feature subsets."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training data must be a non-empty matrix")
    if X.shape[0] != y.shape[0]:
        raise ValueError("X rows must match y length")
    d = X.shape[1]
    m = params.resolve_max_features(d)

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node(rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[rows].mean()))
        return len(feature) - 1

    # Preorder construction keeps rng consumption order fixed.
    root_rows = np.arange(X.shape[0])
    stack = [(new_node(root_rows), root_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        pos = int(y[rows].sum())
        if (
            depth >= params.max_depth
            or pos == 0
            or pos == rows.size
            or rows.size < 2 * params.min_samples_leaf
        ):
            continue
        feats = np.sort(rng.choice(d, size=m, replace=False))
        found = _best_split(X, y, rows, feats, params.min_samples_leaf)
        if found is None:
            continue
        f, thr = found
        go_left = X[rows, f] <= thr
        feature[node] = f
        threshold[node] = thr
        left_node = new_node(rows[go_left])
        right_node = new_node(rows[~go_left])
        left[node] = left_node
        right[node] = right_node
        # Right pushed first so the left subtree is built (and draws rng) first.
        stack.append((right_node, rows[~go_left], depth + 1))
        stack.append((left_node, rows[go_left], depth + 1))
    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
    )


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """The rng stream tree ``tree_index`` of a forest seeded ``seed`` fits with."""
    return np.random.default_rng([seed, tree_index])


def fit_forest(X, y, params: ForestParams) -> RandomForest:
    """Bag ``n_trees`` entropy trees, one bootstrap resample (size n) per tree."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training data must be a non-empty matrix")
    n = X.shape[0]
    trees = []
    for t in range(params.n_trees):
        rng = tree_rng(params.seed, t)
        if params.bootstrap:
            rows = rng.integers(0, n, size=n)
            trees.append(fit_tree(X[rows], y[rows], params, rng))
        else:
            trees.append(fit_tree(X, y, params, rng))
    return RandomForest(params=params, trees=trees, n_features=X.shape[1])


def forest_to_doc(forest: RandomForest) -> dict:
    return {
        "format": FOREST_FORMAT,
        "version": FOREST_VERSION,
        "params": {
            "n_trees": forest.params.n_trees,
            "max_depth": forest.params.max_depth,
            "min_samples_leaf": forest.params.min_samples_leaf,
            "max_features": forest.params.max_features,
            "seed": forest.params.seed,
            "bootstrap": forest.params.bootstrap,
        },
        "n_features": forest.n_features,
        "trees": [
            {
                "feature": tree.feature.tolist(),
                "threshold": tree.threshold.tolist(),
                "left": tree.left.tolist(),
                "right": tree.right.tolist(),
                "value": tree.value.tolist(),
            }
            for tree in forest.trees
        ],
    }


def forest_from_doc(doc: dict) -> RandomForest:
    if doc.get("format") != FOREST_FORMAT:
        raise ValueError(f"not a forest document: {doc.get('format')!r}")
    if doc.get("version") != FOREST_VERSION:
        raise ValueError(f"unsupported forest version {doc.get('version')!r}")
    params = ForestParams(**doc["params"])
    trees = [
        DecisionTree(
            feature=np.array(t["feature"], dtype=np.int64),
            threshold=np.array(t["threshold"], dtype=np.float64),
            left=np.array(t["left"], dtype=np.int64),
            right=np.array(t["right"], dtype=np.int64),
            value=np.array(t["value"], dtype=np.float64),
        )
        for t in doc["trees"]
    ]
    return RandomForest(params=params, trees=trees, n_features=doc["n_features"])


def forest_to_json(forest: RandomForest) -> str:
    return _json.dumps(forest_to_doc(forest))


def forest_from_json(text: str) -> RandomForest:
    return forest_from_doc(_json.loads(text))
