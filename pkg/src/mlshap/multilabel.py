"""Binary relevance, classifier chains, and ML-kNN behind one probability contract.

Every model maps a feature vector to one probability per label. Binary
relevance fits an independent forest per label; a classifier chain feeds the
hard 0/1 decisions of earlier links to later ones; ML-kNN scores each label by
maximum-a-posteriori reasoning over the label counts of the k nearest training
neighbors.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
from scipy.spatial.distance import cdist

from . import _json
from .data import Dataset
from .forest import ForestParams, fit_forest, forest_from_doc, forest_to_doc

MODEL_FORMAT = "mlshap-model"
MODEL_VERSION = 1


def derive_seed(seed: int, index: int) -> int:
    """Stable per-label seed derived from a global seed and a label index."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


class MultiLabelModel:
    """Base contract: per-label probabilities in [0, 1], one per label."""

    algorithm = "base"

    def __init__(self, n_features, n_labels, label_names=None, feature_names=None):
        self.n_features = n_features
        self.n_labels = n_labels
        self.label_names = list(label_names) if label_names else [
            f"label_{i}" for i in range(n_labels)
        ]
        self.feature_names = list(feature_names) if feature_names else None

    def _proba_matrix(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_proba(self, X):
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"input width {X.shape[1]} does not match training width {self.n_features}"
            )
        out = self._proba_matrix(X)
        return out[0] if single else out

    def predict(self, X, threshold: float = 0.5):
        return predict_labels(self.predict_proba(X), threshold)

    def label_proba_fn(self, label: int):
        """Batched scalar target for one label, used by the explainers."""
        if not 0 <= label < self.n_labels:
            raise ValueError(f"label index {label} out of range")

        def f(X):
            return self.predict_proba(np.asarray(X, dtype=np.float64))[..., label]

        return f

    def _payload(self) -> dict:
        raise NotImplementedError

    def to_doc(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "algorithm": self.algorithm,
            "n_features": self.n_features,
            "n_labels": self.n_labels,
            "label_names": self.label_names,
            "feature_names": self.feature_names,
            "payload": self._payload(),
        }


class BRModel(MultiLabelModel):
    """One independent forest per label."""

    algorithm = "br"

    def __init__(self, forests, label_names=None, feature_names=None):
        super().__init__(forests[0].n_features, len(forests), label_names, feature_names)
        self.per_label_models = list(forests)

    def _proba_matrix(self, X):
        return np.column_stack([f.predict_proba(X) for f in self.per_label_models])

    def label_proba_fn(self, label):
        if not 0 <= label < self.n_labels:
            raise ValueError(f"label index {label} out of range")
        forest = self.per_label_models[label]

        def f(X):
            return forest.predict_proba(np.asarray(X, dtype=np.float64))

        return f

    def _payload(self):
        return {"forests": [forest_to_doc(f) for f in self.per_label_models]}


class CCModel(MultiLabelModel):
    """Chained forests: link j consumes the features plus the j earlier labels."""

    algorithm = "cc"

    def __init__(self, chain_order, chained_models, n_features, label_names=None,
                 feature_names=None):
        super().__init__(n_features, len(chain_order), label_names, feature_names)
        self.chain_order = [int(i) for i in chain_order]
        self.chained_models = list(chained_models)
        if sorted(self.chain_order) != list(range(self.n_labels)):
            raise ValueError("chain_order is not a permutation of the label indices")
        for j, forest in enumerate(self.chained_models):
            if forest.n_features != n_features + j:
                raise ValueError(f"chain link {j} has width {forest.n_features}, "
                                 f"expected {n_features + j}")

    def _chain_through(self, X, last_position):
        """Probabilities of chain links 0..last_position, feeding hard decisions on."""
        aug = X
        probas = []
        for j in range(last_position + 1):
            p = self.chained_models[j].predict_proba(aug)
            probas.append(p)
            if j < last_position:
                aug = np.column_stack([aug, (p >= 0.5).astype(np.float64)])
        return probas

    def _proba_matrix(self, X):
        out = np.empty((X.shape[0], self.n_labels), dtype=np.float64)
        for j, p in enumerate(self._chain_through(X, self.n_labels - 1)):
            out[:, self.chain_order[j]] = p
        return out

    def label_proba_fn(self, label):
        if not 0 <= label < self.n_labels:
            raise ValueError(f"label index {label} out of range")
        position = self.chain_order.index(label)

        def f(X):
            X = np.asarray(X, dtype=np.float64)
            return self._chain_through(X, position)[position]

        return f

    def _payload(self):
        return {
            "chain_order": self.chain_order,
            "chained_models": [forest_to_doc(f) for f in self.chained_models],
        }


class MLKNNModel(MultiLabelModel):
    """Lazy MAP model over neighbor label counts with Laplace smoothing ``s``."""

    algorithm = "mlknn"

    def __init__(self, k, s, train_features, train_labels, label_names=None,
                 feature_names=None):
        train_features = np.asarray(train_features, dtype=np.float64)
        train_labels = np.asarray(train_labels, dtype=np.int64)
        super().__init__(train_features.shape[1], train_labels.shape[1],
                         label_names, feature_names)
        self.k = int(k)
        self.s = float(s)
        self.train_features = train_features
        self.train_labels = train_labels
        self.priors = (self.s + train_labels.sum(axis=0)) / (
            2.0 * self.s + train_labels.shape[0]
        )
        self.cond_counts_pos, self.cond_counts_neg = self._neighbor_statistics()

    def _neighbor_statistics(self):
        """Count, per label and per neighbor-positive count j in 0..k, how many
        training instances with(out) the label saw exactly j positive neighbors
        (self excluded)."""
        n, L = self.train_labels.shape
        d2 = cdist(self.train_features, self.train_features, "sqeuclidean")
        np.fill_diagonal(d2, np.inf)
        nn = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        counts = self.train_labels[nn].sum(axis=1)  # (n, L)
        c_pos = np.zeros((L, self.k + 1), dtype=np.int64)
        c_neg = np.zeros((L, self.k + 1), dtype=np.int64)
        for l in range(L):
            has = self.train_labels[:, l] == 1
            c_pos[l] = np.bincount(counts[has, l], minlength=self.k + 1)
            c_neg[l] = np.bincount(counts[~has, l], minlength=self.k + 1)
        return c_pos, c_neg

    def _proba_matrix(self, X):
        d2 = cdist(X, self.train_features, "sqeuclidean")
        nn = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        counts = self.train_labels[nn].sum(axis=1)  # (n, L)
        L = self.n_labels
        cols = np.arange(L)[None, :]
        s, k = self.s, self.k
        m_pos = self.cond_counts_pos.sum(axis=1)
        m_neg = self.cond_counts_neg.sum(axis=1)
        cond_pos = (s + self.cond_counts_pos[cols, counts]) / (s * (k + 1) + m_pos)
        cond_neg = (s + self.cond_counts_neg[cols, counts]) / (s * (k + 1) + m_neg)
        p1 = self.priors * cond_pos
        p0 = (1.0 - self.priors) * cond_neg
        return p1 / (p1 + p0)

    def _payload(self):
        return {
            "k": self.k,
            "s": self.s,
            "train_features": self.train_features.tolist(),
            "train_labels": self.train_labels.tolist(),
        }


def fit_br(train: Dataset, forest_params: ForestParams) -> BRModel:
    """Fit one forest per label column, each with a (seed, label)-derived seed."""
    forests = []
    for l in range(train.n_labels):
        params_l = replace(forest_params, seed=derive_seed(forest_params.seed, l))
        forests.append(fit_forest(train.features, train.labels[:, l], params_l))
    return BRModel(forests, train.label_names, train.feature_names)


def fit_cc(train: Dataset, forest_params: ForestParams, order="random",
           seed: int = 0) -> CCModel:
    """Fit a classifier chain; training augments with ground-truth earlier labels."""
    L = train.n_labels
    if isinstance(order, str):
        if order != "random":
            raise ValueError(f'order must be "random" or a permutation, got {order!r}')
        chain = [int(i) for i in np.random.default_rng(seed).permutation(L)]
    else:
        chain = [int(i) for i in order]
        if sorted(chain) != list(range(L)):
            raise ValueError("order is not a permutation of the label indices")
    aug = train.features
    models = []
    for l in chain:
        params_l = replace(forest_params, seed=derive_seed(forest_params.seed, l))
        models.append(fit_forest(aug, train.labels[:, l], params_l))
        aug = np.column_stack([aug, train.labels[:, l].astype(np.float64)])
    return CCModel(chain, models, train.n_features, train.label_names,
                   train.feature_names)


def fit_mlknn(train: Dataset, k: int, s: float = 1.0) -> MLKNNModel:
    """Fit ML-kNN: smoothed label priors plus neighbor-count statistics."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= train.n_instances:
        raise ValueError(f"k={k} must be smaller than n_instances={train.n_instances}")
    if s <= 0:
        raise ValueError("smoothing s must be positive")
    return MLKNNModel(k, s, train.features, train.labels, train.label_names,
                      train.feature_names)


def predict_proba_cc(model: CCModel, x):
    """Chain evaluation of a CC model; indexed by original label order."""
    return model.predict_proba(x)


def predict_proba_mlknn(model: MLKNNModel, x):
    """MAP posterior scores of an ML-kNN model for one instance or a batch."""
    return model.predict_proba(x)


def knn_indices(train_features, x, k: int):
    """Indices of the k nearest rows by Euclidean distance, ties to lower index."""
    train_features = np.asarray(train_features, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if k > train_features.shape[0]:
        raise ValueError(f"k={k} exceeds the {train_features.shape[0]} available rows")
    d2 = cdist(x[None, :], train_features, "sqeuclidean")[0]
    return np.argsort(d2, kind="stable")[:k]


def predict_labels(probas, threshold: float = 0.5):
    """Hard 0/1 decisions; probabilities equal to the threshold round up."""
    return (np.asarray(probas) >= threshold).astype(np.int64)


def model_from_doc(doc: dict) -> MultiLabelModel:
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a model document: {doc.get('format')!r}")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    algorithm = doc["algorithm"]
    payload = doc["payload"]
    names = doc["label_names"], doc["feature_names"]
    if algorithm == "br":
        return BRModel([forest_from_doc(f) for f in payload["forests"]], *names)
    if algorithm == "cc":
        return CCModel(
            payload["chain_order"],
            [forest_from_doc(f) for f in payload["chained_models"]],
            doc["n_features"], *names,
        )
    if algorithm == "mlknn":
        return MLKNNModel(payload["k"], payload["s"], payload["train_features"],
                          payload["train_labels"], *names)
    raise ValueError(f"unknown algorithm tag {algorithm!r}")


def model_to_json(model: MultiLabelModel) -> str:
    return _json.dumps(model.to_doc())


def model_from_json(text: str) -> MultiLabelModel:
    return model_from_doc(_json.loads(text))


def save_model(model: MultiLabelModel, path) -> None:
    _json.write(path, model.to_doc())


def load_model(path) -> MultiLabelModel:
    return model_from_doc(_json.read(path))
