"""Synthetic dataset builders shared across the test suite.

The three public corpora quoted in the README are not bundled, so shape- and
pipeline-level tests run against generated stand-ins with identical
(instances, features, labels) geometry. Label matrices carry planted linear
signal so that trained models have something real to attribute.
"""

from __future__ import annotations

import numpy as np

from mlshap import Dataset

# (instances, features, labels) triples of the three reference corpora.
CORPUS_SHAPES = {
    "yeast": (2417, 103, 14),
    "water-quality": (1060, 16, 14),
    "foodtruck": (407, 21, 12),
}

FOODTRUCK_FEATURES = [
    "averageincome", "scholarity", "agegroup", "gender", "marital_status",
    "occupation", "region", "time_spent", "eats_out", "budget", "transport",
    "company", "weekday", "daypart", "music", "seating", "payment",
    "promotions", "hygiene_rating", "queue_tolerance", "spice_preference",
]

FOODTRUCK_LABELS = [
    "snacks", "chinese_food", "street_food", "arabic_food", "barbecue",
    "brazilian_food", "burgers", "healthy_food", "italian_food",
    "japanese_food", "mexican_food", "sweets",
]


def planted_dataset(name, n, d, L, seed, n_signal=4, feature_names=None,
                    label_names=None) -> Dataset:
    """Random features with labels driven by the first ``n_signal`` features.

    Signal weights decay with the feature position, so feature 0 carries the
    strongest influence on every label. Label thresholds sit at the median
    score, keeping both classes populated.
    """
    rng = np.random.default_rng(seed)
    n_signal = min(n_signal, d)
    X = rng.normal(size=(n, d))
    W = np.zeros((d, L))
    for j in range(L):
        strengths = 2.0 / (1.0 + np.arange(n_signal))
        W[:n_signal, j] = strengths * rng.choice([-1.0, 1.0], size=n_signal)
    scores = X @ W + 0.25 * rng.normal(size=(n, L))
    Y = (scores > np.median(scores, axis=0)).astype(np.int64)
    feature_names = feature_names or [f"f{i}" for i in range(d)]
    label_names = label_names or [f"y{j}" for j in range(L)]
    return Dataset(name, X, feature_names, Y, label_names)


def foodtruck_like(seed=0) -> Dataset:
    n, d, L = CORPUS_SHAPES["foodtruck"]
    return planted_dataset("foodtruck", n, d, L, seed,
                           feature_names=FOODTRUCK_FEATURES,
                           label_names=FOODTRUCK_LABELS)


def corpus_like(name, seed=0) -> Dataset:
    n, d, L = CORPUS_SHAPES[name]
    if name == "foodtruck":
        return foodtruck_like(seed)
    feature_names = [f"Att{i + 1}" for i in range(d)]
    label_names = [f"Class{j + 1}" for j in range(L)]
    return planted_dataset(name, n, d, L, seed, feature_names=feature_names,
                           label_names=label_names)


def write_arff(dataset: Dataset, path) -> None:
    """Serialize a Dataset in the ARFF subset the loader understands."""
    lines = [f"@relation {dataset.name}", ""]
    for name in dataset.feature_names:
        lines.append(f"@attribute {name} numeric")
    for name in dataset.label_names:
        lines.append(f"@attribute {name} {{0,1}}")
    lines.append("@data")
    for i in range(dataset.n_instances):
        row = [repr(float(v)) for v in dataset.features[i]]
        row += [str(int(v)) for v in dataset.labels[i]]
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
