"""Model-agnostic Shapley attributions for single predictions.

Two estimators share one coalition-value function. ``exact_shapley``
enumerates every feature subset and applies the combinatorial weights
directly; ``kernel_shap`` fits the additive surrogate

    g(z') = phi_0 + sum_j phi_j z'_j

by weighted least squares over sampled coalitions, with the empty and full
coalitions pinned as hard constraints so phi_0 + sum(phi) always equals the
model output at the explained instance. Hidden features are marginalized by
replacing them with background rows and averaging (interventional
expectation).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from . import _json

ENUMERATION_CAP = 16  # exact enumeration and budget="full" refuse beyond this
DEFAULT_BUDGET_EXTRA = 2048  # default kernel budget is 2*M + this

EXPLANATION_FILE_KEYS = {"instance", "label", "base_value", "fx", "phi"}


class EstimationError(RuntimeError):
    """The kernel regression system could not be solved."""


@dataclass(frozen=True)
class ExplainTarget:
    """A deterministic scalar prediction function over width-M vectors.

    ``f`` is evaluated in batches: it takes an (n, M) matrix and returns an
    (n,) vector.
    """

    f: Callable[[np.ndarray], np.ndarray]
    n_features: int


@dataclass
class Explanation:
    """Base value plus per-feature attributions for one (instance, label) pair."""

    base_value: float
    phi: np.ndarray
    fx: float
    feature_values: np.ndarray
    instance: int | None = None
    label: int | None = None
    feature_names: list[str] | None = None

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=np.float64)
        self.feature_values = np.asarray(self.feature_values, dtype=np.float64)
        if self.phi.shape != self.feature_values.shape or self.phi.ndim != 1:
            raise ValueError("phi and feature_values must be equal-length vectors")

    @property
    def n_features(self) -> int:
        return self.phi.shape[0]

    def local_accuracy_gap(self) -> float:
        """|phi_0 + sum(phi) - f(x)|; at most 1e-6 by construction."""
        return abs(self.base_value + float(self.phi.sum()) - self.fx)

    def names(self) -> list[str]:
        if self.feature_names is not None:
            return list(self.feature_names)
        return [f"f{i}" for i in range(self.n_features)]


def _check_inputs(target: ExplainTarget, x, background):
    x = np.asarray(x, dtype=np.float64)
    background = np.asarray(background, dtype=np.float64)
    if background.ndim == 1:
        background = background[None, :]
    if x.ndim != 1 or x.shape[0] != target.n_features:
        raise ValueError(f"instance width {x.shape} does not match target "
                         f"width {target.n_features}")
    if background.shape[0] < 1 or background.shape[1] != target.n_features:
        raise ValueError("background must be a non-empty matrix of target width")
    return x, background


def _coalition_values(target, x, masks, background):
    """Mean model output over background-completed rows, one value per mask.

    Chunked so the synthesized (masks x background) row block stays small.
    """
    B, M = background.shape
    n = masks.shape[0]
    values = np.empty(n, dtype=np.float64)
    chunk = max(1, 65536 // B)
    for start in range(0, n, chunk):
        block = masks[start:start + chunk]
        synth = np.where(block[:, None, :], x[None, None, :], background[None, :, :])
        out = np.asarray(target.f(synth.reshape(-1, M)), dtype=np.float64)
        values[start:start + block.shape[0]] = out.reshape(block.shape[0], B).mean(axis=1)
    return values


def eval_coalition(target: ExplainTarget, x, mask, background) -> float:
    """Model output with masked-in features from x and the rest marginalized.

    The full mask short-circuits to f(x) so it is exact, not an average of
    identical terms.
    """
    x, background = _check_inputs(target, x, background)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (target.n_features,):
        raise ValueError("mask width does not match target width")
    if mask.all():
        return float(np.asarray(target.f(x[None, :]))[0])
    return float(_coalition_values(target, x, mask[None, :], background)[0])


def exact_shapley(target: ExplainTarget, x, background,
                  instance=None, label=None) -> Explanation:
    """Attributions by full subset enumeration (the combinatorial definition).

    phi_i sums, over every coalition S not containing i, the weight
    |S|! (M-|S|-1)! / M! times the value gained by adding i to S. Capped at
    M <= 16 features.
    """
    x, background = _check_inputs(target, x, background)
    M = target.n_features
    if M > ENUMERATION_CAP:
        raise ValueError(f"exact enumeration capped at {ENUMERATION_CAP} features, "
                         f"target has {M}")
    n_masks = 1 << M
    ints = np.arange(n_masks, dtype=np.int64)
    bits = ((ints[:, None] >> np.arange(M)) & 1).astype(bool)
    values = _coalition_values(target, x, bits, background)
    fx = float(np.asarray(target.f(x[None, :]))[0])
    values[-1] = fx  # full coalition is exactly f(x)
    base = float(values[0])

    size_weight = np.array(
        [math.factorial(s) * math.factorial(M - 1 - s) / math.factorial(M)
         for s in range(M)]
    )
    popcount = bits.sum(axis=1)
    phi = np.empty(M, dtype=np.float64)
    for i in range(M):
        without = ints[(ints >> i) & 1 == 0]
        gains = values[without | (1 << i)] - values[without]
        phi[i] = float(np.sum(size_weight[popcount[without]] * gains))
    return Explanation(base_value=base, phi=phi, fx=fx, feature_values=x.copy(),
                       instance=instance, label=label)


def kernel_weight(M: int, z: int) -> float:
    """Shapley kernel weight for a proper coalition of size z out of M."""
    if not 1 <= z <= M - 1:
        raise ValueError(f"coalition size must be in [1, M-1], got z={z} for M={M}; "
                         "empty and full coalitions are hard constraints")
    return (M - 1) / (math.comb(M, z) * z * (M - z))


def _size_order(M: int):
    """Coalition sizes from the extremes inward: 1, M-1, 2, M-2, ..."""
    for d in range(1, (M - 1) // 2 + 1):
        yield d
        yield M - d
    if M % 2 == 0:
        yield M // 2


def _sample_coalitions(M: int, budget: int, rng: np.random.Generator):
    """Coalition masks and kernel weights under the extremes-inward policy.

    Size classes that fit in the remaining budget are enumerated exhaustively;
    the first class that does not fit is sampled uniformly without
    replacement, its per-coalition weight scaled so the class keeps its total
    kernel mass, and sampling stops there.
    """
    masks = []
    weights = []
    remaining = budget
    for z in _size_order(M):
        if remaining <= 0:
            break
        n_class = math.comb(M, z)
        w = kernel_weight(M, z)
        if n_class <= remaining:
            for combo in itertools.combinations(range(M), z):
                row = np.zeros(M, dtype=bool)
                row[list(combo)] = True
                masks.append(row)
                weights.append(w)
            remaining -= n_class
            continue
        if n_class <= 200_000:
            combos = list(itertools.combinations(range(M), z))
            picks = rng.choice(n_class, size=remaining, replace=False)
            chosen = [combos[i] for i in np.sort(picks)]
        else:
            seen = set()
            attempts = 0
            while len(seen) < remaining and attempts < 50 * remaining:
                combo = tuple(sorted(rng.choice(M, size=z, replace=False).tolist()))
                seen.add(combo)
                attempts += 1
            chosen = sorted(seen)
        scaled = w * (n_class / len(chosen))
        for combo in chosen:
            row = np.zeros(M, dtype=bool)
            row[list(combo)] = True
            masks.append(row)
            weights.append(scaled)
        remaining = 0
    return np.array(masks, dtype=bool), np.array(weights, dtype=np.float64)


def solve_weighted_ls(design: np.ndarray, weights: np.ndarray,
                      responses: np.ndarray) -> np.ndarray:
    """Minimize sum_i w_i (r_i - (A c)_i)^2 via the normal equations.

    The Gram matrix is factorized with a symmetric positive-definite
    (Cholesky) factorization; a failed factorization signals rank deficiency.
    """
    A = np.asarray(design, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    r = np.asarray(responses, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < A.shape[1]:
        raise EstimationError(
            f"system has {A.shape[0]} rows for {A.shape[1]} coefficients"
        )
    if w.shape != (A.shape[0],) or (w <= 0).any():
        raise ValueError("weights must be positive, one per row")
    Aw = A * w[:, None]
    gram = A.T @ Aw
    rhs = Aw.T @ r
    try:
        factor = scipy.linalg.cho_factor(gram)
    except scipy.linalg.LinAlgError as err:
        raise EstimationError(f"rank-deficient weighted least-squares system: {err}")
    return scipy.linalg.cho_solve(factor, rhs)


def kernel_shap(target: ExplainTarget, x, background, budget=None, seed: int = 0,
                instance=None, label=None) -> Explanation:
    """Attributions from the kernel-weighted surrogate regression.

    ``budget`` counts proper-coalition evaluations: an integer >= 2, or
    ``"full"`` for all 2^M - 2 of them (M <= 16), or None for the default
    2*M + 2048. The constraints g(empty) = phi_0 and g(full) = f(x) are
    eliminated by substitution, so local accuracy holds by construction.
    Deterministic for a fixed seed.
    """
    x, background = _check_inputs(target, x, background)
    M = target.n_features
    fx = float(np.asarray(target.f(x[None, :]))[0])
    base = float(_coalition_values(target, x, np.zeros((1, M), dtype=bool),
                                   background)[0])
    if M == 1:
        # Both constraints pin the single attribution; nothing to regress.
        return Explanation(base_value=base, phi=np.array([fx - base]), fx=fx,
                           feature_values=x.copy(), instance=instance, label=label)

    total_proper = (1 << M) - 2
    if budget == "full":
        if M > ENUMERATION_CAP:
            raise ValueError(f'budget="full" is capped at {ENUMERATION_CAP} features, '
                             f"target has {M}")
        n_budget = total_proper
    elif budget is None:
        n_budget = min(2 * M + DEFAULT_BUDGET_EXTRA, total_proper)
    else:
        n_budget = int(budget)
        if n_budget < 2:
            raise ValueError("budget must be at least 2 coalition evaluations")
        n_budget = min(n_budget, total_proper)

    rng = np.random.default_rng(seed)
    masks, weights = _sample_coalitions(M, n_budget, rng)
    values = _coalition_values(target, x, masks, background)

    # Substitute phi_e = (fx - base) - sum(other phi) to enforce g(full) = fx.
    Z = masks.astype(np.float64)
    z_e = Z[:, M - 1]
    design = Z[:, : M - 1] - z_e[:, None]
    responses = values - base - z_e * (fx - base)
    coef = solve_weighted_ls(design, weights, responses)
    phi = np.empty(M, dtype=np.float64)
    phi[: M - 1] = coef
    phi[M - 1] = (fx - base) - float(coef.sum())
    return Explanation(base_value=base, phi=phi, fx=fx, feature_values=x.copy(),
                       instance=instance, label=label)


def sample_background(features, size: int = 100, seed: int = 0) -> np.ndarray:
    """Background rows drawn without replacement (all rows if fewer than size)."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] <= size:
        return features.copy()
    rows = np.sort(np.random.default_rng(seed).choice(features.shape[0], size=size,
                                                      replace=False))
    return features[rows]


def explain_instance(model, x, background, labels, estimator: str = "kernel",
                     budget=None, seed: int = 0, instance=None) -> list[Explanation]:
    """One Explanation per requested label of a fitted multi-label model.

    ``model`` must expose ``label_proba_fn(label)`` returning a batched scalar
    prediction function (all mlshap models do).
    """
    x = np.asarray(x, dtype=np.float64)
    explanations = []
    for l in labels:
        target = ExplainTarget(f=model.label_proba_fn(int(l)),
                               n_features=model.n_features)
        if estimator == "exact":
            expl = exact_shapley(target, x, background, instance=instance, label=int(l))
        elif estimator == "kernel":
            expl = kernel_shap(target, x, background, budget=budget, seed=seed,
                               instance=instance, label=int(l))
        else:
            raise ValueError(f'estimator must be "exact" or "kernel", got {estimator!r}')
        expl.feature_names = getattr(model, "feature_names", None)
        explanations.append(expl)
    return explanations


def explanation_to_doc(explanation: Explanation) -> dict:
    names = explanation.names()
    return {
        "instance": explanation.instance,
        "label": explanation.label,
        "base_value": explanation.base_value,
        "fx": explanation.fx,
        "phi": [
            {"feature": names[i], "value": float(explanation.feature_values[i]),
             "shap": float(explanation.phi[i])}
            for i in range(explanation.n_features)
        ],
    }


def explanation_from_doc(doc: dict) -> Explanation:
    if not EXPLANATION_FILE_KEYS.issubset(doc):
        missing = EXPLANATION_FILE_KEYS - set(doc)
        raise ValueError(f"explanation document missing keys: {sorted(missing)}")
    return Explanation(
        base_value=float(doc["base_value"]),
        phi=np.array([item["shap"] for item in doc["phi"]], dtype=np.float64),
        fx=float(doc["fx"]),
        feature_values=np.array([item["value"] for item in doc["phi"]],
                                dtype=np.float64),
        instance=doc["instance"],
        label=doc["label"],
        feature_names=[item["feature"] for item in doc["phi"]],
    )


def save_explanation(explanation: Explanation, path) -> None:
    _json.write(path, explanation_to_doc(explanation))


def load_explanation(path) -> Explanation:
    return explanation_from_doc(_json.read(path))
