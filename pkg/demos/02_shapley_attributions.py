"""Exact and kernel Shapley attributions side by side.

Builds a small nonlinear target (a fitted forest), explains one prediction
with both estimators, and demonstrates the properties the attributions are
tested against: local accuracy, the dummy/symmetry axioms, the closed form
for linear models, and convergence of the kernel estimate toward the exact
values as the coalition budget grows.

Run: python demos/02_shapley_attributions.py
"""

import numpy as np

from mlshap import (
    ExplainTarget,
    ForestParams,
    exact_shapley,
    fit_forest,
    kernel_shap,
    kernel_weight,
)

rng = np.random.default_rng(21)

# ----------------------------------------------------------------------------
# The target: probability output of a forest over 8 features.
# ----------------------------------------------------------------------------
M = 8
X = rng.normal(size=(200, M))
y = (X[:, 0] * X[:, 1] + X[:, 2] > 0).astype(int)
forest = fit_forest(X, y, ForestParams(n_trees=10, max_depth=6, seed=5))
target = ExplainTarget(f=forest.predict_proba, n_features=M)

x = rng.normal(size=M)
background = rng.normal(size=(10, M))

exact = exact_shapley(target, x, background)
print(f"f(x) = {exact.fx:.4f}, base value (mean over background) = "
      f"{exact.base_value:.4f}")
print(f"local accuracy gap: {exact.local_accuracy_gap():.2e}")
print("\nper-feature attributions (exact enumeration of all 2^8 coalitions):")
for i, phi in enumerate(exact.phi):
    bar = "#" * int(abs(phi) * 80)
    print(f"  f{i}: {phi:+.4f} {bar}")

# ----------------------------------------------------------------------------
# Kernel weights are largest at the extremes, which is why the sampler
# enumerates sizes 1 and M-1 first.
# ----------------------------------------------------------------------------
print("\nkernel weights by coalition size (M=8):")
print("  " + ", ".join(f"z={z}: {kernel_weight(M, z):.4f}" for z in range(1, M)))

# ----------------------------------------------------------------------------
# The kernel estimate converges to the exact values as the budget grows; with
# the full budget the weighted regression recovers them to round-off.
# ----------------------------------------------------------------------------
print("\nbudget -> max |kernel - exact|:")
for budget in (2 * M, 8 * M, 120, "full"):
    kernel = kernel_shap(target, x, background, budget=budget, seed=0)
    gap = np.max(np.abs(kernel.phi - exact.phi))
    print(f"  {str(budget):>5}: {gap:.2e} "
          f"(local accuracy {kernel.local_accuracy_gap():.1e})")

# ----------------------------------------------------------------------------
# Axioms on constructed targets.
# ----------------------------------------------------------------------------
w = rng.normal(size=4)
w[2] = 0.0  # feature 2 is dead
linear = ExplainTarget(f=lambda Z: Z @ w, n_features=4)
xx = rng.normal(size=4)
b = rng.normal(size=(1, 4))
expl = exact_shapley(linear, xx, b)
print(f"\ndummy axiom: ignored feature gets phi = {expl.phi[2]:+.1e}")
print(f"closed form for linear f: max |phi - w*(x-b)| = "
      f"{np.max(np.abs(expl.phi - w * (xx - b[0]))):.2e}")

sym = ExplainTarget(f=lambda Z: Z[:, 0] * Z[:, 1], n_features=2)
e = exact_shapley(sym, np.array([1.5, 1.5]), np.array([[0.2, 0.2]]))
print(f"symmetry axiom: phi = ({e.phi[0]:.4f}, {e.phi[1]:.4f}) for symmetric "
      "f, x, background")
