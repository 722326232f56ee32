"""From explanations to the three shipped views: importance, summary, force.

Trains binary relevance on a synthetic dataset shaped like a food-truck
preference survey (407 x 21, 12 labels, with the signal planted on
"averageincome" and friends), explains a slice of instances for every label,
and writes each view as JSON + SVG into demo_out/.

Run: python demos/03_explanation_views.py
"""

from pathlib import Path

import numpy as np

from mlshap import (
    Dataset,
    ForestParams,
    explain_instance,
    feature_importance,
    fit_br,
    force_data,
    plot_spec,
    render_svg,
    sample_background,
    summary_points,
    write_json,
)

FEATURES = [
    "averageincome", "scholarity", "agegroup", "gender", "marital_status",
    "occupation", "region", "time_spent", "eats_out", "budget", "transport",
    "company", "weekday", "daypart", "music", "seating", "payment",
    "promotions", "hygiene_rating", "queue_tolerance", "spice_preference",
]
LABELS = [
    "snacks", "chinese_food", "street_food", "arabic_food", "barbecue",
    "brazilian_food", "burgers", "healthy_food", "italian_food",
    "japanese_food", "mexican_food", "sweets",
]

rng = np.random.default_rng(4)
n, d, L = 407, len(FEATURES), len(LABELS)
X = rng.normal(size=(n, d))
W = np.zeros((d, L))
W[:4] = (2.0 / (1.0 + np.arange(4)))[:, None] * rng.choice([-1.0, 1.0], size=(4, L))
scores = X @ W + 0.25 * rng.normal(size=(n, L))
Y = (scores > np.median(scores, axis=0)).astype(int)
dataset = Dataset("foodtruck-like", X, FEATURES, Y, LABELS)

model = fit_br(dataset, ForestParams(n_trees=10, max_depth=15,
                                     min_samples_leaf=2, seed=0))
background = sample_background(dataset.features, size=25, seed=0)

# Explain 8 instances for every label: 8 x 12 = 96 explanations.
instances = [3, 47, 101, 160, 212, 280, 333, 390]
explanations = []
for instance in instances:
    explanations += explain_instance(
        model, dataset.features[instance], background,
        labels=range(dataset.n_labels), estimator="kernel", budget=64, seed=1,
        instance=instance,
    )
print(f"computed {len(explanations)} explanations "
      f"({len(instances)} instances x {dataset.n_labels} labels)")

out = Path("demo_out")
out.mkdir(exist_ok=True)

# ---------------------------------------------------------------------------
# Global view 1: stacked per-label mean |phi| importance bars.
# ---------------------------------------------------------------------------
table = feature_importance(explanations)
print("\ntop 5 features by total mean |phi|:")
for f in table.order[:5]:
    print(f"  {table.feature_names[f]:<18} {table.totals[f]:.4f}")
spec = plot_spec(table, title="Mean |SHAP value| per feature, stacked by label")
(out / "importance.svg").write_text(render_svg(spec))
(out / "importance.json").write_text(write_json(spec))

# ---------------------------------------------------------------------------
# Global view 2: beeswarm summary for one label, colored by feature value.
# ---------------------------------------------------------------------------
label = 0
points = summary_points([e for e in explanations if e.label == label])
spec = plot_spec(points, title=f"SHAP summary, label '{LABELS[label]}'")
(out / "summary.svg").write_text(render_svg(spec))
(out / "summary.json").write_text(write_json(spec))
print(f"\nsummary view: {points.point_shap.size} points for label "
      f"'{LABELS[label]}'")

# ---------------------------------------------------------------------------
# Local view: force decomposition of one (instance, label) prediction.
# ---------------------------------------------------------------------------
one = explanations[0]
force = force_data(one)
print(f"\nforce view for instance {one.instance}, label '{LABELS[one.label]}':")
print(f"  base {force.base_value:.4f} -> prediction {force.fx:.4f}")
for name, value, phi in force.up[:3]:
    print(f"  pushes up   {name} = {value:.3f} (phi {phi:+.4f})")
for name, value, phi in force.down[:3]:
    print(f"  pushes down {name} = {value:.3f} (phi {phi:+.4f})")
spec = plot_spec(force, title="Prediction forces")
(out / "force.svg").write_text(render_svg(spec))
(out / "force.json").write_text(write_json(spec))

print(f"\nwrote importance/summary/force SVG + JSON into {out}/")
