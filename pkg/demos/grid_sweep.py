"""The full evaluation grid: 4 metrics x 5 k values x PCA on/off.

Mirrors the comparison-table workflow: every configuration is scored on the
same train/test split, then the best k per metric is extracted as a summary
row.

Run: python demos/grid_sweep.py
"""
import numpy as np

from featknn import FeatureSet, MetricKind, render_sweep, sweep

ORGANS = ("bladder", "bowel", "gallbladder", "kidney", "liver", "spleen")

rng = np.random.default_rng(23)
centers = rng.normal(scale=6.0, size=(6, 48))


def sample(per_class, noise):
    vectors = np.concatenate(
        [centers[c] + rng.normal(scale=noise, size=(per_class, 48)) for c in range(6)]
    ).astype(np.float32)
    return FeatureSet(vectors, np.repeat(np.arange(6), per_class), ORGANS)


# noisy clusters so the grid shows real spread instead of a wall of 100%
train = sample(50, noise=4.0)
test = sample(10, noise=4.0)

reports = sweep(train, test)
print(f"{len(reports)} configurations evaluated\n")
print(render_sweep(reports, "text"))

print("best k per metric (PCA on), comparison-row style:")
for metric in MetricKind:
    candidates = [r for r in reports if r.config.use_pca and r.metric is metric]
    best = max(candidates, key=lambda r: r.accuracy)
    print(f"  {metric.value:10s} {best.accuracy * 100:6.2f}%  (k={best.k})")
