"""The full engine on synthetic organ-like feature clusters.

Six well-separated Gaussian clusters stand in for the six organ classes:
split into database and test sets, fit the normalization + PCA pipeline,
classify with city-block k-NN, and show the confusion matrix plus a
nearest-database-image retrieval for one query.

Run: python demos/classify_organs_synthetic.py
"""
import numpy as np

from featknn import (
    FeatureSet,
    MetricKind,
    PipelineConfig,
    SplitSpec,
    classify,
    evaluate,
    fit,
    neighbors,
    render_report,
    stratified_split,
)

ORGANS = ("bladder", "bowel", "gallbladder", "kidney", "liver", "spleen")

rng = np.random.default_rng(3)
centers = rng.normal(scale=30.0, size=(6, 64))
vectors = np.concatenate(
    [centers[c] + rng.normal(size=(60, 64)) for c in range(6)]
).astype(np.float32)
full = FeatureSet(vectors, np.repeat(np.arange(6), 60), ORGANS)

train, test = stratified_split(full, SplitSpec(per_class_train=50, per_class_test=10, seed=17))
print(f"database: {train.n_vectors} vectors   test: {test.n_vectors} vectors")

model = fit(train, PipelineConfig(use_pca=True, variance_threshold=0.99))
print(f"pipeline: min-max + PCA ({model.raw_dim} dims -> {model.pca.n_components} components)")

report = evaluate(model, test, k=3, metric=MetricKind.CITY_BLOCK)
print()
print(render_report(report, "text"))

query_index = 42
query = test.vectors[query_index]
true_name = ORGANS[test.labels[query_index]]
prediction = classify(model, query, k=3, metric=MetricKind.CITY_BLOCK)
print(f"retrieval for test vector {query_index} (true class: {true_name}):")
for nb in neighbors(model, query, k=3, metric=MetricKind.CITY_BLOCK):
    print(f"  database row {nb.index:3d}  distance {nb.distance:.4f}  label {ORGANS[nb.label]}")
print(f"majority vote -> {ORGANS[prediction.predicted_class]}")
