"""How the variance threshold picks the PCA component count.

Builds a feature matrix whose variance is concentrated in a few directions,
then fits at several thresholds and prints the cumulative-variance curve.

Run: python demos/pca_variance_walkthrough.py
"""
import numpy as np

from featknn import apply_pca, fit_pca

rng = np.random.default_rng(11)

# 200 samples in 20 dims, but only ~6 directions carry real signal
latent = rng.normal(size=(200, 6)) * np.array([10.0, 7.0, 5.0, 3.0, 2.0, 1.0])
mixing = rng.normal(size=(6, 20))
features = latent @ mixing + rng.normal(scale=0.3, size=(200, 20))

full = fit_pca(features, variance_threshold=1.0)
cumulative = np.cumsum(full.explained_variance_ratio)

print("cumulative explained variance by component count:")
for i, value in enumerate(cumulative[:12], start=1):
    bar = "#" * int(value * 40)
    print(f"  m={i:2d}  {value * 100:6.2f}%  {bar}")

print("\ncomponent count chosen per threshold:")
for threshold in (0.5, 0.9, 0.99, 0.999):
    transform = fit_pca(features, variance_threshold=threshold)
    kept = transform.explained_variance_ratio.sum()
    print(
        f"  threshold {threshold:5.3f} -> m = {transform.n_components:2d}"
        f"  (keeps {kept * 100:.2f}% of the variance)"
    )

transform = fit_pca(features, variance_threshold=0.99)
projected = apply_pca(transform, features)
print(
    f"\nprojection at 0.99: {features.shape[1]} dims -> {projected.shape[1]} dims; "
    f"database mean maps to {apply_pca(transform, transform.mean).round(12)}"
)
