"""A tour of the four distance metrics on small, hand-checkable vectors.

Run: python demos/metric_tour.py
"""
import numpy as np

from featknn import MetricKind, canberra, city_block, cosine, distance, euclidean

print("== fixed pairs ==")
print("euclidean (0,0)-(3,4)   =", euclidean([0, 0], [3, 4]), " (3-4-5 triangle)")
print("cityblock (1,2)-(4,6)   =", city_block([1, 2], [4, 6]), " (3 + 4 blocks)")
print("canberra  (1,2)-(3,4)   =", canberra([1, 2], [3, 4]), " (2/4 + 2/6)")
print("cosine    (1,0)-(0,1)   =", cosine([1, 0], [0, 1]), " (orthogonal)")
print("cosine    (1,1)-(2,2)   =", cosine([1, 1], [2, 2]), " (parallel, magnitude-blind)")
print("cosine    (1,0)-(-1,0)  =", cosine([1, 0], [-1, 0]), " (antiparallel)")

print("\n== the same random pair under all four metrics ==")
rng = np.random.default_rng(7)
x, y = rng.normal(size=(2, 8))
for kind in MetricKind:
    print(f"{kind.value:10s} d(x,y) = {distance(kind, x, y):.6f}")

print("\n== what makes each metric different ==")
a, b = np.array([1.0, 100.0]), np.array([2.0, 101.0])
print("same absolute offset in a small and a large coordinate:")
print("  cityblock =", city_block(a, b), "  (treats both equally)")
print("  canberra  =", round(canberra(a, b), 6), "(dominated by the change near zero)")

big, small = np.array([10.0, 0.0]), np.array([0.1, 0.0])
print("two vectors pointing the same way at different lengths:")
print("  euclidean =", euclidean(big, small))
print("  cosine    =", cosine(big, small), " (direction only)")

print("\n== L1 dominates L2 on any pair ==")
for _ in range(3):
    x, y = rng.normal(size=(2, 16))
    print(f"  cityblock {city_block(x, y):8.4f} >= euclidean {euclidean(x, y):8.4f}")
