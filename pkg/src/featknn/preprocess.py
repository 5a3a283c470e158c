"""Min-max feature normalization and variance-thresholded PCA.

The processing pipeline is fixed: raw feature -> apply_minmax -> apply_pca.
Normalization statistics and the PCA basis are always learned on the
database (training) side and reused unchanged for queries; in particular
the PCA projection subtracts the database mean, never a query-side mean.
All statistics and decompositions are computed in 64-bit arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateData,
    DimensionError,
    InsufficientData,
    InvalidData,
    ParameterError,
)
from .feature_store import FeatureSet

__all__ = [
    "NormalizationStats",
    "PcaTransform",
    "fit_minmax",
    "apply_minmax",
    "fit_pca",
    "apply_pca",
]

_ORTHO_TOL = 1e-5


@dataclass(frozen=True, eq=False)
class NormalizationStats:
    """Per-dimension minima and maxima learned from the database."""

    min_vals: np.ndarray
    max_vals: np.ndarray

    def __post_init__(self):
        min_vals = _own_f64(self.min_vals, "min_vals", ndim=1)
        max_vals = _own_f64(self.max_vals, "max_vals", ndim=1)
        if min_vals.shape != max_vals.shape:
            raise InvalidData(f"min/max shape mismatch: {min_vals.shape} vs {max_vals.shape}")
        if np.any(min_vals > max_vals):
            raise InvalidData("min_vals must be <= max_vals in every dimension")
        object.__setattr__(self, "min_vals", min_vals)
        object.__setattr__(self, "max_vals", max_vals)

    @property
    def dim(self) -> int:
        return self.min_vals.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, NormalizationStats):
            return NotImplemented
        return np.array_equal(self.min_vals, other.min_vals) and np.array_equal(
            self.max_vals, other.max_vals
        )


@dataclass(frozen=True, eq=False)
class PcaTransform:
    """Database mean, orthonormal principal axes and explained-variance ratios.

    ``components`` rows are the principal axes (n_components x dim);
    ``explained_variance_ratio`` holds each axis's share of the total sample
    variance, in non-increasing order.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance_ratio: np.ndarray

    def __post_init__(self):
        mean = _own_f64(self.mean, "mean", ndim=1)
        components = _own_f64(self.components, "components", ndim=2)
        ratios = _own_f64(self.explained_variance_ratio, "explained_variance_ratio", ndim=1)
        m, d = components.shape
        if m < 1:
            raise InvalidData("need at least one component")
        if d != mean.shape[0]:
            raise InvalidData(f"components dim {d} does not match mean dim {mean.shape[0]}")
        if ratios.shape[0] != m:
            raise InvalidData(f"expected {m} variance ratios, got {ratios.shape[0]}")
        if np.any(ratios <= 0.0) or np.any(ratios > 1.0):
            raise InvalidData("variance ratios must lie in (0, 1]")
        if np.any(np.diff(ratios) > 0.0):
            raise InvalidData("variance ratios must be non-increasing")
        gram = components @ components.T
        if np.max(np.abs(gram - np.eye(m))) > _ORTHO_TOL:
            raise InvalidData("component rows are not orthonormal")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "explained_variance_ratio", ratios)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PcaTransform):
            return NotImplemented
        return (
            np.array_equal(self.mean, other.mean)
            and np.array_equal(self.components, other.components)
            and np.array_equal(self.explained_variance_ratio, other.explained_variance_ratio)
        )


def _own_f64(arr, name: str, ndim: int) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != ndim:
        raise InvalidData(f"{name} must be {ndim}-D, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise InvalidData(f"{name} contains non-finite entries")
    if out is arr:
        out = out.copy()
    out.setflags(write=False)
    return out


def _as_matrix(database) -> np.ndarray:
    if isinstance(database, FeatureSet):
        return np.asarray(database.vectors, dtype=np.float64)
    matrix = np.asarray(database, dtype=np.float64)
    if matrix.ndim != 2:
        raise InvalidData(f"database must be a 2-D matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InvalidData("database contains non-finite entries")
    return matrix


def fit_minmax(database: FeatureSet | np.ndarray) -> NormalizationStats:
    """Learn per-dimension min/max over the database rows."""
    matrix = _as_matrix(database)
    if matrix.shape[0] < 1:
        raise InsufficientData("cannot fit normalization on an empty database")
    return NormalizationStats(min_vals=matrix.min(axis=0), max_vals=matrix.max(axis=0))


def apply_minmax(stats: NormalizationStats, x) -> np.ndarray:
    """Rescale to the database span: (x - min) / (max - min), per dimension.

    Accepts a single vector or a matrix of row vectors. Dimensions whose
    database span is zero map to 0.0 (a constant feature carries no
    information). Values are not clamped, so query vectors outside the
    database range land outside [0, 1].
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2):
        raise DimensionError(f"expected a vector or matrix, got shape {x.shape}")
    if x.shape[-1] != stats.dim:
        raise DimensionError(f"dimension mismatch: {x.shape[-1]} vs {stats.dim}")
    span = stats.max_vals - stats.min_vals
    shifted = x - stats.min_vals
    return np.divide(shifted, span, out=np.zeros_like(shifted), where=span > 0.0)


def fit_pca(database, variance_threshold: float = 0.99) -> PcaTransform:
    """Fit principal axes keeping the smallest count that explains the threshold.

    The database rows are mean-centered and decomposed by SVD (equivalent to
    an eigendecomposition of the sample covariance with divisor n - 1).
    Explained-variance ratios are eigenvalue shares of the total variance;
    the component count m is the smallest number whose cumulative ratio
    reaches ``variance_threshold``. Each component row's sign is fixed so
    that its largest-magnitude entry is positive (ties to the lowest index),
    making repeated fits bit-comparable.
    """
    if not 0.0 < variance_threshold <= 1.0:
        raise ParameterError(f"variance threshold must be in (0, 1], got {variance_threshold}")
    matrix = _as_matrix(database)
    n, d = matrix.shape
    if n < 2:
        raise InsufficientData(f"PCA needs at least 2 database vectors, got {n}")
    if np.all(matrix == matrix[0]):
        raise DegenerateData("database has zero total variance (all rows identical)")

    mean = matrix.mean(axis=0)
    centered = matrix - mean
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)

    rank_cap = min(n - 1, d)
    eigenvalues = (singular[:rank_cap] ** 2) / (n - 1)
    # numerical-rank cutoff, same convention as np.linalg.matrix_rank;
    # eigenvalues are sorted descending so the kept set is a prefix
    cutoff = eigenvalues[0] * max(n, d) * np.finfo(np.float64).eps
    kept = int(np.count_nonzero(eigenvalues > cutoff))
    eigenvalues = eigenvalues[:kept]
    ratios = eigenvalues / eigenvalues.sum()

    cumulative = np.cumsum(ratios)
    reached = np.nonzero(cumulative >= variance_threshold)[0]
    # float round-off can leave the cumulative sum a hair under 1.0, in which
    # case every above-cutoff component is kept
    m = int(reached[0]) + 1 if reached.size else kept

    components = vt[:m].copy()
    for i in range(m):
        anchor = int(np.argmax(np.abs(components[i])))
        if components[i, anchor] < 0.0:
            components[i] = -components[i]

    return PcaTransform(mean=mean, components=components, explained_variance_ratio=ratios[:m])


def apply_pca(transform: PcaTransform, x) -> np.ndarray:
    """Project onto the principal axes: components @ (x - mean).

    Accepts a single vector or a matrix of row vectors.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2):
        raise DimensionError(f"expected a vector or matrix, got shape {x.shape}")
    if x.shape[-1] != transform.dim:
        raise DimensionError(f"dimension mismatch: {x.shape[-1]} vs {transform.dim}")
    return (x - transform.mean) @ transform.components.T
