"""The four similarity measures used for feature-space neighbor search.

All functions accept equal-length 1-D real vectors, accumulate in 64-bit
arithmetic regardless of the input dtype, and are pure and thread-safe.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import DimensionError, ZeroVectorError

__all__ = [
    "MetricKind",
    "euclidean",
    "city_block",
    "canberra",
    "cosine",
    "distance",
    "batch_distance",
]


class MetricKind(enum.Enum):
    """Closed enumeration of the supported distance metrics."""

    EUCLIDEAN = "euclidean"
    CITY_BLOCK = "cityblock"
    CANBERRA = "canberra"
    COSINE = "cosine"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "MetricKind":
        """Parse a CLI flag value (case-insensitive) into a MetricKind.

        >>> MetricKind.parse("CityBlock")
        <MetricKind.CITY_BLOCK: 'cityblock'>
        """
        key = name.strip().lower()
        for kind in cls:
            if kind.value == key:
                return kind
        valid = ", ".join(k.value for k in cls)
        raise ValueError(f"unknown metric {name!r}; expected one of: {valid}")


def _as_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise DimensionError(f"expected 1-D vectors, got shapes {x.shape} and {y.shape}")
    if x.shape[0] != y.shape[0]:
        raise DimensionError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] == 0:
        raise DimensionError("vectors must have dimension >= 1")
    return x, y


def euclidean(x, y) -> float:
    """Root of the summed squared differences: sqrt(sum_i (x_i - y_i)^2)."""
    x, y = _as_pair(x, y)
    return float(np.sqrt(np.sum((x - y) ** 2)))


def city_block(x, y) -> float:
    """Sum of absolute differences: sum_i |x_i - y_i|."""
    x, y = _as_pair(x, y)
    return float(np.sum(np.abs(x - y)))


def canberra(x, y) -> float:
    """Relatively weighted L1: sum_i |x_i - y_i| / (|x_i| + |y_i|).

    A term with x_i == y_i == 0 contributes 0; the quotient is taken as its
    limit along x_i == y_i rather than NaN.
    """
    x, y = _as_pair(x, y)
    num = np.abs(x - y)
    den = np.abs(x) + np.abs(y)
    terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0.0)
    return float(np.sum(terms))


def cosine(x, y) -> float:
    """One minus the cosine of the angle between x and y; range [0, 2].

    Raises ZeroVectorError when either vector has zero norm, since the
    angle is undefined there. The dot product and both squared norms use
    the same summation, so d(x, x) is exactly 0.0.
    """
    x, y = _as_pair(x, y)
    sx = np.sum(x * x)
    sy = np.sum(y * y)
    if sx == 0.0 or sy == 0.0:
        raise ZeroVectorError("cosine distance is undefined for zero-norm vectors")
    denom = _norm_product(sx, sy)
    # clip: rounding may breach Cauchy-Schwarz by an ulp
    return float(min(max(1.0 - np.sum(x * y) / denom, 0.0), 2.0))


def _norm_product(sx, sy):
    # sqrt of the product keeps d(x, x) exactly 0; fall back to the product
    # of sqrts when the squared-norm product under- or overflows
    p = sx * sy
    if np.finfo(np.float64).tiny <= p < np.inf:
        return np.sqrt(p)
    return np.sqrt(sx) * np.sqrt(sy)


def distance(kind: MetricKind, x, y) -> float:
    """Dispatch to the metric selected by ``kind``."""
    return _DISPATCH[kind](x, y)


_DISPATCH = {
    MetricKind.EUCLIDEAN: euclidean,
    MetricKind.CITY_BLOCK: city_block,
    MetricKind.CANBERRA: canberra,
    MetricKind.COSINE: cosine,
}


def batch_distance(kind: MetricKind, xs, y) -> np.ndarray:
    """Distances from every row of ``xs`` to the vector ``y``.

    Vectorized equivalent of ``[distance(kind, row, y) for row in xs]``;
    returns a float64 array of length ``xs.shape[0]``.
    """
    xs = np.asarray(xs, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if xs.ndim != 2 or y.ndim != 1:
        raise DimensionError(f"expected a matrix and a vector, got shapes {xs.shape} and {y.shape}")
    if xs.shape[1] != y.shape[0]:
        raise DimensionError(f"dimension mismatch: {xs.shape[1]} vs {y.shape[0]}")
    if y.shape[0] == 0:
        raise DimensionError("vectors must have dimension >= 1")

    if kind is MetricKind.EUCLIDEAN:
        return np.sqrt(np.sum((xs - y) ** 2, axis=1))
    if kind is MetricKind.CITY_BLOCK:
        return np.sum(np.abs(xs - y), axis=1)
    if kind is MetricKind.CANBERRA:
        num = np.abs(xs - y)
        den = np.abs(xs) + np.abs(y)
        terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0.0)
        return np.sum(terms, axis=1)
    # cosine; reductions mirror the scalar path so identical rows score 0.0
    rows_sq = np.sum(xs * xs, axis=1)
    y_sq = np.sum(y * y)
    if y_sq == 0.0 or np.any(rows_sq == 0.0):
        raise ZeroVectorError("cosine distance is undefined for zero-norm vectors")
    p = rows_sq * y_sq
    safe = (p >= np.finfo(np.float64).tiny) & (p < np.inf)
    denom = np.where(safe, np.sqrt(p), np.sqrt(rows_sq) * np.sqrt(y_sq))
    out = 1.0 - np.sum(xs * y, axis=1) / denom
    return np.clip(out, 0.0, 2.0)
