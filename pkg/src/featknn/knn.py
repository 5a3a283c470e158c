"""Frozen k-NN classification models: pipeline assembly, queries, persistence.

A fitted model stores the normalization statistics, the optional PCA
transform, and the database vectors already pushed through the pipeline, so
a query only pays for its own transform plus one brute-force distance scan.
The scan is exact: with n in the hundreds even 2048-dim databases answer in
well under a millisecond, so no approximate index is justified.

KNNM model file, version 1, all integers little-endian:

* magic ``KNNM``; u32 version (= 1); u32 flags (bit 0 = has PCA)
* class table: u32 n_classes, then per class u16 byte length + UTF-8 bytes
* u32 raw_dim
* normalization stats: raw_dim x f64 minima, raw_dim x f64 maxima
* if flag bit 0: u32 n_components; raw_dim x f64 mean;
  n_components x raw_dim x f64 components; n_components x f64 ratios
* u32 n; n x u16 labels; n x m x f32 processed database
  (m = n_components with PCA, raw_dim without)

The fit-time variance threshold is not persisted; models read back from
disk report the cumulative explained variance of their kept components in
its place.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, NamedTuple

import numpy as np

from .errors import (
    CorruptFile,
    DimensionError,
    FormatError,
    InvalidData,
    ParameterError,
    UnsupportedVersion,
)
from .feature_store import (
    FeatureSet,
    _CountingReader,
    _CountingWriter,
    _encode_class_table,
    _read_class_table,
)
from .metrics import MetricKind, batch_distance
from .preprocess import (
    NormalizationStats,
    PcaTransform,
    apply_minmax,
    apply_pca,
    fit_minmax,
    fit_pca,
)

__all__ = [
    "PipelineConfig",
    "KnnModel",
    "Neighbor",
    "Prediction",
    "fit",
    "apply_pipeline",
    "neighbors",
    "classify",
    "write_model",
    "read_model",
]

KNNM_MAGIC = b"KNNM"
KNNM_VERSION = 1
_FLAG_HAS_PCA = 1


@dataclass(frozen=True)
class PipelineConfig:
    """Pipeline switches: min-max normalization is always on, PCA is optional."""

    use_pca: bool = True
    variance_threshold: float = 0.99

    def __post_init__(self):
        if not 0.0 < self.variance_threshold <= 1.0:
            raise ParameterError(
                f"variance threshold must be in (0, 1], got {self.variance_threshold}"
            )


class Neighbor(NamedTuple):
    """One database entry returned by a neighbor query."""

    index: int
    distance: float
    label: int


@dataclass(frozen=True)
class Prediction:
    """Majority-vote outcome with the full evidence that produced it."""

    predicted_class: int
    votes: tuple[int, ...]
    neighbors: tuple[Neighbor, ...]


@dataclass(frozen=True, eq=False)
class KnnModel:
    """Immutable fitted pipeline plus the processed database it indexes."""

    stats: NormalizationStats
    pca: PcaTransform | None
    database: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]
    config: PipelineConfig

    def __post_init__(self):
        database = np.ascontiguousarray(self.database, dtype=np.float32)
        if database is self.database:
            database = database.copy()
        if database.ndim != 2 or database.shape[0] < 1:
            raise InvalidData(f"database must be a non-empty matrix, got shape {database.shape}")
        if not np.all(np.isfinite(database)):
            raise InvalidData("database contains non-finite entries")
        expected_m = self.pca.n_components if self.pca is not None else self.stats.dim
        if database.shape[1] != expected_m:
            raise InvalidData(
                f"database width {database.shape[1]} does not match pipeline output {expected_m}"
            )
        if self.pca is not None and self.pca.dim != self.stats.dim:
            raise InvalidData("PCA input dim does not match normalization dim")

        names = tuple(self.class_names)
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != database.shape[0]:
            raise InvalidData(f"expected {database.shape[0]} labels, got shape {labels.shape}")
        if labels.dtype.kind not in "iu":
            raise InvalidData(f"labels must be integers, got dtype {labels.dtype}")
        if labels.min() < 0 or labels.max() >= len(names):
            raise InvalidData(f"label indices must be in [0, {len(names)})")
        labels = labels.astype(np.uint16)

        database.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "database", database)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", names)

    @property
    def n(self) -> int:
        return self.database.shape[0]

    @property
    def raw_dim(self) -> int:
        return self.stats.dim

    @property
    def processed_dim(self) -> int:
        return self.database.shape[1]

    def __eq__(self, other) -> bool:
        """Equality over the persisted fields (the variance threshold is not one)."""
        if not isinstance(other, KnnModel):
            return NotImplemented
        return (
            self.class_names == other.class_names
            and self.config.use_pca == other.config.use_pca
            and self.stats == other.stats
            and self.pca == other.pca
            and np.array_equal(self.labels, other.labels)
            and self.database.shape == other.database.shape
            and self.database.tobytes() == other.database.tobytes()
        )


def _process_row(stats: NormalizationStats, pca: PcaTransform | None, row) -> np.ndarray:
    out = apply_minmax(stats, row)
    if pca is not None:
        out = apply_pca(pca, out)
    return out.astype(np.float32)


def fit(database: FeatureSet, config: PipelineConfig = PipelineConfig()) -> KnnModel:
    """Fit the full pipeline on a raw database and freeze it into a model.

    Normalization statistics come from the raw vectors; with PCA enabled the
    principal axes are fitted on the normalized vectors. Database rows are
    then pushed through the single-vector pipeline path, one by one: matrix
    and vector BLAS products round differently, so sharing the query path is
    what makes a stored row bit-identical to a re-processed query.
    """
    stats = fit_minmax(database)
    if config.use_pca:
        normalized = apply_minmax(stats, database.vectors)
        pca = fit_pca(normalized, config.variance_threshold)
    else:
        pca = None
    processed = np.stack([_process_row(stats, pca, row) for row in database.vectors])
    return KnnModel(
        stats=stats,
        pca=pca,
        database=processed,
        labels=database.labels,
        class_names=database.class_names,
        config=config,
    )


def apply_pipeline(model: KnnModel, x) -> np.ndarray:
    """Run a raw vector (or matrix of rows) through the model's pipeline.

    Returns float32, the precision of the stored database; a query equal to
    a raw database vector reproduces its stored row bit-for-bit.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.raw_dim:
        raise DimensionError(f"dimension mismatch: {x.shape[-1]} vs {model.raw_dim}")
    if x.ndim == 1:
        return _process_row(model.stats, model.pca, x)
    if x.ndim == 2:
        return np.stack([_process_row(model.stats, model.pca, row) for row in x])
    raise DimensionError(f"expected a vector or matrix, got shape {x.shape}")


def neighbors(model: KnnModel, x, k: int, metric: MetricKind) -> list[Neighbor]:
    """The k database entries nearest to x, ascending by distance.

    Exact brute-force scan over all rows; equal distances are ordered by
    ascending database index.
    """
    if not 1 <= k <= model.n:
        raise ParameterError(f"k must be in [1, {model.n}], got {k}")
    query = apply_pipeline(model, x)
    if query.ndim != 1:
        raise DimensionError(f"expected a single query vector, got shape {np.shape(x)}")
    distances = batch_distance(metric, model.database, query)
    order = np.argsort(distances, kind="stable")[:k]
    return [
        Neighbor(index=int(i), distance=float(distances[i]), label=int(model.labels[i]))
        for i in order
    ]


def classify(model: KnnModel, x, k: int, metric: MetricKind) -> Prediction:
    """Majority vote over the k nearest neighbors.

    Vote ties are broken by the smallest summed neighbor distance among the
    tied classes, then by the smallest class index.
    """
    found = neighbors(model, x, k, metric)
    n_classes = len(model.class_names)
    votes = [0] * n_classes
    dist_sums = [0.0] * n_classes
    for nb in found:
        votes[nb.label] += 1
        dist_sums[nb.label] += nb.distance
    top = max(votes)
    tied = [c for c in range(n_classes) if votes[c] == top]
    winner = min(tied, key=lambda c: (dist_sums[c], c))
    return Prediction(predicted_class=winner, votes=tuple(votes), neighbors=tuple(found))


def write_model(model: KnnModel, destination: BinaryIO) -> int:
    """Serialize a model to KNNM v1; returns the byte count."""
    out = _CountingWriter(destination)
    flags = _FLAG_HAS_PCA if model.pca is not None else 0
    out.write(KNNM_MAGIC)
    out.write(struct.pack("<II", KNNM_VERSION, flags))
    out.write(struct.pack("<I", len(model.class_names)))
    out.write(_encode_class_table(model.class_names))
    out.write(struct.pack("<I", model.raw_dim))
    out.write(model.stats.min_vals.astype("<f8").tobytes())
    out.write(model.stats.max_vals.astype("<f8").tobytes())
    if model.pca is not None:
        out.write(struct.pack("<I", model.pca.n_components))
        out.write(model.pca.mean.astype("<f8").tobytes())
        out.write(model.pca.components.astype("<f8").tobytes())
        out.write(model.pca.explained_variance_ratio.astype("<f8").tobytes())
    out.write(struct.pack("<I", model.n))
    out.write(model.labels.astype("<u2").tobytes())
    out.write(model.database.astype("<f4").tobytes())
    return out.offset


def read_model(source: BinaryIO) -> KnnModel:
    """Parse a KNNM v1 stream back into a model.

    The loaded config reports the cumulative explained variance of the kept
    components as its threshold (the original fit parameter is not stored).
    """
    reader = _CountingReader(source)
    magic = reader.read_exact(4, "magic")
    if magic != KNNM_MAGIC:
        raise FormatError("not a KNNM file")
    version, flags = struct.unpack("<II", reader.read_exact(8, "version and flags"))
    if version != KNNM_VERSION:
        raise UnsupportedVersion(f"KNNM version {version} not supported (expected {KNNM_VERSION})")
    has_pca = bool(flags & _FLAG_HAS_PCA)

    (n_classes,) = struct.unpack("<I", reader.read_exact(4, "class count"))
    if n_classes < 1:
        raise CorruptFile("class count must be >= 1", offset=reader.offset - 4)
    class_names = _read_class_table(reader, n_classes)

    (raw_dim,) = struct.unpack("<I", reader.read_exact(4, "raw dim"))
    if raw_dim < 1:
        raise CorruptFile("raw dim must be >= 1", offset=reader.offset - 4)
    min_vals = _read_f64(reader, raw_dim, "normalization minima")
    max_vals = _read_f64(reader, raw_dim, "normalization maxima")

    pca = None
    if has_pca:
        (n_components,) = struct.unpack("<I", reader.read_exact(4, "component count"))
        if not 1 <= n_components <= raw_dim:
            raise CorruptFile(f"invalid component count {n_components}", offset=reader.offset - 4)
        mean = _read_f64(reader, raw_dim, "PCA mean")
        comp_offset = reader.offset
        components = _read_f64(reader, n_components * raw_dim, "PCA components")
        ratios = _read_f64(reader, n_components, "variance ratios")
        try:
            pca = PcaTransform(
                mean=mean,
                components=components.reshape(n_components, raw_dim),
                explained_variance_ratio=ratios,
            )
        except InvalidData as exc:
            raise CorruptFile(f"invalid PCA transform: {exc}", offset=comp_offset) from exc

    (n,) = struct.unpack("<I", reader.read_exact(4, "database size"))
    if n < 1:
        raise CorruptFile("database size must be >= 1", offset=reader.offset - 4)
    labels_offset = reader.offset
    labels = np.frombuffer(reader.read_exact(2 * n, "labels"), dtype="<u2")
    bad = np.nonzero(labels >= n_classes)[0]
    if bad.size:
        raise CorruptFile(
            f"label index {int(labels[bad[0]])} out of range [0, {n_classes})",
            offset=labels_offset + 2 * int(bad[0]),
        )
    m = pca.n_components if pca is not None else raw_dim
    data_offset = reader.offset
    database = np.frombuffer(reader.read_exact(4 * n * m, "database"), dtype="<f4")
    if not np.all(np.isfinite(database)):
        raise CorruptFile("non-finite float in database", offset=data_offset)

    threshold = float(min(np.sum(pca.explained_variance_ratio), 1.0)) if pca is not None else 0.99
    try:
        stats = NormalizationStats(min_vals=min_vals, max_vals=max_vals)
        config = PipelineConfig(use_pca=has_pca, variance_threshold=threshold)
        return KnnModel(
            stats=stats,
            pca=pca,
            database=database.reshape(n, m),
            labels=labels,
            class_names=class_names,
            config=config,
        )
    except (InvalidData, ParameterError) as exc:
        raise CorruptFile(f"inconsistent model content: {exc}", offset=reader.offset) from exc


def _read_f64(reader: _CountingReader, count: int, what: str) -> np.ndarray:
    offset = reader.offset
    values = np.frombuffer(reader.read_exact(8 * count, what), dtype="<f8")
    if not np.all(np.isfinite(values)):
        raise CorruptFile(f"non-finite float in {what}", offset=offset)
    return values
