"""Labeled feature-vector containers, the FSET binary format, and stratified splits.

FSET binary format, version 1, all integers little-endian:

* bytes 0-3   magic ``FSET``
* bytes 4-7   u32 version (= 1)
* bytes 8-11  u32 n_vectors
* bytes 12-15 u32 dim
* bytes 16-19 u32 n_classes
* class table n_classes entries of (u16 byte length + UTF-8 bytes)
* labels      n_vectors x u16 class index
* data        n_vectors x dim x f32, row-major
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable, TextIO

import numpy as np

from .errors import (
    CorruptFile,
    FormatError,
    InsufficientData,
    InvalidData,
    UnsupportedVersion,
    WriteError,
)

__all__ = [
    "FeatureSet",
    "SplitSpec",
    "write_fset",
    "read_fset",
    "import_csv",
    "export_csv",
    "stratified_split",
]

FSET_MAGIC = b"FSET"
FSET_VERSION = 1
_MAX_CLASSES = 1 << 16  # u16 label indices


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """Immutable labeled matrix of feature vectors with a class vocabulary.

    ``vectors`` is coerced to a C-contiguous float32 matrix (the storage
    precision of the FSET format), ``labels`` to uint16 and ``class_names``
    to a tuple. All invariants are checked on construction.
    """

    vectors: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if vectors is self.vectors:
            vectors = vectors.copy()
        if vectors.ndim != 2:
            raise InvalidData(f"vectors must be a 2-D matrix, got shape {vectors.shape}")
        if vectors.shape[1] < 1:
            raise InvalidData(f"vectors must have dimension >= 1, got shape {vectors.shape}")
        # zero rows are tolerated in memory (a split with per_class_test=0
        # produces one); the FSET format itself requires n_vectors >= 1
        if not np.all(np.isfinite(vectors)):
            raise InvalidData("vectors contain non-finite entries")

        names = tuple(self.class_names)
        if len(names) == 0:
            raise InvalidData("class_names must not be empty")
        if len(names) > _MAX_CLASSES:
            raise InvalidData(f"at most {_MAX_CLASSES} classes supported, got {len(names)}")
        if any(not isinstance(n, str) or n == "" for n in names):
            raise InvalidData("class names must be non-empty strings")
        if len(set(names)) != len(names):
            raise InvalidData("class names must be unique")

        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != vectors.shape[0]:
            raise InvalidData(f"expected {vectors.shape[0]} labels, got shape {labels.shape}")
        if labels.dtype.kind not in "iu":
            raise InvalidData(f"labels must be integers, got dtype {labels.dtype}")
        if labels.size and (labels.min() < 0 or labels.max() >= len(names)):
            raise InvalidData(f"label indices must be in [0, {len(names)})")
        labels = labels.astype(np.uint16)

        vectors.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", names)

    @property
    def n_vectors(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def __eq__(self, other) -> bool:
        """Bit-exact equality, including float payload bits."""
        if not isinstance(other, FeatureSet):
            return NotImplemented
        return (
            self.class_names == other.class_names
            and self.vectors.shape == other.vectors.shape
            and self.labels.tobytes() == other.labels.tobytes()
            and self.vectors.tobytes() == other.vectors.tobytes()
        )


@dataclass(frozen=True)
class SplitSpec:
    """Per-class sample counts and the seed for a stratified split."""

    per_class_train: int
    per_class_test: int
    seed: int

    def __post_init__(self):
        if self.per_class_train < 1:
            raise InvalidData("per_class_train must be >= 1")
        if self.per_class_test < 0:
            raise InvalidData("per_class_test must be >= 0")
        if not 0 <= self.seed < (1 << 64):
            raise InvalidData("seed must be an unsigned 64-bit integer")


class _CountingWriter:
    """Wraps a byte sink, tracking the offset for error reports."""

    def __init__(self, sink: BinaryIO):
        self.sink = sink
        self.offset = 0

    def write(self, data: bytes) -> None:
        try:
            self.sink.write(data)
        except OSError as exc:
            raise WriteError(f"write failed: {exc}", offset=self.offset) from exc
        self.offset += len(data)


def write_fset(fset: FeatureSet, destination: BinaryIO) -> int:
    """Serialize ``fset`` to ``destination`` in FSET v1 format.

    Returns the number of bytes written. Vector values are stored as
    little-endian IEEE-754 float32, so a read-back is bit-identical.
    """
    if fset.n_vectors < 1:
        raise InvalidData("cannot serialize an empty FeatureSet")
    out = _CountingWriter(destination)
    out.write(FSET_MAGIC)
    out.write(struct.pack("<IIII", FSET_VERSION, fset.n_vectors, fset.dim, fset.n_classes))
    out.write(_encode_class_table(fset.class_names))
    out.write(fset.labels.astype("<u2").tobytes())
    out.write(fset.vectors.astype("<f4").tobytes())
    return out.offset


def _encode_class_table(class_names: Iterable[str]) -> bytes:
    parts = []
    for name in class_names:
        raw = name.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise InvalidData(f"class name too long ({len(raw)} bytes)")
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
    return b"".join(parts)


class _CountingReader:
    """Wraps a byte source; every short read raises CorruptFile with the offset."""

    def __init__(self, source: BinaryIO):
        self.source = source
        self.offset = 0

    def read_exact(self, count: int, what: str) -> bytes:
        data = self.source.read(count)
        if len(data) != count:
            raise CorruptFile(f"truncated stream while reading {what}", offset=self.offset + len(data))
        self.offset += count
        return data


def read_fset(source: BinaryIO) -> FeatureSet:
    """Parse an FSET v1 stream into a validated FeatureSet."""
    reader = _CountingReader(source)
    magic = reader.read_exact(4, "magic")
    if magic != FSET_MAGIC:
        raise FormatError("not an FSET file")
    (version,) = struct.unpack("<I", reader.read_exact(4, "version"))
    if version != FSET_VERSION:
        raise UnsupportedVersion(f"FSET version {version} not supported (expected {FSET_VERSION})")
    n_vectors, dim, n_classes = struct.unpack("<III", reader.read_exact(12, "header counts"))
    if n_vectors < 1 or dim < 1:
        raise CorruptFile(f"invalid counts: n_vectors={n_vectors}, dim={dim}", offset=8)
    if not 1 <= n_classes <= _MAX_CLASSES:
        raise CorruptFile(f"invalid class count {n_classes}", offset=16)

    class_names = _read_class_table(reader, n_classes)
    labels_offset = reader.offset
    labels = np.frombuffer(reader.read_exact(2 * n_vectors, "labels"), dtype="<u2")
    bad = np.nonzero(labels >= n_classes)[0]
    if bad.size:
        raise CorruptFile(
            f"label index {int(labels[bad[0]])} out of range [0, {n_classes})",
            offset=labels_offset + 2 * int(bad[0]),
        )
    data_offset = reader.offset
    data = np.frombuffer(reader.read_exact(4 * n_vectors * dim, "vector data"), dtype="<f4")
    finite = np.isfinite(data)
    if not finite.all():
        first_bad = int(np.nonzero(~finite)[0][0])
        raise CorruptFile("non-finite float in vector data", offset=data_offset + 4 * first_bad)
    return FeatureSet(
        vectors=data.reshape(n_vectors, dim),
        labels=labels,
        class_names=class_names,
    )


def _read_class_table(reader: _CountingReader, n_classes: int) -> tuple[str, ...]:
    names = []
    for i in range(n_classes):
        entry_offset = reader.offset
        (length,) = struct.unpack("<H", reader.read_exact(2, f"class {i} length"))
        raw = reader.read_exact(length, f"class {i} name")
        try:
            name = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptFile(f"class {i} name is not valid UTF-8", offset=entry_offset + 2) from exc
        if name == "":
            raise CorruptFile(f"class {i} name is empty", offset=entry_offset)
        if name in names:
            raise CorruptFile(f"duplicate class name {name!r}", offset=entry_offset)
        names.append(name)
    return tuple(names)


def import_csv(source: TextIO) -> FeatureSet:
    """Parse ``label,f0,f1,...`` CSV into a FeatureSet.

    Class names are ordered by first appearance; values are parsed as
    decimal reals and rounded to the nearest representable float32.
    """
    rows = csv.reader(source)
    try:
        header = next(rows)
    except StopIteration:
        raise FormatError("empty input: missing header row") from None
    if len(header) < 2 or header[0].strip().lower() != "label":
        raise FormatError("expected header 'label,f0,f1,...'", line=1)
    dim = len(header) - 1

    class_names: list[str] = []
    class_index: dict[str, int] = {}
    labels: list[int] = []
    vectors: list[list[float]] = []
    for line_no, row in enumerate(rows, start=2):
        if len(row) == 0:
            continue  # blank line
        if len(row) != dim + 1:
            raise FormatError(f"expected {dim + 1} fields, got {len(row)}", line=line_no)
        name = row[0]
        if name == "":
            raise FormatError("empty label", line=line_no, column=1)
        if name not in class_index:
            class_index[name] = len(class_names)
            class_names.append(name)
        labels.append(class_index[name])
        values = []
        for col, cell in enumerate(row[1:], start=2):
            try:
                values.append(float(cell))
            except ValueError:
                raise FormatError(f"unparseable number {cell!r}", line=line_no, column=col) from None
        vectors.append(values)

    if not vectors:
        raise FormatError("no vectors")
    matrix = np.array(vectors, dtype=np.float64).astype(np.float32)
    return FeatureSet(vectors=matrix, labels=np.array(labels), class_names=tuple(class_names))


def export_csv(fset: FeatureSet, destination: TextIO) -> None:
    """Write ``fset`` as ``label,f0,f1,...`` CSV.

    Values are printed with repr-level precision, so import_csv(export_csv(s))
    reproduces the float32 payload exactly.
    """
    writer = csv.writer(destination, lineterminator="\n")
    writer.writerow(["label"] + [f"f{j}" for j in range(fset.dim)])
    for i in range(fset.n_vectors):
        row = [fset.class_names[fset.labels[i]]]
        row.extend(repr(float(v)) for v in fset.vectors[i])
        writer.writerow(row)


_MASK64 = (1 << 64) - 1


def _splitmix64(seed: int):
    """Infinite stream of 64-bit values from the splitmix64 mixing PRNG."""
    state = seed & _MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def _fisher_yates(items: list[int], stream) -> None:
    # backward Fisher-Yates; j drawn as next_u64 mod (i + 1)
    for i in range(len(items) - 1, 0, -1):
        j = next(stream) % (i + 1)
        items[i], items[j] = items[j], items[i]


def stratified_split(fset: FeatureSet, spec: SplitSpec) -> tuple[FeatureSet, FeatureSet]:
    """Split into disjoint train/test sets with exact per-class counts.

    The selection is a pure function of (fset, spec): one splitmix64 stream
    is seeded with ``spec.seed``, classes are visited in class-index order,
    each class's member indices (ascending) are shuffled with a backward
    Fisher-Yates using that stream, and the first ``per_class_train`` go to
    train, the next ``per_class_test`` to test. Output rows keep their
    original relative order; class_names are preserved in both outputs.
    """
    stream = _splitmix64(spec.seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    needed = spec.per_class_train + spec.per_class_test
    for c, name in enumerate(fset.class_names):
        members = np.nonzero(fset.labels == c)[0].tolist()
        if len(members) < needed:
            raise InsufficientData(
                f"class {name!r} has {len(members)} members, need {needed} "
                f"({spec.per_class_train} train + {spec.per_class_test} test)"
            )
        _fisher_yates(members, stream)
        train_idx.extend(members[: spec.per_class_train])
        test_idx.extend(members[spec.per_class_train : needed])
    train_idx.sort()
    test_idx.sort()
    return _take(fset, train_idx), _take(fset, test_idx)


def _take(fset: FeatureSet, indices: list[int]) -> FeatureSet:
    idx = np.array(indices, dtype=np.intp)
    return FeatureSet(
        vectors=fset.vectors[idx],
        labels=fset.labels[idx],
        class_names=fset.class_names,
    )
