"""Embedding stores: the CLEB-v1 binary format and a synthetic generator.

A store is an immutable table of (sample_id, split, label, vector) rows
plus the ordered class-name list. Vectors are 32-bit floats, little-endian
on disk. The synthetic generator draws class means uniformly on a sphere
and adds isotropic Gaussian noise, so tests can run without any real
dataset or encoder.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

MAGIC = b"CLEB"
VERSION = 1
HEADER_SIZE = 20  # magic(4) + version(4) + dim(4) + num_classes(4) + count(4)


class StoreError(Exception):
    """Base class for embedding-store failures."""


class FormatError(StoreError):
    """The byte stream does not start with the CLEB magic."""


class UnsupportedVersionError(StoreError):
    """The file declares a version this reader does not understand."""


class CorruptFileError(StoreError):
    """The stream ended before the declared content was read."""


class DataError(StoreError):
    """The content violates a store invariant (labels, ids, finiteness)."""


class Split(IntEnum):
    TRAIN = 0
    TEST = 1


def _record_dtype(dim: int) -> np.dtype:
    # Packed (unaligned) layout matches the wire format exactly.
    return np.dtype(
        [
            ("sample_id", "<u4"),
            ("split", "u1"),
            ("label", "<u2"),
            ("vector", "<f4", (dim,)),
        ]
    )


@dataclass(frozen=True)
class EmbeddingRecord:
    sample_id: int
    split: Split
    label: int
    vector: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, EmbeddingRecord):
            return NotImplemented
        return (
            self.sample_id == other.sample_id
            and self.split == other.split
            and self.label == other.label
            and self.vector.tobytes() == other.vector.tobytes()
        )


class EmbeddingStore:
    """Immutable columnar table of embedding records.

    Arrays are marked read-only after construction; the store is safe to
    share across threads.
    """

    def __init__(
        self,
        dim: int,
        class_names: tuple[str, ...] | list[str],
        sample_ids: np.ndarray,
        splits: np.ndarray,
        labels: np.ndarray,
        vectors: np.ndarray,
    ):
        self.dim = int(dim)
        self.class_names = tuple(class_names)
        self.sample_ids = np.ascontiguousarray(sample_ids, dtype=np.uint32)
        self.splits = np.ascontiguousarray(splits, dtype=np.uint8)
        self.labels = np.ascontiguousarray(labels, dtype=np.uint16)
        self.vectors = np.ascontiguousarray(vectors, dtype=np.float32)
        self._validate()
        for a in (self.sample_ids, self.splits, self.labels, self.vectors):
            a.flags.writeable = False
        self._row_of = {int(s): i for i, s in enumerate(self.sample_ids)}

    def _validate(self) -> None:
        n = len(self.sample_ids)
        if not (len(self.splits) == len(self.labels) == len(self.vectors) == n):
            raise DataError("column lengths disagree")
        if self.vectors.shape != (n, self.dim):
            raise DataError(
                f"vectors have shape {self.vectors.shape}, expected ({n}, {self.dim})"
            )
        if n > 0:
            if self.labels.max(initial=0) >= len(self.class_names):
                raise DataError("label index out of range of class names")
            if not np.all((self.splits == Split.TRAIN) | (self.splits == Split.TEST)):
                raise DataError("split values must be 0 (train) or 1 (test)")
            if len(np.unique(self.sample_ids)) != n:
                raise DataError("duplicate sample ids")
            if not np.all(np.isfinite(self.vectors)):
                raise DataError("non-finite vector component")

    def __len__(self) -> int:
        return len(self.sample_ids)

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def __eq__(self, other):
        if not isinstance(other, EmbeddingStore):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.class_names == other.class_names
            and np.array_equal(self.sample_ids, other.sample_ids)
            and np.array_equal(self.splits, other.splits)
            and np.array_equal(self.labels, other.labels)
            and self.vectors.tobytes() == other.vectors.tobytes()
        )

    def record(self, i: int) -> EmbeddingRecord:
        return EmbeddingRecord(
            sample_id=int(self.sample_ids[i]),
            split=Split(int(self.splits[i])),
            label=int(self.labels[i]),
            vector=self.vectors[i],
        )

    def row_of(self, sample_id: int) -> int:
        """Row index of a sample id; raises DataError if absent."""
        try:
            return self._row_of[int(sample_id)]
        except KeyError:
            raise DataError(f"sample id {sample_id} not in store") from None

    def has_sample(self, sample_id: int) -> bool:
        return int(sample_id) in self._row_of

    def label_of(self, sample_id: int) -> int:
        return int(self.labels[self.row_of(sample_id)])

    def vector_of(self, sample_id: int) -> np.ndarray:
        return self.vectors[self.row_of(sample_id)]

    def rows_of(self, sample_ids) -> np.ndarray:
        return np.array([self.row_of(s) for s in sample_ids], dtype=np.int64)

    def train_ids(self) -> np.ndarray:
        return self.sample_ids[self.splits == Split.TRAIN].astype(np.int64)

    def test_mask(self) -> np.ndarray:
        return self.splits == Split.TEST


def write_store(store: EmbeddingStore, sink) -> int:
    """Serialize a store to a binary sink in CLEB-v1 format.

    Returns the number of bytes written. Output is byte-exact for a
    given store.
    """
    n = len(store)
    written = 0
    header = struct.pack(
        "<4sIIII", MAGIC, VERSION, store.dim, store.num_classes, n
    )
    sink.write(header)
    written += len(header)
    for name in store.class_names:
        raw = name.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise DataError(f"class name longer than 65535 bytes: {name[:32]}...")
        sink.write(struct.pack("<H", len(raw)))
        sink.write(raw)
        written += 2 + len(raw)
    recs = np.empty(n, dtype=_record_dtype(store.dim))
    recs["sample_id"] = store.sample_ids
    recs["split"] = store.splits
    recs["label"] = store.labels
    recs["vector"] = store.vectors
    body = recs.tobytes()
    sink.write(body)
    written += len(body)
    return written


def _read_exact(source, n: int, what: str) -> bytes:
    buf = source.read(n)
    if buf is None or len(buf) < n:
        raise CorruptFileError(f"truncated file while reading {what}")
    return buf


def read_store(source) -> EmbeddingStore:
    """Parse a CLEB-v1 byte stream into an EmbeddingStore.

    Raises FormatError on bad magic, UnsupportedVersionError on an unknown
    version, CorruptFileError on truncation, DataError on invariant
    violations in the decoded content.
    """
    header = source.read(HEADER_SIZE)
    if header is None or len(header) < 4 or header[:4] != MAGIC:
        raise FormatError("not a CLEB file (bad magic)")
    if len(header) < HEADER_SIZE:
        raise CorruptFileError("truncated header")
    _, version, dim, num_classes, count = struct.unpack("<4sIIII", header)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported CLEB version {version}")
    names = []
    for _ in range(num_classes):
        (length,) = struct.unpack("<H", _read_exact(source, 2, "class-name length"))
        raw = _read_exact(source, length, "class name")
        names.append(raw.decode("utf-8"))
    dtype = _record_dtype(dim)
    body = _read_exact(source, count * dtype.itemsize, "records")
    recs = np.frombuffer(body, dtype=dtype)
    return EmbeddingStore(
        dim=dim,
        class_names=tuple(names),
        sample_ids=recs["sample_id"],
        splits=recs["split"],
        labels=recs["label"],
        vectors=recs["vector"],
    )


def save_store(store: EmbeddingStore, path) -> int:
    with open(path, "wb") as f:
        return write_store(store, f)


def load_store(path) -> EmbeddingStore:
    with open(path, "rb") as f:
        return read_store(f)


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for the seeded synthetic store generator."""

    num_classes: int
    dim: int
    train_per_class: int
    test_per_class: int
    mean_radius: float = 10.0
    noise_sigma: float = 1.0
    seed: int = 0


def generate_synthetic(spec: SynthSpec) -> EmbeddingStore:
    """Seeded Gaussian-blob store: one blob per class.

    Class means are i.i.d. uniform on the sphere of radius mean_radius;
    each sample is its class mean plus N(0, noise_sigma^2 I). Uses numpy's
    PCG64 generator (np.random.default_rng) seeded with spec.seed, so the
    output is a pure function of the spec. Records are laid out class by
    class, train samples then test samples, with sequential sample ids.
    """
    if spec.num_classes <= 0 or spec.dim <= 0:
        raise ValueError("num_classes and dim must be positive")
    if spec.train_per_class <= 0 or spec.test_per_class <= 0:
        raise ValueError("per-class counts must be positive")
    if spec.mean_radius <= 0 or spec.noise_sigma <= 0:
        raise ValueError("mean_radius and noise_sigma must be positive")
    rng = np.random.default_rng(spec.seed)
    means = rng.standard_normal((spec.num_classes, spec.dim))
    means *= spec.mean_radius / np.linalg.norm(means, axis=1, keepdims=True)

    per_class = spec.train_per_class + spec.test_per_class
    n = spec.num_classes * per_class
    vectors = np.empty((n, spec.dim), dtype=np.float32)
    labels = np.empty(n, dtype=np.uint16)
    splits = np.empty(n, dtype=np.uint8)
    row = 0
    for c in range(spec.num_classes):
        noise = rng.standard_normal((per_class, spec.dim)) * spec.noise_sigma
        vectors[row : row + per_class] = (means[c] + noise).astype(np.float32)
        labels[row : row + per_class] = c
        splits[row : row + spec.train_per_class] = Split.TRAIN
        splits[row + spec.train_per_class : row + per_class] = Split.TEST
        row += per_class
    return EmbeddingStore(
        dim=spec.dim,
        class_names=tuple(f"class_{c}" for c in range(spec.num_classes)),
        sample_ids=np.arange(n, dtype=np.uint32),
        splits=splits,
        labels=labels,
        vectors=vectors,
    )
