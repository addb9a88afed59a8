"""Extraction pipeline: dataset -> frozen encoder -> CLEB-v1 store.

Records are written in (split, sample_id) order with sequential ids —
train block first — so a given (dataset, encoder) pair always produces
byte-identical output. Every written file is read back and re-checked
against the store invariants before extract returns.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from realcl.embedstore import EmbeddingStore, load_store, save_store

from .datasets import DatasetSplits, get_dataset
from .encoders import get_encoder

KNOWN_WIDTHS = {"vitb32": 512}


class ExtractError(RuntimeError):
    """Extraction failed: missing inputs or inconsistent encoder output."""


@dataclass(frozen=True)
class ExtractSpec:
    dataset: str
    out: str
    encoder: str = "vitb32"
    batch_size: int = 256
    data_root: str = "data/raw"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ExtractError("batch_size must be >= 1")


def _encode_split(encoder, images, batch_size: int) -> np.ndarray:
    chunks = []
    for start in range(0, len(images), batch_size):
        batch = images[start:start + batch_size]
        vectors = np.asarray(encoder.encode(batch), dtype=np.float32)
        if vectors.shape != (len(batch), encoder.dim):
            raise ExtractError(
                f"encoder returned shape {vectors.shape}, expected "
                f"({len(batch)}, {encoder.dim})")
        chunks.append(vectors)
    if not chunks:
        return np.zeros((0, encoder.dim), dtype=np.float32)
    return np.concatenate(chunks, axis=0)


def extract(spec: ExtractSpec, dataset: DatasetSplits | None = None,
            encoder=None) -> EmbeddingStore:
    """Encode a dataset and write the store to spec.out.

    `dataset` and `encoder` default to registry lookups by name; pass
    objects directly to run offline or under test.
    """
    if dataset is None:
        dataset = get_dataset(spec.dataset, spec.data_root)
    if encoder is None:
        encoder = get_encoder(spec.encoder)

    expected = KNOWN_WIDTHS.get(spec.encoder)
    if expected is not None and encoder.dim != expected:
        raise ExtractError(
            f"encoder {spec.encoder!r} declares dim {encoder.dim}, "
            f"expected {expected}")

    train = _encode_split(encoder, dataset.train_images, spec.batch_size)
    test = _encode_split(encoder, dataset.test_images, spec.batch_size)

    n_train, n_test = len(train), len(test)
    store = EmbeddingStore(
        dim=encoder.dim,
        class_names=dataset.class_names,
        sample_ids=np.arange(n_train + n_test, dtype=np.uint32),
        splits=np.concatenate([np.zeros(n_train, dtype=np.uint8),
                               np.ones(n_test, dtype=np.uint8)]),
        labels=np.asarray(list(dataset.train_labels) + list(dataset.test_labels),
                          dtype=np.uint16),
        vectors=np.concatenate([train, test], axis=0),
    )
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_store(store, out)
    reread = load_store(out)
    if reread != store:
        raise ExtractError(f"verification failed: {out} did not round-trip")
    return store


def sanity_report(path) -> str:
    """Human-readable health check of a store: split and per-class
    counts, vector-norm statistics, and a sampled check that same-class
    vectors are more cosine-similar than cross-class ones."""
    store = load_store(path)
    lines = [
        f"store: {path}",
        f"dim {store.dim}, {store.num_classes} classes, {len(store)} records "
        f"({int((store.splits == 0).sum())} train / {int((store.splits == 1).sum())} test)",
    ]
    lines.append("per-class counts (train/test):")
    missing = []
    for c, name in enumerate(store.class_names):
        n_train = int(((store.labels == c) & (store.splits == 0)).sum())
        n_test = int(((store.labels == c) & (store.splits == 1)).sum())
        flag = ""
        if n_train == 0 or n_test == 0:
            missing.append(name)
            flag = "   <-- MISSING"
        lines.append(f"  {name:24s} {n_train:6d} / {n_test:5d}{flag}")
    if missing:
        lines.append(f"WARNING: {len(missing)} class(es) with an empty split: "
                     + ", ".join(missing))

    norms = np.linalg.norm(store.vectors, axis=1)
    lines.append(f"vector norms: min {norms.min():.3f}, mean {norms.mean():.3f}, "
                 f"max {norms.max():.3f}")

    rng = np.random.default_rng(0)
    idx = rng.choice(len(store), size=min(100, len(store)), replace=False)
    unit = store.vectors / np.maximum(norms[:, None], 1e-12)
    sims = unit[idx] @ unit.T
    same_vals, cross_vals = [], []
    for row, i in enumerate(idx):
        mask = np.ones(len(store), dtype=bool)
        mask[i] = False
        same = mask & (store.labels == store.labels[i])
        cross = mask & (store.labels != store.labels[i])
        if same.any():
            same_vals.append(sims[row][same].mean())
        if cross.any():
            cross_vals.append(sims[row][cross].mean())
    same_mean = float(np.mean(same_vals)) if same_vals else float("nan")
    cross_mean = float(np.mean(cross_vals)) if cross_vals else float("nan")
    verdict = "OK" if same_mean > cross_mean else "SUSPECT"
    lines.append(
        f"cosine similarity ({len(idx)} probes): same-class {same_mean:.4f}, "
        f"cross-class {cross_mean:.4f} -> {verdict}")
    return "\n".join(lines)
