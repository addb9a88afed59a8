"""Capacity-bounded rehearsal buffer.

The buffer is the only training data the model ever sees. Each task update
recomputes class-balanced quotas over all classes present in the buffer or
the incoming task, then refills each class slot either uniformly at random
(RandomBalanced) or with herding selection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .embedstore import DataError, EmbeddingStore
from .scenario import TaskSpec


class QuotaError(ValueError):
    """Herding asked for more samples than are available."""


class MemoryPolicy(str, Enum):
    RANDOM_BALANCED = "random"
    HERDING = "herding"


@dataclass(frozen=True)
class MemoryBuffer:
    capacity: int
    entries: tuple = ()  # (sample_id, label) pairs
    policy: MemoryPolicy = MemoryPolicy.RANDOM_BALANCED

    def __len__(self) -> int:
        return len(self.entries)

    def classes(self) -> set:
        return {label for _, label in self.entries}


def allocate_quotas(available: dict, capacity: int) -> dict:
    """Class-balanced quota split of `capacity` slots.

    Base quota is capacity // num_classes; the remainder goes one slot at a
    time to the classes with the most available samples (ties broken by
    lowest class index). Quotas are then capped at availability and the
    slack re-granted by the same most-available-first rule, so the total
    equals min(capacity, total available).
    """
    classes = sorted(available)
    if not classes:
        return {}
    by_avail = sorted(classes, key=lambda c: (-available[c], c))
    base, rem = divmod(capacity, len(classes))
    quotas = {c: base for c in classes}
    for c in by_avail[:rem]:
        quotas[c] += 1
    slack = 0
    for c in classes:
        if quotas[c] > available[c]:
            slack += quotas[c] - available[c]
            quotas[c] = available[c]
    for c in by_avail:
        if slack == 0:
            break
        grant = min(slack, available[c] - quotas[c])
        quotas[c] += grant
        slack -= grant
    return quotas


def herding_select(class_vectors: list, m: int) -> list:
    """Greedy herding: pick samples keeping the running mean of the
    selection closest to the class mean.

    `class_vectors` is a list of (sample_id, vector). Returns m sample ids
    in selection order; exact ties go to the lowest sample id.
    """
    if m > len(class_vectors):
        raise QuotaError(f"quota {m} exceeds {len(class_vectors)} available samples")
    ordered = sorted(class_vectors, key=lambda sv: sv[0])
    ids = np.array([sv[0] for sv in ordered], dtype=np.int64)
    vecs = np.array([np.asarray(sv[1], dtype=np.float64) for sv in ordered])
    mu = vecs.mean(axis=0)
    selected: list = []
    running = np.zeros_like(mu)
    remaining = np.ones(len(ids), dtype=bool)
    for t in range(1, m + 1):
        cand_means = (running + vecs) / t
        dists = np.linalg.norm(mu - cand_means, axis=1)
        dists[~remaining] = np.inf
        pick = int(np.argmin(dists))  # argmin takes the first, i.e. lowest id
        selected.append(int(ids[pick]))
        running += vecs[pick]
        remaining[pick] = False
    return selected


def update(
    buffer: MemoryBuffer,
    task: TaskSpec,
    store: EmbeddingStore,
    rng: np.random.Generator,
) -> MemoryBuffer:
    """Fold one task into the buffer under its selection policy.

    Candidates for each class are the union of current buffer entries and
    the task's samples of that class; quotas are recomputed over all
    classes seen so far, so old classes shrink as new ones arrive.
    """
    candidates: dict = {}
    for sid, label in buffer.entries:
        candidates.setdefault(label, set()).add(sid)
    for sid in task.train_ids:
        if not store.has_sample(sid):
            raise DataError(f"task references sample id {sid} absent from store")
        candidates.setdefault(store.label_of(sid), set()).add(sid)

    available = {c: len(ids) for c, ids in candidates.items()}
    quotas = allocate_quotas(available, buffer.capacity)
    entries = []
    for c in sorted(candidates):
        pool = sorted(candidates[c])
        q = quotas[c]
        if buffer.policy is MemoryPolicy.HERDING:
            vecs = [(sid, store.vector_of(sid)) for sid in pool]
            chosen = herding_select(vecs, q)
        else:
            chosen = [pool[i] for i in rng.choice(len(pool), size=q, replace=False)]
        entries.extend((sid, c) for sid in chosen)
    return MemoryBuffer(
        capacity=buffer.capacity, entries=tuple(entries), policy=buffer.policy
    )


def as_training_set(buffer: MemoryBuffer, store: EmbeddingStore):
    """Materialize buffer embeddings as (vectors, labels) arrays.

    Order follows the buffer; per-epoch shuffling is the trainer's job.
    """
    if not buffer.entries:
        return (
            np.empty((0, store.dim), dtype=np.float32),
            np.empty(0, dtype=np.int64),
        )
    rows = store.rows_of([sid for sid, _ in buffer.entries])
    vectors = store.vectors[rows]
    labels = np.array([label for _, label in buffer.entries], dtype=np.int64)
    stored = store.labels[rows].astype(np.int64)
    if not np.array_equal(labels, stored):
        raise DataError("buffer labels disagree with store labels")
    return vectors, labels


def buffer_snapshot(buffer: MemoryBuffer, task_of: dict | None = None) -> list:
    """Sorted (task, sample_id, label) triples for the audit manifest."""
    rows = []
    for sid, label in buffer.entries:
        task = task_of.get(sid, -1) if task_of else -1
        rows.append((task, sid, label))
    return sorted(rows)
