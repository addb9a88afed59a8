"""Task-stream generators for the three continual-learning regimes.

All three generators partition the training split of a store into K
disjoint tasks:

- unrealistic: balanced class-incremental; classes shuffled and split into
  near-equal groups, one group per task.
- semireal: each class assigned to a uniformly random task (resampled
  until no task is empty); group sizes are unbalanced.
- real: a uniform permutation of all training samples split into K
  near-equal contiguous chunks; classes may recur across tasks.

Generators are pure functions of (store, K, seed).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .embedstore import EmbeddingStore


class InvalidConfigurationError(ValueError):
    """Stream parameters incompatible with the store (e.g. K > classes)."""


class StreamKind(str, Enum):
    UNREALISTIC = "unrealistic"
    SEMIREAL = "semireal"
    REAL = "real"


@dataclass(frozen=True)
class TaskSpec:
    """One task: a 1-based index, its training sample ids, and the set of
    labels occurring among them."""

    index: int
    train_ids: frozenset
    label_space: frozenset


@dataclass(frozen=True)
class TaskStream:
    kind: StreamKind
    tasks: tuple
    seed: int

    @property
    def num_tasks(self) -> int:
        return len(self.tasks)


def _train_table(store: EmbeddingStore):
    mask = store.splits == 0
    ids = store.sample_ids[mask].astype(np.int64)
    labels = store.labels[mask].astype(np.int64)
    return ids, labels


def _make_task(index: int, ids, labels) -> TaskSpec:
    return TaskSpec(
        index=index,
        train_ids=frozenset(int(i) for i in ids),
        label_space=frozenset(int(l) for l in labels),
    )


def gen_unrealistic(store: EmbeddingStore, K: int, seed: int) -> TaskStream:
    """Balanced class-incremental stream: disjoint class groups whose sizes
    differ by at most one."""
    ids, labels = _train_table(store)
    classes = np.unique(labels)
    if K < 1:
        raise InvalidConfigurationError("K must be >= 1")
    if len(classes) < K:
        raise InvalidConfigurationError(
            f"{len(classes)} classes cannot fill {K} tasks"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(classes)
    groups = np.array_split(perm, K)  # sizes differ by <= 1, big groups first
    tasks = []
    for k, group in enumerate(groups, start=1):
        mask = np.isin(labels, group)
        tasks.append(_make_task(k, ids[mask], labels[mask]))
    return TaskStream(kind=StreamKind.UNREALISTIC, tasks=tuple(tasks), seed=seed)


def gen_semireal(store: EmbeddingStore, K: int, seed: int) -> TaskStream:
    """Class-incremental stream with a uniformly random class-to-task
    assignment, resampled until every task holds at least one class."""
    ids, labels = _train_table(store)
    classes = np.unique(labels)
    if K < 1:
        raise InvalidConfigurationError("K must be >= 1")
    if len(classes) < K:
        raise InvalidConfigurationError(
            f"{len(classes)} classes cannot fill {K} tasks"
        )
    rng = np.random.default_rng(seed)
    while True:
        assignment = rng.integers(0, K, size=len(classes))
        if len(np.unique(assignment)) == K:
            break
    tasks = []
    for k in range(1, K + 1):
        group = classes[assignment == k - 1]
        mask = np.isin(labels, group)
        tasks.append(_make_task(k, ids[mask], labels[mask]))
    return TaskStream(kind=StreamKind.SEMIREAL, tasks=tuple(tasks), seed=seed)


def gen_realcl(store: EmbeddingStore, K: int, seed: int) -> TaskStream:
    """Fully random stream: a seeded permutation of all training samples,
    split into K contiguous chunks whose sizes differ by at most one.
    Label spaces are whatever lands in each chunk."""
    ids, labels = _train_table(store)
    if K < 1:
        raise InvalidConfigurationError("K must be >= 1")
    if len(ids) < K:
        raise InvalidConfigurationError(f"{len(ids)} samples cannot fill {K} tasks")
    rng = np.random.default_rng(seed)
    order = np.argsort(ids)  # canonical order, independent of store layout
    perm = rng.permutation(len(ids))
    shuffled = order[perm]
    tasks = []
    for k, chunk in enumerate(np.array_split(shuffled, K), start=1):
        tasks.append(_make_task(k, ids[chunk], labels[chunk]))
    return TaskStream(kind=StreamKind.REAL, tasks=tuple(tasks), seed=seed)


GENERATORS = {
    StreamKind.UNREALISTIC: gen_unrealistic,
    StreamKind.SEMIREAL: gen_semireal,
    StreamKind.REAL: gen_realcl,
}


def seen_classes(stream: TaskStream) -> list:
    """Cumulative label-space unions, one frozenset per task."""
    out = []
    acc: frozenset = frozenset()
    for task in stream.tasks:
        acc = acc | task.label_space
        out.append(acc)
    return out


def stream_manifest(stream: TaskStream) -> dict:
    """JSON-serializable manifest from which a run is fully reproducible."""
    return {
        "kind": stream.kind.value,
        "num_tasks": stream.num_tasks,
        "seed": stream.seed,
        "tasks": [sorted(t.train_ids) for t in stream.tasks],
    }


def manifest_hash(stream: TaskStream) -> str:
    doc = json.dumps(stream_manifest(stream), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(doc.encode("utf-8")).hexdigest()
