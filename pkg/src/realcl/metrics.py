"""Accuracy matrix, forgetting metrics, and multi-run aggregation.

acc(j, k) is the accuracy of the snapshot taken after training task j,
measured on the test samples of all classes seen through task k (k <= j).
All four reported metrics derive from this lower-triangular matrix:

- last task accuracy   A_K        = acc(K, K)
- average accuracy     A_Avg      = mean_k acc(k, k)
- avg global forgetting F_AvgG    = mean_k (A_{k-1} - A_k), first term 0
- avg task forgetting   F_AvgT    = mean_k (acc(k, k) - acc(k+1, k)),
                                    first term 0, last transition absent

Forgetting may be negative (later tasks improving earlier ones); values
are never clamped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dynnan
from .embedstore import EmbeddingStore


class MetricError(ValueError):
    pass


class EvaluationError(ValueError):
    pass


class AccuracyMatrix:
    """Lower-triangular accuracy matrix, 1-based (j, k) accessors."""

    def __init__(self, num_tasks: int):
        if num_tasks < 1:
            raise MetricError("need at least one task")
        self.num_tasks = num_tasks
        self._data = np.full((num_tasks, num_tasks), np.nan, dtype=np.float64)

    def set(self, j: int, k: int, value: float) -> None:
        if not (1 <= k <= j <= self.num_tasks):
            raise MetricError(f"(j={j}, k={k}) outside the lower triangle")
        if not (0.0 <= value <= 1.0):
            raise MetricError(f"accuracy {value} outside [0, 1]")
        self._data[j - 1, k - 1] = value

    def get(self, j: int, k: int) -> float:
        if not (1 <= k <= j <= self.num_tasks):
            raise MetricError(f"(j={j}, k={k}) outside the lower triangle")
        return float(self._data[j - 1, k - 1])

    def is_complete(self) -> bool:
        lower = np.tril_indices(self.num_tasks)
        return bool(np.all(np.isfinite(self._data[lower])))

    def to_lists(self) -> list:
        return [[float(self._data[j, k]) for k in range(j + 1)]
                for j in range(self.num_tasks)]

    @classmethod
    def from_lists(cls, rows: list) -> "AccuracyMatrix":
        m = cls(len(rows))
        for j, row in enumerate(rows, start=1):
            if len(row) != j:
                raise MetricError(f"row {j} must have {j} entries")
            for k, v in enumerate(row, start=1):
                m.set(j, k, v)
        return m


@dataclass(frozen=True)
class RunMetrics:
    last_task_accuracy: float
    average_accuracy: float
    avg_global_forgetting: float
    avg_task_forgetting: float
    task_accuracy: tuple = field(default=())       # A_k = acc(k, k)
    global_forgetting: tuple = field(default=())   # F_G(k), F_G(1) = 0
    task_forgetting: tuple = field(default=())     # F_T(k), F_T(1) = 0

    def scalars(self) -> dict:
        return {
            "last_task_accuracy": self.last_task_accuracy,
            "average_accuracy": self.average_accuracy,
            "avg_global_forgetting": self.avg_global_forgetting,
            "avg_task_forgetting": self.avg_task_forgetting,
        }


def evaluate_snapshot(model: dynnan.DynNanModel, store: EmbeddingStore, seen) -> float:
    """Accuracy of a model snapshot on the test samples whose label lies in
    the seen-class set. Every eligible sample counts exactly once."""
    seen = set(int(c) for c in seen)
    missing = seen - set(model.class_index_map)
    if missing:
        raise EvaluationError(f"model head lacks seen classes {sorted(missing)}")
    mask = store.test_mask() & np.isin(store.labels, sorted(seen))
    if not mask.any():
        raise EvaluationError("no test samples for the seen classes")
    preds = dynnan.predict(model, store.vectors[mask])
    return float(np.mean(preds == store.labels[mask].astype(np.int64)))


def compute_metrics(matrix: AccuracyMatrix) -> RunMetrics:
    """Derive the four reported metrics from a complete accuracy matrix."""
    if not matrix.is_complete():
        raise MetricError("accuracy matrix is incomplete")
    K = matrix.num_tasks
    a = np.array([matrix.get(k, k) for k in range(1, K + 1)])

    f_g = np.zeros(K)
    f_g[1:] = a[:-1] - a[1:]

    # F_T(k) for k >= 2 is the drop on the seen-through-(k-1) test set
    # caused by training task k; the first task has no prior to forget.
    f_t = np.zeros(K)
    for k in range(2, K + 1):
        f_t[k - 1] = matrix.get(k - 1, k - 1) - matrix.get(k, k - 1)

    return RunMetrics(
        last_task_accuracy=float(a[-1]),
        average_accuracy=float(a.mean()),
        avg_global_forgetting=float(f_g.sum() / K),
        avg_task_forgetting=float(f_t.sum() / K),
        task_accuracy=tuple(float(v) for v in a),
        global_forgetting=tuple(float(v) for v in f_g),
        task_forgetting=tuple(float(v) for v in f_t),
    )


def aggregate_runs(runs: list) -> dict:
    """Per-field mean and sample standard deviation (ddof=1; 0 for n=1)
    across runs. Series fields are aggregated elementwise."""
    if not runs:
        raise MetricError("no runs to aggregate")
    K = len(runs[0].task_accuracy)
    if any(len(r.task_accuracy) != K for r in runs):
        raise MetricError("runs have mismatched task counts")

    def stat(values):
        arr = np.asarray(values, dtype=np.float64)
        std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        return {"mean": float(arr.mean()), "std": std}

    out = {name: stat([r.scalars()[name] for r in runs])
           for name in runs[0].scalars()}
    for series in ("task_accuracy", "global_forgetting", "task_forgetting"):
        vals = np.array([getattr(r, series) for r in runs], dtype=np.float64)
        out[series] = [stat(vals[:, k]) for k in range(K)]
    return out


def format_percent(mean: float, std: float) -> str:
    """Paper-table style rendering, e.g. '89.90 ±0.18' (inputs in [0,1])."""
    return f"{100 * mean:.2f} ±{100 * std:.2f}"
