"""Experiment orchestration: store -> stream -> per-task train/eval loop ->
metrics -> JSON/CSV reports, over multiple seeds.

Each seed is an independent, fully deterministic run; artifacts are stamped
with the config hash, the stream-manifest hash, and the seed. Timestamps
live in their own field and never enter any hash.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dynnan, memory, metrics, optim, scenario
from .embedstore import EmbeddingStore, load_store
from .memory import MemoryBuffer, MemoryPolicy
from .metrics import AccuracyMatrix, RunMetrics
from .optim import OptimConfig, Strategy
from .scenario import GENERATORS, StreamKind, TaskStream

DEFAULT_SEEDS = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class RunConfig:
    store_path: str
    scenario: StreamKind = StreamKind.REAL
    num_tasks: int = 5
    memory_capacity: int = 1000
    memory_policy: MemoryPolicy = MemoryPolicy.RANDOM_BALANCED
    strategy: Strategy = Strategy.SCRATCH
    optim: OptimConfig = field(default_factory=OptimConfig)
    seeds: tuple = DEFAULT_SEEDS
    output_dir: str = "results"

    def __post_init__(self):
        if self.num_tasks < 1 or self.memory_capacity < 1 or not self.seeds:
            raise ValueError("need num_tasks >= 1, memory_capacity >= 1, seeds")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["scenario"] = self.scenario.value
        d["memory_policy"] = self.memory_policy.value
        d["strategy"] = self.strategy.value
        d["seeds"] = list(self.seeds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if "optim" in d and isinstance(d["optim"], dict):
            d["optim"] = OptimConfig(**d["optim"])
        if "scenario" in d:
            d["scenario"] = StreamKind(d["scenario"])
        if "memory_policy" in d:
            d["memory_policy"] = MemoryPolicy(d["memory_policy"])
        if "strategy" in d:
            d["strategy"] = Strategy(d["strategy"])
        if "seeds" in d:
            d["seeds"] = tuple(d["seeds"])
        return cls(**d)


def config_hash(config: RunConfig) -> str:
    doc = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(doc.encode("utf-8")).hexdigest()


def validate_stream(stream: TaskStream, store: EmbeddingStore) -> list:
    """Check stream invariants; returns a list of violation strings
    (empty when the stream is a valid partition of the training split).

    All kinds must partition the split into non-empty disjoint tasks;
    unrealistic and semireal must additionally have disjoint label spaces,
    and unrealistic must have class-group sizes differing by at most one.
    """
    violations = []
    train = set(int(i) for i in store.train_ids())
    union: set = set()
    for task in stream.tasks:
        if not task.train_ids:
            violations.append(f"task {task.index} is empty")
        overlap = union & task.train_ids
        if overlap:
            violations.append(
                f"sample in two tasks: {sorted(overlap)[:5]} reappears in "
                f"task {task.index}"
            )
        union |= task.train_ids
        derived = {store.label_of(s) for s in task.train_ids if s in train}
        if derived != set(task.label_space):
            violations.append(f"task {task.index} label space inconsistent")
        stray = task.train_ids - train
        if stray:
            violations.append(
                f"task {task.index} references non-train ids {sorted(stray)[:5]}"
            )
    if union != train:
        violations.append(
            f"tasks cover {len(union)} of {len(train)} training samples"
        )
    if stream.kind in (StreamKind.UNREALISTIC, StreamKind.SEMIREAL):
        seen: set = set()
        for task in stream.tasks:
            overlap = seen & task.label_space
            if overlap:
                violations.append(
                    f"label space of task {task.index} overlaps earlier tasks: "
                    f"{sorted(overlap)}"
                )
            seen |= task.label_space
    if stream.kind is StreamKind.UNREALISTIC:
        sizes = [len(t.label_space) for t in stream.tasks]
        if sizes and max(sizes) - min(sizes) > 1:
            violations.append(f"unbalanced class groups: sizes {sizes}")
    return violations


def _task_seed(run_seed: int, task_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=(int(run_seed), int(task_index)))


def run_single(config: RunConfig, store: EmbeddingStore, seed: int) -> dict:
    """One seeded end-to-end run; returns the per-run result record."""
    stream = GENERATORS[config.scenario](store, config.num_tasks, seed)
    bad = validate_stream(stream, store)
    if bad:
        raise RuntimeError(f"generated stream failed validation: {bad}")
    seen = scenario.seen_classes(stream)

    buffer = MemoryBuffer(capacity=config.memory_capacity, policy=config.memory_policy)
    mem_rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0x4D454D)))
    model = None
    matrix = AccuracyMatrix(config.num_tasks)
    for task in stream.tasks:
        k = task.index
        task_seq = _task_seed(seed, k)
        expand_seq, train_seq = task_seq.spawn(2)
        buffer = memory.update(buffer, task, store, mem_rng)
        if model is None:
            model = dynnan.init(store.dim, sorted(seen[0]), seed=expand_seq)
        else:
            new = sorted(set(seen[k - 1]) - set(model.class_index_map))
            model = dynnan.expand(model, new, seed=expand_seq)
        vectors, labels = memory.as_training_set(buffer, store)
        model = optim.train_task(
            model, vectors, labels, config.optim, config.strategy,
            seed=train_seq,
        )
        for k_prev in range(1, k + 1):
            matrix.set(k, k_prev, metrics.evaluate_snapshot(model, store, seen[k_prev - 1]))
    run_metrics = metrics.compute_metrics(matrix)
    return {
        "seed": seed,
        "config_hash": config_hash(config),
        "manifest_hash": scenario.manifest_hash(stream),
        "accuracy_matrix": matrix.to_lists(),
        "metrics": {
            **run_metrics.scalars(),
            "task_accuracy": list(run_metrics.task_accuracy),
            "global_forgetting": list(run_metrics.global_forgetting),
            "task_forgetting": list(run_metrics.task_forgetting),
        },
    }


def _metrics_from_record(record: dict) -> RunMetrics:
    m = record["metrics"]
    return RunMetrics(
        last_task_accuracy=m["last_task_accuracy"],
        average_accuracy=m["average_accuracy"],
        avg_global_forgetting=m["avg_global_forgetting"],
        avg_task_forgetting=m["avg_task_forgetting"],
        task_accuracy=tuple(m["task_accuracy"]),
        global_forgetting=tuple(m["global_forgetting"]),
        task_forgetting=tuple(m["task_forgetting"]),
    )


def run_experiment(config: RunConfig, store: EmbeddingStore | None = None) -> dict:
    """Run every seed, aggregate, and write JSON + CSV artifacts."""
    if store is None:
        store = load_store(config.store_path)
    records = [run_single(config, store, seed) for seed in config.seeds]
    aggregate = metrics.aggregate_runs([_metrics_from_record(r) for r in records])
    report = {
        "config": config.to_dict(),
        "config_hash": config_hash(config),
        "runs": records,
        "aggregate": aggregate,
    }
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for record in records:
        path = out / f"run_{record['config_hash'][:12]}_seed{record['seed']}.json"
        payload = dict(record)
        payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
        path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    write_aggregate_csv(out / "aggregate.csv", [report])
    (out / f"report_{report['config_hash'][:12]}.json").write_text(
        json.dumps({**report, "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")},
                   indent=2, sort_keys=True)
    )
    return report


CSV_FIELDS = [
    "store", "scenario", "memory_capacity", "num_tasks", "strategy",
    "memory_policy", "seeds",
    "last_task_accuracy_mean", "last_task_accuracy_std",
    "average_accuracy_mean", "average_accuracy_std",
    "avg_global_forgetting_mean", "avg_global_forgetting_std",
    "avg_task_forgetting_mean", "avg_task_forgetting_std",
    "config_hash",
]


def write_aggregate_csv(path, reports: list) -> None:
    """One CSV row per configuration report."""
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for report in reports:
            cfg = report["config"]
            agg = report["aggregate"]
            row = {
                "store": cfg["store_path"],
                "scenario": cfg["scenario"],
                "memory_capacity": cfg["memory_capacity"],
                "num_tasks": cfg["num_tasks"],
                "strategy": cfg["strategy"],
                "memory_policy": cfg["memory_policy"],
                "seeds": " ".join(str(s) for s in cfg["seeds"]),
                "config_hash": report["config_hash"],
            }
            for name in ("last_task_accuracy", "average_accuracy",
                         "avg_global_forgetting", "avg_task_forgetting"):
                row[f"{name}_mean"] = f"{agg[name]['mean']:.6f}"
                row[f"{name}_std"] = f"{agg[name]['std']:.6f}"
            writer.writerow(row)
