"""Task streams: the three ways this package slices a dataset into a
sequence of tasks.

- unrealistic: balanced class-incremental; classes are shuffled and split
  into near-equal disjoint groups, one group per task.
- semireal: each class lands on a uniformly random task, so group sizes
  are unbalanced but label spaces stay disjoint.
- real: the training samples themselves are permuted and chunked, with no
  control over labels — classes recur across tasks, exactly like a data
  stream arriving in the wild.

The first two are special cases of the third: any class-incremental
stream is also a valid sample-level partition.

Run:  python3 demos/02_task_streams.py
"""

from realcl.embedstore import SynthSpec, generate_synthetic
from realcl.runner import validate_stream
from realcl.scenario import GENERATORS, StreamKind, TaskStream, manifest_hash, seen_classes

store = generate_synthetic(
    SynthSpec(num_classes=10, dim=16, train_per_class=30, test_per_class=10,
              mean_radius=10.0, noise_sigma=1.0, seed=11))

K = 4
for kind, gen in GENERATORS.items():
    stream = gen(store, K, seed=7)
    sizes = [len(t.train_ids) for t in stream.tasks]
    spaces = [sorted(t.label_space) for t in stream.tasks]
    print(f"\n{kind.value}")
    print(f"  task sizes   : {sizes}")
    print(f"  label spaces : {spaces}")
    print(f"  violations   : {validate_stream(stream, store) or 'none'}")
    print(f"  manifest     : {manifest_hash(stream)[:16]}")

# ------------------------------------------------------------------
# seen_classes gives the cumulative label space per task — this is the
# evaluation universe after each task (no task id at test time).
# ------------------------------------------------------------------
stream = GENERATORS[StreamKind.SEMIREAL](store, K, seed=7)
print("\ncumulative classes after each semireal task:")
for k, classes in enumerate(seen_classes(stream), start=1):
    print(f"  after task {k}: {sorted(classes)}")

# ------------------------------------------------------------------
# Specialization: relabel a class-incremental stream as sample-level
# and the validator still accepts it.
# ------------------------------------------------------------------
unreal = GENERATORS[StreamKind.UNREALISTIC](store, K, seed=7)
as_real = TaskStream(kind=StreamKind.REAL, tasks=unreal.tasks, seed=7)
print(f"\nclass-incremental stream valid as sample-level: "
      f"{not validate_stream(as_real, store)}")
