"""Rehearsal memory: a capacity-M buffer that is the entire training set
for every task.

After each task the buffer is rebuilt with class-balanced quotas over all
classes seen so far: each class gets floor(M / #classes) slots, and the
remainder goes to the classes with the most available samples. Two
exemplar-selection policies fill the quotas:

- random: uniform draw from each class pool;
- herding: greedy picks that keep the running mean of the chosen
  exemplars as close as possible to the class mean.

Run:  python3 demos/03_memory_buffer.py
"""

from collections import Counter

import numpy as np

from realcl import memory
from realcl.embedstore import SynthSpec, generate_synthetic
from realcl.memory import MemoryBuffer, MemoryPolicy
from realcl.scenario import gen_realcl

store = generate_synthetic(
    SynthSpec(num_classes=10, dim=16, train_per_class=30, test_per_class=10,
              mean_radius=10.0, noise_sigma=1.0, seed=11))
stream = gen_realcl(store, 4, seed=3)

rng = np.random.default_rng(0)
buffer = MemoryBuffer(capacity=50, policy=MemoryPolicy.RANDOM_BALANCED)
print(f"capacity {buffer.capacity}, policy {buffer.policy.value}\n")
for task in stream.tasks:
    buffer = memory.update(buffer, task, store, rng)
    counts = Counter(label for _, label in buffer.entries)
    print(f"after task {task.index}: {len(buffer.entries)} entries, "
          f"per-class {dict(sorted(counts.items()))}")

# The buffer converts straight into training arrays.
vectors, labels = memory.as_training_set(buffer, store)
print(f"\ntraining set from buffer: vectors {vectors.shape}, labels {labels.shape}")

# ------------------------------------------------------------------
# Herding vs random: herding exemplars track the class mean much more
# closely at small quotas.
# ------------------------------------------------------------------
label = 0
pool = [int(s) for s in store.train_ids() if store.label_of(s) == label]
class_vectors = np.stack([store.vector_of(s) for s in pool])
mu = class_vectors.mean(axis=0)

m = 5
herded = memory.herding_select([(sid, store.vector_of(sid)) for sid in pool], m)
herd_err = np.linalg.norm(mu - np.stack([store.vector_of(s) for s in herded]).mean(axis=0))
rand_errs = []
for trial in range(200):
    pick = np.random.default_rng(trial).choice(pool, size=m, replace=False)
    rand_errs.append(np.linalg.norm(mu - np.stack([store.vector_of(s) for s in pick]).mean(axis=0)))
print(f"\n|class mean - exemplar mean| with {m} exemplars:")
print(f"  herding : {herd_err:.4f}")
print(f"  random  : {np.mean(rand_errs):.4f} (mean over 200 draws)")
