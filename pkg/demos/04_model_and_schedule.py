"""The expanding classifier and its training schedule.

The model is a three-layer dense network (512 -> 1024 -> 1024 -> C,
ReLU) over frozen embeddings. Its output layer grows one column per
newly seen class; growing never touches existing parameters, so logits
for old classes are unchanged. Training uses plain SGD with a
warm-restart cosine schedule and embedding-space mixing augmentation.

Run:  python3 demos/04_model_and_schedule.py
"""

import numpy as np

from realcl import dynnan, optim
from realcl.optim import OptimConfig

# ------------------------------------------------------------------
# Init and grow the head.
# ------------------------------------------------------------------
model = dynnan.init(dim=512, classes=[0, 1, 2], seed=0)
print(f"initial head: classes {model.class_index_map}, "
      f"{sum(p.size for p in model.params().values()):,} parameters")

x = np.random.default_rng(1).standard_normal((4, 512)).astype(np.float32)
before = dynnan.forward(model, x)

model = dynnan.expand(model, [5, 7], seed=1)
after = dynnan.forward(model, x)
print(f"grown head  : classes {model.class_index_map}")
print(f"old-class logits preserved: "
      f"{bool(np.allclose(before, after[:, :3]))}")

# ------------------------------------------------------------------
# The warm-restart schedule: one linear warmup epoch, then cosine
# cycles of doubling length. Restarts jump straight back to lr_max.
# ------------------------------------------------------------------
cfg = OptimConfig(epochs_per_task=16)
print(f"\ncycle boundaries (epochs): {optim.cycle_boundaries(cfg, 4)}")
print("lr by epoch:")
for epoch in range(cfg.epochs_per_task):
    lr = optim.lr_at(cfg, epoch)
    bar = "#" * int(round(60 * lr / cfg.lr_max))
    print(f"  {epoch:2d}  {lr:.5f} {bar}")

# ------------------------------------------------------------------
# Mixing augmentation: with probability mix_prob a batch is replaced by
# a random convex combination of itself and a shuffled copy; targets
# become the pair (y_a, y_b) with the mixing weight.
# ------------------------------------------------------------------
rng = np.random.default_rng(2)
batch = rng.standard_normal((6, 512)).astype(np.float32)
targets = np.arange(6) % 3
mixed, (ya, yb, lam) = dynnan.mix_batch(batch, targets, prob=1.0,
                                        strength=1.0, rng=rng)
print(f"\nmixing weight lambda = {lam:.3f}; "
      f"target pairs: {list(zip(ya.tolist(), yb.tolist()))}")
loss, grads = dynnan.loss_and_grad(model, mixed, (ya, yb, lam))
print(f"mixed-batch loss: {loss:.4f} (gradients for "
      f"{len(grads)} parameter blocks)")
