"""SGD training loop with warm-restart cosine learning-rate schedule.

The schedule ramps linearly from lr_min to lr_max over the warm-up epoch,
then runs cosine cycles of geometrically growing length (T0, T0*T_mult,
...). The per-task epoch budget defaults to 16 = 1 warm-up + cycles of
1 + 2 + 4 + 8, ending exactly on a cycle boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import dynnan
from .dynnan import DynNanModel


class ScheduleError(ValueError):
    pass


class Strategy(str, Enum):
    SCRATCH = "scratch"
    FINETUNE = "finetune"


@dataclass(frozen=True)
class OptimConfig:
    batch_size: int = 64
    weight_decay: float = 1e-4
    lr_max: float = 0.005
    lr_min: float = 5e-5
    t0: int = 1
    t_mult: int = 2
    warmup_epochs: int = 1
    epochs_per_task: int = 16
    mix_prob: float = 0.5
    mix_strength: float = 1.0

    def __post_init__(self):
        if not (0 < self.lr_min < self.lr_max):
            raise ValueError("need 0 < lr_min < lr_max")
        if self.t0 < 1 or self.t_mult < 1 or self.batch_size < 1:
            raise ValueError("t0, t_mult, batch_size must be >= 1")
        if self.warmup_epochs < 0 or self.epochs_per_task < 0:
            raise ValueError("epoch counts must be non-negative")


def lr_at(config: OptimConfig, epoch: float) -> float:
    """Learning rate at a real-valued epoch position within a task."""
    if epoch < 0 or epoch >= config.epochs_per_task:
        raise ScheduleError(f"epoch {epoch} outside [0, {config.epochs_per_task})")
    if epoch < config.warmup_epochs:
        frac = epoch / config.warmup_epochs
        return config.lr_min + (config.lr_max - config.lr_min) * frac
    t = epoch - config.warmup_epochs
    cycle_len = float(config.t0)
    while t >= cycle_len:
        t -= cycle_len
        cycle_len *= config.t_mult
    cos = np.cos(np.pi * t / cycle_len)
    return config.lr_min + 0.5 * (config.lr_max - config.lr_min) * (1.0 + cos)


def cycle_boundaries(config: OptimConfig, n: int) -> list:
    """Epoch positions of the first n restarts: warmup + {0, T0, T0(1+m), ...}."""
    out = []
    pos = float(config.warmup_epochs)
    length = float(config.t0)
    for _ in range(n):
        out.append(pos)
        pos += length
        length *= config.t_mult
    return out


def sgd_step(model: DynNanModel, grads: dict, lr: float) -> DynNanModel:
    """theta <- theta - lr * grad (weight decay already lives in the grad)."""
    updated = {}
    for name, p in model.params().items():
        g = grads[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape mismatch for {name}")
        updated[name] = p - p.dtype.type(lr) * g
    return DynNanModel(class_index_map=model.class_index_map, **updated)


def _run_epochs(model, vectors, labels, config, strategy, seed):
    if isinstance(seed, np.random.SeedSequence):
        root = seed
    else:
        root = np.random.SeedSequence(seed)
    init_seq, shuffle_seq = root.spawn(2)
    if strategy is Strategy.SCRATCH:
        model = dynnan.init(
            model.input_dim,
            model.class_index_map,
            seed=init_seq,
            hidden=(model.w1.shape[1], model.w2.shape[1]),
            dtype=model.dtype,
        )
    cols = model.column_of(labels)
    rng = np.random.default_rng(shuffle_seq)
    n = len(vectors)
    num_batches = int(np.ceil(n / config.batch_size))
    losses = []
    for epoch in range(config.epochs_per_task):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for b in range(num_batches):
            idx = order[b * config.batch_size : (b + 1) * config.batch_size]
            xb, targets = dynnan.mix_batch(
                vectors[idx],
                cols[idx],
                prob=config.mix_prob,
                strength=config.mix_strength,
                rng=rng,
            )
            lr = lr_at(config, epoch + b / num_batches)
            loss, grads = dynnan.loss_and_grad(
                model, xb, targets, weight_decay=config.weight_decay
            )
            model = sgd_step(model, grads, lr)
            epoch_loss += loss
        losses.append(epoch_loss / num_batches)
    return model, losses


def train_task(
    model: DynNanModel,
    vectors: np.ndarray,
    labels: np.ndarray,
    config: OptimConfig,
    strategy: Strategy,
    seed: int,
) -> DynNanModel:
    """Train the head on a memory snapshot for one task.

    Scratch re-initializes every parameter from a child of `seed` before
    training; FineTune keeps the incoming (post-expansion) weights. Labels
    are global class ids and are mapped onto head columns here. The last
    partial mini-batch is kept. Deterministic given identical inputs on a
    single thread.
    """
    if len(vectors) == 0:
        raise ValueError("training set is empty")
    trained, _ = _run_epochs(model, vectors, labels, config, strategy, seed)
    return trained


def train_task_with_losses(model, vectors, labels, config, strategy, seed):
    """train_task plus the mean mini-batch loss per epoch (diagnostics)."""
    if len(vectors) == 0:
        raise ValueError("training set is empty")
    return _run_epochs(model, vectors, labels, config, strategy, seed)
