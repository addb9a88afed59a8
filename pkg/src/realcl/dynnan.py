"""Dynamically expanding classification head.

Three dense layers with ReLU after the first two; the last layer grows one
output column per newly seen class while leaving all existing parameters
untouched. Includes forward/backward passes with cross-entropy (optionally
pairwise-mixed targets), embedding-space mix augmentation, prediction, and
a binary snapshot format.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

HIDDEN1 = 1024
HIDDEN2 = 1024


class ShapeError(ValueError):
    pass


class LabelError(ValueError):
    pass


class ExpansionError(ValueError):
    pass


@dataclass
class DynNanModel:
    w1: np.ndarray  # (dim, h1)
    b1: np.ndarray
    w2: np.ndarray  # (h1, h2)
    b2: np.ndarray
    w3: np.ndarray  # (h2, C)
    b3: np.ndarray
    class_index_map: tuple  # output column -> global class id

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def num_classes(self) -> int:
        return self.w3.shape[1]

    @property
    def dtype(self):
        return self.w1.dtype

    def params(self) -> dict:
        return {
            "w1": self.w1, "b1": self.b1,
            "w2": self.w2, "b2": self.b2,
            "w3": self.w3, "b3": self.b3,
        }

    def column_of(self, class_ids) -> np.ndarray:
        """Map global class ids to output column indices."""
        lookup = {c: i for i, c in enumerate(self.class_index_map)}
        try:
            return np.array([lookup[int(c)] for c in np.atleast_1d(class_ids)],
                            dtype=np.int64)
        except KeyError as e:
            raise LabelError(f"class {e.args[0]} not in model head") from None

    def copy(self) -> "DynNanModel":
        return DynNanModel(
            w1=self.w1.copy(), b1=self.b1.copy(),
            w2=self.w2.copy(), b2=self.b2.copy(),
            w3=self.w3.copy(), b3=self.b3.copy(),
            class_index_map=self.class_index_map,
        )

    def astype(self, dtype) -> "DynNanModel":
        return DynNanModel(
            w1=self.w1.astype(dtype), b1=self.b1.astype(dtype),
            w2=self.w2.astype(dtype), b2=self.b2.astype(dtype),
            w3=self.w3.astype(dtype), b3=self.b3.astype(dtype),
            class_index_map=self.class_index_map,
        )


def _uniform_fan_in(rng, fan_in, shape, dtype):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def init(
    dim: int,
    classes,
    seed: int,
    hidden: tuple = (HIDDEN1, HIDDEN2),
    dtype=np.float32,
) -> DynNanModel:
    """Fresh model over the given class ids.

    Weights are uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer,
    biases zero, drawn from a PCG64 generator seeded with `seed`.
    """
    classes = tuple(int(c) for c in classes)
    if not classes:
        raise ValueError("classes must be non-empty")
    if len(set(classes)) != len(classes):
        raise ExpansionError("duplicate class ids")
    h1, h2 = hidden
    rng = np.random.default_rng(seed)
    return DynNanModel(
        w1=_uniform_fan_in(rng, dim, (dim, h1), dtype),
        b1=np.zeros(h1, dtype=dtype),
        w2=_uniform_fan_in(rng, h1, (h1, h2), dtype),
        b2=np.zeros(h2, dtype=dtype),
        w3=_uniform_fan_in(rng, h2, (h2, len(classes)), dtype),
        b3=np.zeros(len(classes), dtype=dtype),
        class_index_map=classes,
    )


def expand(model: DynNanModel, new_classes, seed: int) -> DynNanModel:
    """Append one output column (and zero bias) per new class.

    Pre-existing parameters are carried over bit-unchanged, so old-class
    logits are identical before and after expansion.
    """
    new_classes = tuple(int(c) for c in new_classes)
    if not new_classes:
        return model
    if set(new_classes) & set(model.class_index_map):
        raise ExpansionError("expansion classes overlap existing head")
    if len(set(new_classes)) != len(new_classes):
        raise ExpansionError("duplicate class ids in expansion")
    rng = np.random.default_rng(seed)
    h2 = model.w3.shape[0]
    cols = _uniform_fan_in(rng, h2, (h2, len(new_classes)), model.dtype)
    return DynNanModel(
        w1=model.w1, b1=model.b1,
        w2=model.w2, b2=model.b2,
        w3=np.concatenate([model.w3, cols], axis=1),
        b3=np.concatenate([model.b3, np.zeros(len(new_classes), dtype=model.dtype)]),
        class_index_map=model.class_index_map + new_classes,
    )


def forward(model: DynNanModel, batch: np.ndarray, return_cache: bool = False):
    """Logits = W3·relu(W2·relu(W1·x + b1) + b2) + b3, row per sample."""
    x = np.atleast_2d(np.asarray(batch, dtype=model.dtype))
    if x.shape[1] != model.input_dim:
        raise ShapeError(
            f"input width {x.shape[1]} != model input dim {model.input_dim}"
        )
    a1 = np.maximum(x @ model.w1 + model.b1, 0)
    a2 = np.maximum(a1 @ model.w2 + model.b2, 0)
    logits = a2 @ model.w3 + model.b3
    if return_cache:
        return logits, (x, a1, a2)
    return logits


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(_log_softmax(logits))


def loss_and_grad(model: DynNanModel, batch, targets, weight_decay: float = 0.0):
    """Mean cross-entropy (plus optional L2 on weight matrices) and its
    gradients.

    `targets` is either an int array of column indices, or a mixed triple
    (cols_a, cols_b, lam) with loss lam*CE(a) + (1-lam)*CE(b). Weight decay
    adds weight_decay * 0.5 * ||W||^2 over the three weight matrices only
    (biases excluded).
    """
    logits, (x, a1, a2) = forward(model, batch, return_cache=True)
    n, C = logits.shape
    if isinstance(targets, tuple):
        ya, yb, lam = targets
        ya = np.asarray(ya, dtype=np.int64)
        yb = np.asarray(yb, dtype=np.int64)
    else:
        ya = np.asarray(targets, dtype=np.int64)
        yb = ya
        lam = 1.0
    for y in (ya, yb):
        if y.shape != (n,):
            raise LabelError("target length does not match batch")
        if y.min(initial=0) < 0 or y.max(initial=0) >= C:
            raise LabelError("target index outside model head")

    logp = _log_softmax(logits.astype(np.float64))
    rows = np.arange(n)
    ce = -(lam * logp[rows, ya] + (1.0 - lam) * logp[rows, yb]).mean()
    loss = ce
    if weight_decay:
        loss += weight_decay * 0.5 * sum(
            float((w.astype(np.float64) ** 2).sum())
            for w in (model.w1, model.w2, model.w3)
        )

    soft = np.exp(logp)
    target_mass = np.zeros_like(soft)
    target_mass[rows, ya] += lam
    target_mass[rows, yb] += 1.0 - lam
    dlogits = ((soft - target_mass) / n).astype(model.dtype)

    dw3 = a2.T @ dlogits
    db3 = dlogits.sum(axis=0)
    da2 = dlogits @ model.w3.T
    dz2 = da2 * (a2 > 0)
    dw2 = a1.T @ dz2
    db2 = dz2.sum(axis=0)
    da1 = dz2 @ model.w2.T
    dz1 = da1 * (a1 > 0)
    dw1 = x.T @ dz1
    db1 = dz1.sum(axis=0)
    if weight_decay:
        dw1 = dw1 + model.dtype.type(weight_decay) * model.w1
        dw2 = dw2 + model.dtype.type(weight_decay) * model.w2
        dw3 = dw3 + model.dtype.type(weight_decay) * model.w3
    grads = {"w1": dw1, "b1": db1, "w2": dw2, "b2": db2, "w3": dw3, "b3": db3}
    return float(loss), grads


def mix_batch(
    batch: np.ndarray,
    targets: np.ndarray,
    prob: float = 0.5,
    strength: float = 1.0,
    rng: np.random.Generator | None = None,
):
    """Embedding-space mixing: with probability `prob` per batch, draw
    lam ~ Beta(strength, strength), pair each sample with a permutation
    partner, and output lam*x_a + (1-lam)*x_b with target triple
    (y_a, y_b, lam). Otherwise pass through with lam = 1."""
    batch = np.asarray(batch)
    targets = np.asarray(targets, dtype=np.int64)
    if rng is None:
        rng = np.random.default_rng()
    if len(batch) >= 2 and prob > 0 and rng.random() < prob:
        lam = float(rng.beta(strength, strength))
        perm = rng.permutation(len(batch))
        dt = batch.dtype.type
        mixed = dt(lam) * batch + dt(1.0 - lam) * batch[perm]
        return mixed, (targets, targets[perm], lam)
    return batch, (targets, targets, 1.0)


def predict(model: DynNanModel, vectors: np.ndarray) -> np.ndarray:
    """Global class ids via argmax over the head; ties go to the lowest
    column index. A single vector yields a scalar."""
    single = np.asarray(vectors).ndim == 1
    logits = forward(model, vectors)
    cols = np.argmax(logits, axis=1)
    ids = np.array(model.class_index_map, dtype=np.int64)[cols]
    return int(ids[0]) if single else ids


_SNAP_MAGIC = b"DNAN"


def model_to_bytes(model: DynNanModel) -> bytes:
    """Snapshot: dims, class map, then raw little-endian f32 blocks."""
    h1 = model.w1.shape[1]
    h2 = model.w2.shape[1]
    out = [struct.pack("<4sIIII", _SNAP_MAGIC, model.input_dim, h1, h2,
                       model.num_classes)]
    out.append(np.array(model.class_index_map, dtype="<u4").tobytes())
    for p in model.params().values():
        out.append(np.ascontiguousarray(p, dtype="<f4").tobytes())
    return b"".join(out)


def model_from_bytes(data: bytes) -> DynNanModel:
    magic, dim, h1, h2, C = struct.unpack_from("<4sIIII", data, 0)
    if magic != _SNAP_MAGIC:
        raise ValueError("not a model snapshot")
    off = 20
    cmap = tuple(int(c) for c in np.frombuffer(data, dtype="<u4", count=C, offset=off))
    off += 4 * C

    def block(shape):
        nonlocal off
        n = int(np.prod(shape))
        a = np.frombuffer(data, dtype="<f4", count=n, offset=off).reshape(shape).copy()
        off += 4 * n
        return a

    return DynNanModel(
        w1=block((dim, h1)), b1=block((h1,)),
        w2=block((h1, h2)), b2=block((h2,)),
        w3=block((h2, C)), b3=block((C,)),
        class_index_map=cmap,
    )
