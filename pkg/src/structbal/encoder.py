"""One-hidden-layer MLP feature view: embeddings, softmax predictions,
full-batch training, cosine similarity."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True, eq=False)
class EncoderParams:
    W1: np.ndarray  # (p0, d)
    b1: np.ndarray  # (d,)
    W2: np.ndarray  # (d, C)
    b2: np.ndarray  # (C,)

    @property
    def d(self) -> int:
        return self.W1.shape[1]

    @property
    def num_classes(self) -> int:
        return self.W2.shape[1]

    def arrays(self):
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}


def glorot_uniform(rng, fan_in, fan_out, shape=None):
    s = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-s, s, size=shape or (fan_in, fan_out))


def init_encoder(p0: int, d: int, num_classes: int, rng_seed) -> EncoderParams:
    if min(p0, d, num_classes) < 1:
        raise ValueError("all dimensions must be >= 1")
    rng = np.random.default_rng(rng_seed)
    return EncoderParams(
        W1=glorot_uniform(rng, p0, d),
        b1=np.zeros(d),
        W2=glorot_uniform(rng, d, num_classes),
        b2=np.zeros(num_classes),
    )


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _check_x(params, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.W1.shape[0]:
        raise ValueError(f"features must have shape (n, {params.W1.shape[0]}), got {x.shape}")
    return x


def embed(params: EncoderParams, x) -> np.ndarray:
    """Hidden ReLU layer; this is the embedding used for similarity."""
    x = _check_x(params, x)
    return np.maximum(x @ params.W1 + params.b1, 0.0)


def predict_proba(params: EncoderParams, x) -> np.ndarray:
    return softmax(embed(params, x) @ params.W2 + params.b2)


def _masked_index(mask, n):
    mask = np.asarray(mask)
    idx = np.flatnonzero(mask) if mask.dtype == bool else mask.astype(np.int64)
    if idx.size == 0:
        raise ValueError("training mask selects no nodes")
    if idx.max() >= n:
        raise ValueError("mask index out of range")
    return idx


def encoder_loss_and_grad(params: EncoderParams, x, labels, train_mask):
    """Mean cross-entropy over masked rows and its gradient (same keys as params)."""
    x = _check_x(params, x)
    idx = _masked_index(train_mask, x.shape[0])
    xs, ys = x[idx], np.asarray(labels)[idx]
    pre = xs @ params.W1 + params.b1
    h = np.maximum(pre, 0.0)
    prob = softmax(h @ params.W2 + params.b2)
    m = len(idx)
    loss = -np.mean(np.log(prob[np.arange(m), ys]))
    dlogits = prob
    dlogits[np.arange(m), ys] -= 1.0
    dlogits /= m
    dh = (dlogits @ params.W2.T) * (pre > 0)
    grads = {
        "W1": xs.T @ dh,
        "b1": dh.sum(axis=0),
        "W2": h.T @ dlogits,
        "b2": dlogits.sum(axis=0),
    }
    return float(loss), grads


def train_encoder(params: EncoderParams, x, labels, train_mask, epochs: int, lr: float) -> EncoderParams:
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if lr < 0:
        raise ValueError("lr must be non-negative")
    _masked_index(train_mask, np.asarray(x).shape[0])
    cur = params.arrays()
    for _ in range(epochs):
        _, grads = encoder_loss_and_grad(EncoderParams(**cur), x, labels, train_mask)
        cur = {k: v - lr * grads[k] for k, v in cur.items()}
    return replace(params, **cur)


def cosine_sim(a, b) -> float:
    """Cosine similarity; 0 if either vector is zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def cosine_sim_matrix(a, b) -> np.ndarray:
    """Pairwise cosine similarity between rows of ``a`` and rows of ``b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    an = np.divide(a, na[:, None], out=np.zeros_like(a), where=na[:, None] > 0)
    bn = np.divide(b, nb[:, None], out=np.zeros_like(b), where=nb[:, None] > 0)
    return np.clip(an @ bn.T, -1.0, 1.0)
