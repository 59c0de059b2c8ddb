"""Classification head over diffused embeddings plus A_hat-aggregated
neighbour embeddings, trained jointly with the RD projection."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._seeds import seed_sequence
from .diffusion import (EVAL, TRAIN, DiffusionConfig, DiffusionParams,
                        rd_backward, rd_forward)
from .encoder import glorot_uniform, softmax
from .graph import NormAdj, spmm


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ClassifierParams:
    W1: np.ndarray  # (F, 2F)
    W2: np.ndarray  # (M, F)

    @property
    def F(self) -> int:
        return self.W1.shape[0]

    @property
    def num_classes(self) -> int:
        return self.W2.shape[0]

    def arrays(self):
        return {"W1": self.W1, "W2": self.W2}


def init_classifier(F, num_classes, rng_seed) -> ClassifierParams:
    rng = np.random.default_rng(rng_seed)
    return ClassifierParams(
        W1=glorot_uniform(rng, 2 * F, F, shape=(F, 2 * F)),
        W2=glorot_uniform(rng, F, num_classes, shape=(num_classes, F)),
    )


def _forward_parts(h, a: NormAdj, params: ClassifierParams):
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[1] != params.F:
        raise ValueError(f"embeddings must have shape (n, {params.F}), got {h.shape}")
    cat = np.hstack([h, spmm(a, h)])
    pre = cat @ params.W1.T
    hidden = np.maximum(pre, 0.0)
    return cat, pre, hidden, softmax(hidden @ params.W2.T)


def forward(h, a: NormAdj, params: ClassifierParams) -> np.ndarray:
    """softmax(W2 relu(W1 [h_v || (A_hat H)_v])) for every node."""
    return _forward_parts(h, a, params)[3]


def _mask_index(mask):
    mask = np.asarray(mask)
    idx = np.flatnonzero(mask) if mask.dtype == bool else mask.astype(np.int64)
    if idx.size == 0:
        raise ValueError("mask selects no nodes")
    return idx


def loss(y_hat, labels, mask) -> float:
    """Mean cross-entropy of probability rows over masked nodes."""
    idx = _mask_index(mask)
    p = np.asarray(y_hat)[idx, np.asarray(labels)[idx]]
    return float(-np.mean(np.log(np.maximum(p, np.finfo(float).tiny))))


def predict(params: ClassifierParams, h, a: NormAdj) -> np.ndarray:
    """Argmax class per node (ties -> lowest id)."""
    return np.argmax(forward(h, a, params), axis=1)


def pipeline_loss_and_grad(x, a_hat: NormAdj, labels, mask, cfg: DiffusionConfig,
                           rd_params: DiffusionParams, clf_params: ClassifierParams,
                           rng_seed=None, mode=TRAIN):
    """Loss and gradients of classifier <- finalize <- diffuse <- project.

    The classifier aggregates with the unperturbed ``a_hat``; the perturbed
    sample (train mode) is used inside diffusion only.
    Returns (loss, classifier grads, diffusion grads).
    """
    idx = _mask_index(mask)
    h, cache = rd_forward(a_hat, x, cfg, rd_params, rng_seed, mode)
    cat, pre, hidden, prob = _forward_parts(h, a_hat, clf_params)
    ys = np.asarray(labels)[idx]
    m = idx.size
    value = float(-np.mean(np.log(np.maximum(prob[idx, ys], np.finfo(float).tiny))))

    dlogits = np.zeros_like(prob)
    dlogits[idx] = prob[idx]
    dlogits[idx, ys] -= 1.0
    dlogits /= m
    g_W2 = dlogits.T @ hidden
    dpre = (dlogits @ clf_params.W2) * (pre > 0)
    g_W1 = dpre.T @ cat
    dcat = dpre @ clf_params.W1
    F = clf_params.F
    dh = dcat[:, :F] + spmm(a_hat, dcat[:, F:])  # A_hat is symmetric
    rd_grads = rd_backward(dh, x, cfg, cache)
    return value, {"W1": g_W1, "W2": g_W2}, rd_grads


def train(x, a_hat: NormAdj, labels, train_mask, cfg: DiffusionConfig,
          rd_params: DiffusionParams, clf_params: ClassifierParams,
          epochs: int, lr: float, seed=0, history=None):
    """Full-batch gradient descent on the node loss.

    Each step draws a fresh perturbation / dropout sample from ``seed``.
    If ``history`` is a list, per-epoch losses are appended to it.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    _mask_index(train_mask)
    clf = clf_params.arrays()
    rd = rd_params.arrays()
    step_seeds = seed_sequence(seed).spawn(epochs)
    for epoch, s in enumerate(step_seeds):
        value, g_clf, g_rd = pipeline_loss_and_grad(
            x, a_hat, labels, train_mask, cfg,
            DiffusionParams(**rd), ClassifierParams(**clf), s, TRAIN)
        if not np.isfinite(value):
            raise TrainingDiverged(f"non-finite loss {value} at epoch {epoch} (lr={lr})")
        if history is not None:
            history.append(value)
        clf = {k: v - lr * g_clf[k] for k, v in clf.items()}
        rd = {k: v - lr * g_rd[k] for k, v in rd.items()}
    return replace(clf_params, **clf), replace(rd_params, **rd)


def infer(x, a_hat: NormAdj, cfg: DiffusionConfig, rd_params, clf_params):
    """Eval-mode embeddings and class probabilities."""
    h, _ = rd_forward(a_hat, x, cfg, rd_params, None, EVAL)
    return h, forward(h, a_hat, clf_params)
