"""Accuracy, macro-F1, one-vs-rest AUC and the inter/intra class distance ratio."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist
from scipy.stats import rankdata


@dataclass
class EvalReport:
    accuracy: float
    macro_f1: float
    auc: float
    per_class_f1: list = field(default_factory=list)
    r_ratio: float = float("nan")

    def to_text(self) -> str:
        lines = [
            f"accuracy={self.accuracy:.10g}",
            f"macro_f1={self.macro_f1:.10g}",
            f"auc={self.auc:.10g}",
            f"r_ratio={self.r_ratio:.10g}",
        ]
        lines += [f"f1_class_{c}={v:.10g}" for c, v in enumerate(self.per_class_f1)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        kv = dict(line.split("=", 1) for line in text.strip().splitlines() if "=" in line)
        per_class = []
        c = 0
        while f"f1_class_{c}" in kv:
            per_class.append(float(kv[f"f1_class_{c}"]))
            c += 1
        return cls(accuracy=float(kv["accuracy"]), macro_f1=float(kv["macro_f1"]),
                   auc=float(kv["auc"]), per_class_f1=per_class,
                   r_ratio=float(kv.get("r_ratio", "nan")))


def _select(mask, *arrays):
    if mask is None:
        out = [np.asarray(a) for a in arrays]
    else:
        mask = np.asarray(mask)
        idx = np.flatnonzero(mask) if mask.dtype == bool else mask.astype(np.int64)
        out = [np.asarray(a)[idx] for a in arrays]
    if out[0].shape[0] == 0:
        raise ValueError("mask selects no nodes")
    return out


def accuracy(pred, truth, mask=None) -> float:
    pred, truth = _select(mask, pred, truth)
    return float(np.mean(pred == truth))


def per_class_f1(pred, truth, mask=None, num_classes=None) -> np.ndarray:
    """F1 per class; 0 whenever precision or recall is undefined."""
    pred, truth = _select(mask, pred, truth)
    if num_classes is None:
        num_classes = int(max(pred.max(), truth.max())) + 1
    out = np.zeros(num_classes)
    for c in range(num_classes):
        tp = np.count_nonzero((pred == c) & (truth == c))
        n_pred = np.count_nonzero(pred == c)
        n_true = np.count_nonzero(truth == c)
        if tp == 0 or n_pred == 0 or n_true == 0:
            continue
        prec, rec = tp / n_pred, tp / n_true
        out[c] = 2 * prec * rec / (prec + rec)
    return out


def macro_f1(pred, truth, mask=None, num_classes=None) -> float:
    return float(per_class_f1(pred, truth, mask, num_classes).mean())


def binary_auc(scores, positive) -> float:
    """Mann-Whitney AUC with midranks for ties."""
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    n_pos = np.count_nonzero(positive)
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    ranks = rankdata(scores)
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def auc_ovr(scores, truth, mask=None) -> float:
    """Macro one-vs-rest AUC; classes absent from the selection are skipped."""
    scores, truth = _select(mask, scores, truth)
    vals = []
    for c in range(scores.shape[1]):
        pos = truth == c
        if pos.any() and not pos.all():
            vals.append(binary_auc(scores[:, c], pos))
    if not vals:
        raise ValueError("need at least two classes present to compute AUC")
    return float(np.mean(vals))


def intra_inter_ratio(embeddings, labels) -> float:
    """Mean class-vs-rest distance over mean within-class distance.

    Classes with a single member are left out of the within-class mean.
    Returns +inf when all within-class distances are zero.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("need at least two classes")
    intra, inter = [], []
    for c in classes:
        inside = x[labels == c]
        if inside.shape[0] >= 2:
            intra.append(pdist(inside).mean())
        inter.append(cdist(inside, x[labels != c]).mean())
    if not intra:
        raise ValueError("every class is a singleton; within-class distance undefined")
    mean_intra = float(np.mean(intra))
    mean_inter = float(np.mean(inter))
    if mean_intra == 0.0:
        return math.inf
    return mean_inter / mean_intra


def evaluate(prob, truth, mask, embeddings=None, num_classes=None) -> EvalReport:
    prob = np.asarray(prob)
    num_classes = num_classes or prob.shape[1]
    pred = np.argmax(prob, axis=1)
    f1s = per_class_f1(pred, truth, mask, num_classes)
    r = float("nan")
    if embeddings is not None:
        emb, lab = _select(mask, embeddings, truth)
        r = intra_inter_ratio(emb, lab)
    return EvalReport(
        accuracy=accuracy(pred, truth, mask),
        macro_f1=float(f1s.mean()),
        auc=auc_ovr(prob, truth, mask),
        per_class_f1=[float(v) for v in f1s],
        r_ratio=r,
    )
