"""Hard-sample mining and similarity-gated edge augmentation toward
minority-class training anchors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .encoder import cosine_sim, cosine_sim_matrix
from .graph import NormAdj, SparseGraph, add_edges, spmm

DEFAULT_XI = 0.25


@dataclass(frozen=True)
class ClassPartition:
    c_mi: frozenset
    c_ma: frozenset

    def __init__(self, c_mi, c_ma):
        object.__setattr__(self, "c_mi", frozenset(int(c) for c in c_mi))
        object.__setattr__(self, "c_ma", frozenset(int(c) for c in c_ma))
        if not self.c_mi or not self.c_ma:
            raise ValueError("both minority and majority class sets must be nonempty")
        if self.c_mi & self.c_ma:
            raise ValueError(f"classes {sorted(self.c_mi & self.c_ma)} are in both sets")

    @classmethod
    def last_half_minority(cls, num_classes):
        """Highest-numbered ceil(C/2) classes are minority."""
        k = -(-num_classes // 2)
        return cls(range(num_classes - k, num_classes), range(num_classes - k))

    @property
    def num_classes(self):
        return len(self.c_mi) + len(self.c_ma)


@dataclass
class CandidateSet:
    s_init: np.ndarray
    s_cand: np.ndarray | None = None
    c_star: dict = field(default_factory=dict)  # node -> predicted minority class


@dataclass
class AugmentationReport:
    added_edges: list = field(default_factory=list)  # (u, v_star, sim)
    rejected: list = field(default_factory=list)  # (u, v_star, sim, tau)
    skipped: list = field(default_factory=list)  # (u, c_star) with no anchor
    thresholds: dict = field(default_factory=dict)  # v_star -> tau

    def rows(self):
        """(u, v_star, sim, tau, accepted) sorted by candidate id."""
        out = [(u, v, s, self.thresholds[v], True) for u, v, s in self.added_edges]
        out += [(u, v, s, t, False) for u, v, s, t in self.rejected]
        return sorted(out)


def _top2(p_self):
    # stable sort on -p: ties resolve to the lower class id
    order = np.argsort(-p_self, axis=1, kind="stable")
    return order[:, 0], order[:, 1]


def mine_initial(p_self, partition: ClassPartition, xi: float = DEFAULT_XI) -> CandidateSet:
    """Nodes whose top-1 class is majority, top-2 is minority, and whose
    top-2 probability exceeds ``xi``."""
    if not 0.0 <= xi < 0.5:
        raise ValueError(f"xi must lie in [0, 0.5): the second-largest probability never exceeds 0.5, got {xi}")
    p_self = np.asarray(p_self, dtype=np.float64)
    top1, top2 = _top2(p_self)
    ma = np.isin(top1, list(partition.c_ma))
    mi = np.isin(top2, list(partition.c_mi))
    second = p_self[np.arange(len(p_self)), top2]
    s_init = np.flatnonzero(ma & mi & (second > xi))
    return CandidateSet(s_init=s_init, c_star={int(u): int(top2[u]) for u in s_init})


def neighbor_view(a: NormAdj, p_self) -> np.ndarray:
    """Soft vote of neighbour predictions weighted by A_hat (self-loop included)."""
    return spmm(a, p_self)


def neighbor_consensus(a: NormAdj, p_self, cands: CandidateSet, partition: ClassPartition) -> CandidateSet:
    p_neigh = neighbor_view(a, p_self)
    mi = sorted(partition.c_mi)
    ma = sorted(partition.c_ma)
    s = cands.s_init
    keep = p_neigh[s][:, mi].mean(axis=1) > p_neigh[s][:, ma].mean(axis=1)
    s_cand = s[keep]
    return CandidateSet(s_init=s, s_cand=s_cand,
                        c_star={int(u): cands.c_star[int(u)] for u in s_cand})


def anchor_threshold(g: SparseGraph, h, v: int) -> float:
    """Mean cosine similarity between node v and its neighbours; -1 if isolated."""
    nbrs = g.neighbors(v)
    nbrs = nbrs[nbrs != v]
    if nbrs.size == 0:
        return -1.0
    return float(np.mean([cosine_sim(h[v], h[w]) for w in nbrs]))


def augment(g: SparseGraph, h, cands: CandidateSet, train_by_class):
    """Link each candidate to its most similar training anchor of class c*
    when that similarity beats the anchor's neighbour-mean similarity.

    ``train_by_class`` maps class id -> training node ids. The candidate
    itself never serves as its own anchor. Returns (augmented graph, report).
    """
    h = np.asarray(h, dtype=np.float64)
    report = AugmentationReport()
    accepted = []
    pools = {c: np.sort(np.asarray(v, dtype=np.int64)) for c, v in train_by_class.items()}
    for u in sorted(int(x) for x in cands.s_cand):
        c = cands.c_star[u]
        pool = pools.get(c, np.empty(0, dtype=np.int64))
        pool = pool[pool != u]
        if pool.size == 0:
            report.skipped.append((u, c))
            continue
        sims = cosine_sim_matrix(h[u:u + 1], h[pool])[0]
        best = int(np.argmax(sims))  # first max = lowest node id
        v_star, sim = int(pool[best]), float(sims[best])
        if v_star not in report.thresholds:
            report.thresholds[v_star] = anchor_threshold(g, h, v_star)
        tau = report.thresholds[v_star]
        if sim > tau:
            report.added_edges.append((u, v_star, sim))
            accepted.append((u, v_star))
        else:
            report.rejected.append((u, v_star, sim, tau))
    return add_edges(g, accepted), report


def train_pools(labels, train_mask, classes):
    idx = np.flatnonzero(train_mask)
    labels = np.asarray(labels)
    return {int(c): idx[labels[idx] == c] for c in classes}


def enhance_structure(g: SparseGraph, a: NormAdj, h, p_self, labels, train_mask,
                      partition: ClassPartition, xi: float = DEFAULT_XI):
    """Full SE pass: mine, filter by neighbour consensus, augment once."""
    cands = mine_initial(p_self, partition, xi)
    cands = neighbor_consensus(a, p_self, cands, partition)
    pools = train_pools(labels, train_mask, partition.c_mi)
    g_aug, report = augment(g, h, cands, pools)
    return g_aug, cands, report
