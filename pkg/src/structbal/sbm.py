"""Two-block stochastic block model with a majority and a minority class."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import SparseGraph, build_graph

MAJORITY = 0
MINORITY = 1


@dataclass(frozen=True)
class SBMConfig:
    n1: int  # majority size
    n2: int  # minority size
    p: float  # intra-class edge probability
    q: float  # inter-class edge probability

    def __post_init__(self):
        if not self.n1 >= self.n2 >= 1:
            raise ValueError(f"need n1 >= n2 >= 1, got n1={self.n1}, n2={self.n2}")
        if not 0.0 <= self.q <= self.p <= 1.0:
            raise ValueError(f"need 0 <= q <= p <= 1, got p={self.p}, q={self.q}")

    @property
    def beta(self) -> float:
        return self.n1 / self.n2

    @property
    def n(self) -> int:
        return self.n1 + self.n2


def _sample_block(rng, rows, cols, prob, same):
    """Bernoulli(prob) over the pairs rows x cols (upper triangle if ``same``)."""
    if prob <= 0.0:
        return np.empty((0, 2), dtype=np.int64)
    if same:
        iu, ju = np.triu_indices(len(rows), k=1)
        hit = rng.random(iu.shape[0]) < prob
        return np.column_stack([rows[iu[hit]], rows[ju[hit]]])
    out = []
    for r in rows:
        hit = rng.random(len(cols)) < prob
        if hit.any():
            c = cols[hit]
            out.append(np.column_stack([np.full(c.shape[0], r), c]))
    if not out:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(out)


def generate_sbm(cfg: SBMConfig, rng_seed) -> tuple[SparseGraph, np.ndarray]:
    """Sample a simple graph; nodes ``0..n1-1`` are majority (label 0),
    the rest minority (label 1)."""
    rng = np.random.default_rng(rng_seed)
    ma = np.arange(cfg.n1)
    mi = np.arange(cfg.n1, cfg.n)
    edges = np.concatenate([
        _sample_block(rng, ma, ma, cfg.p, True),
        _sample_block(rng, mi, mi, cfg.p, True),
        _sample_block(rng, ma, mi, cfg.q, False),
    ])
    labels = np.full(cfg.n, MAJORITY, dtype=np.int64)
    labels[cfg.n1:] = MINORITY
    return build_graph(edges, cfg.n), labels


def expected_degrees(cfg: SBMConfig) -> tuple[float, float]:
    """(E[d_mi], E[d_ma]) counting every other node as a potential neighbour
    with the block probability (self-pairs included, as in the closed form)."""
    d_mi = cfg.n2 * cfg.p + cfg.n1 * cfg.q
    d_ma = cfg.n1 * cfg.p + cfg.n2 * cfg.q
    return d_mi, d_ma


def degree_disparity(cfg: SBMConfig) -> float:
    b = cfg.beta
    return (cfg.q + cfg.p * b) / (cfg.p + cfg.q * b)


def gaussian_features(labels, dim, centroid_distance, rng_seed, std=1.0):
    """Class-conditional isotropic Gaussians whose means sit
    ``centroid_distance`` apart along the first axis, one mean per class."""
    rng = np.random.default_rng(rng_seed)
    labels = np.asarray(labels)
    x = rng.normal(scale=std, size=(labels.shape[0], dim))
    x[:, 0] += centroid_distance * labels
    return x
