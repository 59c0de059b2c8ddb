"""K-step sparse relation diffusion over a (perturbed) normalized adjacency."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._seeds import seed_sequence
from .encoder import glorot_uniform
from .graph import NormAdj, SparseGraph, normalize_sym, perturb_edges, spmm

TRAIN = "train"
EVAL = "eval"


@dataclass(frozen=True)
class DiffusionConfig:
    k: int = 10
    alpha: float = 0.15
    p_drop: float = 0.1
    p_feat: float = 0.5
    d_out: int = 32

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0.0 <= self.p_drop < 1.0:
            raise ValueError("p_drop must lie in [0, 1)")
        if not 0.0 <= self.p_feat < 1.0:
            raise ValueError("p_feat must lie in [0, 1)")
        if self.d_out < 1:
            raise ValueError("d_out must be >= 1")


@dataclass(frozen=True, eq=False)
class DiffusionParams:
    W: np.ndarray  # (p0, d_out)
    b: np.ndarray  # (d_out,)

    def arrays(self):
        return {"W": self.W, "b": self.b}


def init_diffusion(p0, d_out, rng_seed) -> DiffusionParams:
    rng = np.random.default_rng(rng_seed)
    return DiffusionParams(W=glorot_uniform(rng, p0, d_out), b=np.zeros(d_out))


def project(x, params: DiffusionParams, use_bias=True) -> np.ndarray:
    """X W (+ b broadcast over rows)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.W.shape[0]:
        raise ValueError(f"features must have shape (n, {params.W.shape[0]}), got {x.shape}")
    z = x @ params.W
    return z + params.b if use_bias else z


def diffuse(a_pert: SparseGraph, z0, alpha: float, k: int) -> np.ndarray:
    """Apply Z <- alpha * A Z + (1 - alpha) Z  k times, using sparse products only."""
    z = np.asarray(z0, dtype=np.float64)
    if z.shape[0] != a_pert.n:
        raise ValueError(f"dimension mismatch: graph has {a_pert.n} nodes, Z has {z.shape[0]} rows")
    for _ in range(k):
        z = alpha * spmm(a_pert, z) + (1.0 - alpha) * z
    return z


def feature_mask(shape, p_feat, rng_seed):
    """Inverted-dropout multiplier: 0 with prob p_feat, else 1/(1-p_feat)."""
    if p_feat == 0.0:
        return np.ones(shape)
    rng = np.random.default_rng(rng_seed)
    return (rng.random(shape) >= p_feat) / (1.0 - p_feat)


def finalize(zk, b, p_feat: float, rng_seed=None, mode=TRAIN) -> np.ndarray:
    """dropout(relu(Z + b)); dropout is the identity in eval mode."""
    if not 0.0 <= p_feat < 1.0:
        raise ValueError("p_feat must lie in [0, 1)")
    h = np.maximum(np.asarray(zk) + b, 0.0)
    if mode == EVAL or p_feat == 0.0:
        return h
    return h * feature_mask(h.shape, p_feat, rng_seed)


@dataclass
class RDCache:
    """Intermediates of one RD forward pass, kept for backpropagation."""
    a: NormAdj
    pre: np.ndarray
    mask: np.ndarray | None
    h: np.ndarray


def rd_forward(a_hat: NormAdj, x, cfg: DiffusionConfig, params: DiffusionParams, rng_seed=None, mode=EVAL):
    """Perturb (train only) -> project -> diffuse -> finalize. Returns (H, cache)."""
    if mode not in (TRAIN, EVAL):
        raise ValueError(f"mode must be {TRAIN!r} or {EVAL!r}")
    ss = seed_sequence(rng_seed)
    edge_seed, feat_seed = ss.spawn(2)
    a = perturb_edges(a_hat, cfg.p_drop, edge_seed) if mode == TRAIN else a_hat
    z = diffuse(a, project(x, params, use_bias=False), cfg.alpha, cfg.k)
    pre = z + params.b
    h = np.maximum(pre, 0.0)
    mask = None
    if mode == TRAIN and cfg.p_feat > 0.0:
        mask = feature_mask(h.shape, cfg.p_feat, feat_seed)
        h = h * mask
    return h, RDCache(a=a, pre=pre, mask=mask, h=h)


def rd_backward(dh, x, cfg: DiffusionConfig, cache: RDCache):
    """Gradients of a scalar loss w.r.t. W and b given dL/dH."""
    if cache.mask is not None:
        dh = dh * cache.mask
    dpre = dh * (cache.pre > 0)
    # the perturbed operator stays symmetric, so it is its own adjoint
    dz0 = diffuse(cache.a, dpre, cfg.alpha, cfg.k)
    return {"W": np.asarray(x).T @ dz0, "b": dpre.sum(axis=0)}


def run_rd(g_aug: SparseGraph, x, cfg: DiffusionConfig, params: DiffusionParams, rng_seed=None, mode=EVAL):
    """Normalize the augmented graph and run the RD forward pass."""
    h, _ = rd_forward(normalize_sym(g_aug), x, cfg, params, rng_seed, mode)
    return h
