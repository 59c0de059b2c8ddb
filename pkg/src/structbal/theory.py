"""Numerical witnesses for structural imbalance under a two-block SBM.

Covers the 2x2 class-centroid propagation matrix and its subdominant
eigenvalue, centroid-gap decay, the path-weight dilution factor, the
per-class gradient share, and root-to-leaf attenuation of powers of the
normalized adjacency on complete b-ary trees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._seeds import seed_sequence
from .graph import build_graph, normalize_sym, spmm
from .sbm import MINORITY, SBMConfig, generate_sbm

MAX_TREE_NODES = 100_000


@dataclass(frozen=True)
class TheoryConfig:
    p: float
    q: float
    beta: float
    eta1: float = 1.0
    eta2: float = 1.0
    sigma_max: float = 1.0
    L: int = 1

    def __post_init__(self):
        if min(self.eta1, self.eta2, self.sigma_max) <= 0:
            raise ValueError("eta1, eta2 and sigma_max must be positive")
        if self.L < 1:
            raise ValueError("L must be >= 1")

    @property
    def tau(self) -> float:
        return (self.q + self.p * self.beta) / (self.p + self.q * self.beta)


def propagation_matrix(p: float, q: float, beta: float) -> np.ndarray:
    """Centroid mixing matrix, rows/cols ordered (minority, majority)."""
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    if q < 0 or beta < 1:
        raise ValueError(f"need q >= 0 and beta >= 1, got q={q}, beta={beta}")
    mi_den = p + q * beta
    ma_den = q + p * beta
    return np.array([
        [p / mi_den, q * beta / ma_den],
        [q / mi_den, p * beta / ma_den],
    ])


def _eigenvalues_2x2(m):
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < -1e-12 * max(1.0, tr * tr):
        raise ValueError(f"matrix has complex eigenvalues (discriminant {disc:.3e})")
    root = math.sqrt(max(disc, 0.0))
    a, b = (tr + root) / 2.0, (tr - root) / 2.0
    return (a, b) if abs(a) >= abs(b) else (b, a)


def dominant_eigenvalue(m) -> float:
    return _eigenvalues_2x2(m)[0]


def second_eigenvalue(m) -> float:
    """Eigenvalue of smaller magnitude, from trace and determinant."""
    return _eigenvalues_2x2(m)[1]


def centroid_decay_curve(m, sigma_max, delta0, l_max):
    """Norm of the transient part of the minority/majority centroid gap.

    ``delta0`` holds the initial centroids (row 0 minority, row 1 majority;
    scalars or d-vectors). Centroids are iterated as ``z <- sigma_max * M z``.
    M always has an eigenvalue of exactly 1 whose eigenvector is not
    constant, so the raw gap settles at a nonzero floor; the returned
    curve subtracts that stationary mode (via the left eigenvector of the
    dominant eigenvalue) and reports ``||Delta^(l)||`` for ``l = 0..l_max``.
    """
    if l_max < 2:
        raise ValueError("l_max must be >= 2")
    m = np.asarray(m, dtype=np.float64)
    z = np.asarray(delta0, dtype=np.float64).reshape(2, -1)
    lam1 = dominant_eigenvalue(m)
    # left / right eigenvectors of the dominant eigenvalue
    u = _null_vector(m.T - lam1 * np.eye(2))
    v = _null_vector(m - lam1 * np.eye(2))
    if u is None:
        proj = np.zeros((2, 2))
    else:
        proj = np.outer(v, u) / (u @ v)
    out = []
    for _ in range(l_max + 1):
        transient = z - proj @ z
        out.append(float(np.linalg.norm(transient[0] - transient[1])))
        z = sigma_max * (m @ z)
    return np.array(out)


def _null_vector(a):
    # a is 2x2 and singular; pick the row with larger norm and rotate it
    r = a[0] if np.abs(a[0]).sum() >= np.abs(a[1]).sum() else a[1]
    if np.abs(r).sum() == 0.0:
        return None  # a == 0: every vector is an eigenvector, no unique mode
    vec = np.array([-r[1], r[0]])
    return vec / np.linalg.norm(vec)


def fit_geometric_rate(values, start, stop):
    """Least-squares slope of log(values[start:stop+1]) against layer index."""
    ls = np.arange(start, stop + 1)
    y = np.log(np.asarray(values)[start:stop + 1])
    slope = np.polyfit(ls, y, 1)[0]
    return float(np.exp(slope))


def path_weight_factor(beta: float, tau: float, L: int) -> float:
    """((beta + tau) / (tau (beta + 1)))^L."""
    if beta < 1 or tau < 1 or L < 0:
        raise ValueError("need beta >= 1, tau >= 1, L >= 0")
    return ((beta + tau) / (tau * (beta + 1.0))) ** L


def path_weight_binomial(beta: float, tau: float, L: int) -> float:
    """Explicit sum over the number of majority steps along the path."""
    p_mi = 1.0 / (beta + 1.0)
    p_ma = beta / (beta + 1.0)
    return math.fsum(math.comb(L, k) * (p_ma / tau) ** k * p_mi ** (L - k)
                     for k in range(L + 1))


def gradient_ratio(beta: float) -> float:
    if beta < 1:
        raise ValueError("beta must be >= 1")
    return 1.0 / beta


def sample_class_contributions(cfg: SBMConfig, path_len, num_paths, rng_seed):
    """Monte Carlo class shares of path-weighted gradient contributions.

    Draws ``num_paths`` random walks of length ``path_len`` from uniformly
    chosen start nodes on a fresh SBM sample. Path weight is taken to be
    degree-independent (the pooled mean walk weight), so each class
    contributes ``mean_weight * (#paths rooted in that class)``.
    Returns (minority_contribution, majority_contribution).
    """
    rng = np.random.default_rng(rng_seed)
    g, labels = generate_sbm(cfg, rng.integers(2**63))
    a = normalize_sym(g)
    starts = rng.integers(0, g.n, size=num_paths)
    weights = np.empty(num_paths)
    for i, s in enumerate(starts):
        node, w = s, 1.0
        for _ in range(path_len):
            lo, hi = a.row_ptr[node], a.row_ptr[node + 1]
            j = rng.integers(lo, hi)
            w *= a.weight[j]
            node = a.col_idx[j]
        weights[i] = w
    mean_w = weights.mean()
    n_mi = np.count_nonzero(labels[starts] == MINORITY)
    return mean_w * n_mi, mean_w * (num_paths - n_mi)


def monte_carlo_gradient_ratio(beta, trials=50, n2=40, p=0.3, q=0.05,
                               path_len=3, num_paths=400, rng_seed=0):
    """Ratio of summed minority to majority contributions over ``trials``
    independent SBM graphs with ``n1 = beta * n2``."""
    cfg = SBMConfig(n1=int(round(beta * n2)), n2=n2, p=p, q=q)
    seeds = seed_sequence(rng_seed).spawn(trials)
    mi = ma = 0.0
    for s in seeds:
        a, b = sample_class_contributions(cfg, path_len, num_paths, s)
        mi += a
        ma += b
    return mi / ma


def bary_tree_edges(b, depth):
    """Edges of the complete b-ary tree in BFS numbering (root = 0)."""
    n = (b ** (depth + 1) - 1) // (b - 1)
    if n > MAX_TREE_NODES:
        raise ValueError(f"tree with b={b}, depth={depth} has {n} nodes (cap {MAX_TREE_NODES})")
    child = np.arange(1, n)
    return np.column_stack([(child - 1) // b, child]), n


def jacobian_decay_check(b: int, r_max: int) -> np.ndarray:
    """``(A_hat^{r+1})[root, leaf]`` for r = 1..r_max.

    Each r uses the complete b-ary tree of depth r+1, so root and leaf
    are exactly r+1 hops apart. Powers are applied to the leaf indicator
    with sparse products.
    """
    if b < 2 or r_max < 1:
        raise ValueError("need b >= 2 and r_max >= 1")
    out = []
    for r in range(1, r_max + 1):
        edges, n = bary_tree_edges(b, r + 1)
        a = normalize_sym(build_graph(edges, n))
        vec = np.zeros(n)
        vec[n - 1] = 1.0  # last BFS node is a leaf
        for _ in range(r + 1):
            vec = spmm(a, vec)
        out.append(vec[0])
    return np.array(out)
