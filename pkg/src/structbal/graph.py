"""CSR graph storage, symmetric normalization and sparse products."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """Undirected graph in canonical CSR form (columns sorted per row)."""

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    weight: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.col_idx.shape[0])

    @property
    def num_edges(self) -> int:
        """Undirected edge count, self-loops counted once."""
        rows = self.rows()
        loops = int(np.count_nonzero(rows == self.col_idx))
        return (self.nnz - loops) // 2 + loops

    def rows(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), np.diff(self.row_ptr))

    def neighbors(self, i: int) -> np.ndarray:
        return self.col_idx[self.row_ptr[i]:self.row_ptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def edge_pairs(self) -> np.ndarray:
        """Upper-triangular (u, v) pairs with u < v."""
        rows = self.rows()
        keep = rows < self.col_idx
        return np.column_stack([rows[keep], self.col_idx[keep]])

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.weight, self.col_idx, self.row_ptr), shape=(self.n, self.n))

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def same_structure(self, other: "SparseGraph") -> bool:
        return (self.n == other.n
                and np.array_equal(self.row_ptr, other.row_ptr)
                and np.array_equal(self.col_idx, other.col_idx)
                and np.array_equal(self.weight, other.weight))


class NormAdj(SparseGraph):
    """D^-1/2 (A + I) D^-1/2 in the same CSR layout; every diagonal entry stored."""


def _from_coo(n, rows, cols, vals, cls=SparseGraph):
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=row_ptr[1:])
    return cls(n=int(n), row_ptr=row_ptr, col_idx=cols.astype(np.int64),
               weight=vals.astype(np.float64))


def _check_ids(edges, n):
    if edges.size == 0:
        return
    bad = np.flatnonzero((edges < 0).any(axis=1) | (edges >= n).any(axis=1))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"edge {i} {tuple(int(x) for x in edges[i])} has a node id outside [0, {n})")


def _as_edge_array(edge_list):
    edges = np.asarray(edge_list, dtype=np.int64)
    if edges.size == 0:
        return edges.reshape(0, 2)
    if edges.ndim != 2 or edges.shape[1] != 2:
        raise ValueError("edge list must be a sequence of (u, v) pairs")
    return edges


def build_graph(edge_list, n: int, weights=None) -> SparseGraph:
    """Build a symmetric, deduplicated CSR graph.

    Self-loops are dropped. With duplicate pairs (in either direction) the
    first occurrence's weight wins.
    """
    edges = _as_edge_array(edge_list)
    _check_ids(edges, n)
    if weights is None:
        w = np.ones(len(edges))
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (len(edges),):
            raise ValueError("weights must have one entry per edge")
    keep = edges[:, 0] != edges[:, 1]
    edges, w = edges[keep], w[keep]
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    _, first = np.unique(lo * n + hi, return_index=True)
    lo, hi, w = lo[first], hi[first], w[first]
    rows = np.concatenate([lo, hi])
    cols = np.concatenate([hi, lo])
    return _from_coo(n, rows, cols, np.concatenate([w, w]))


def add_edges(g: SparseGraph, new_edges) -> SparseGraph:
    """Insert undirected edges; pairs already present keep their weight."""
    edges = _as_edge_array(new_edges)
    _check_ids(edges, g.n)
    old = g.edge_pairs()
    old_w = g.weight[g.rows() < g.col_idx]
    all_edges = np.concatenate([old, edges])
    all_w = np.concatenate([old_w, np.ones(len(edges))])
    return build_graph(all_edges, g.n, weights=all_w)


def normalize_sym(g: SparseGraph) -> NormAdj:
    rows = g.rows()
    off = rows != g.col_idx
    rows, cols, vals = rows[off], g.col_idx[off], g.weight[off]
    diag = np.arange(g.n)
    rows = np.concatenate([rows, diag])
    cols = np.concatenate([cols, diag])
    vals = np.concatenate([vals, np.ones(g.n)])
    deg = np.bincount(rows, weights=vals, minlength=g.n)
    inv_sqrt = 1.0 / np.sqrt(deg)
    vals = inv_sqrt[rows] * vals * inv_sqrt[cols]
    return _from_coo(g.n, rows, cols, vals, cls=NormAdj)


def spmm(a: SparseGraph, z: np.ndarray) -> np.ndarray:
    """Return A @ z for CSR A and dense z (vector or matrix)."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape[0] != a.n:
        raise ValueError(f"dimension mismatch: matrix has {a.n} rows, operand has {z.shape[0]}")
    return np.asarray(a.to_scipy() @ z)


def perturb_edges(a: NormAdj, p_drop: float, rng_seed) -> NormAdj:
    """Drop each undirected off-diagonal entry with prob ``p_drop`` and
    rescale survivors by 1/(1-p_drop). Diagonal entries are never dropped."""
    if not 0.0 <= p_drop < 1.0:
        raise ValueError(f"p_drop must lie in [0, 1), got {p_drop}")
    if p_drop == 0.0:
        return a
    rng = np.random.default_rng(rng_seed)
    rows = a.rows()
    cols = a.col_idx
    off = rows != cols
    key = np.minimum(rows, cols) * a.n + np.maximum(rows, cols)
    uniq, inv = np.unique(key[off], return_inverse=True)
    keep_edge = rng.random(uniq.shape[0]) >= p_drop
    keep = np.ones(a.nnz, dtype=bool)
    keep[off] = keep_edge[inv]
    vals = a.weight.copy()
    vals[off] /= (1.0 - p_drop)
    return _from_coo(a.n, rows[keep], cols[keep], vals[keep], cls=NormAdj)


def read_edge_list(path) -> np.ndarray:
    """Parse a whitespace-separated ``u v`` file; ``#`` starts a comment."""
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer node id in {line!r}") from None
    return _as_edge_array(pairs)


def write_edge_list(g: SparseGraph, path, header=None):
    with open(path, "w") as fh:
        if header:
            fh.write(f"# {header}\n")
        for u, v in g.edge_pairs():
            fh.write(f"{u} {v}\n")
