"""Dataset files, split protocols and flat key=value configuration."""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .graph import SparseGraph, build_graph, read_edge_list


@dataclass(eq=False)
class Dataset:
    graph: SparseGraph
    features: np.ndarray
    labels: np.ndarray
    names: list | None = None

    def __post_init__(self):
        if self.features.shape[0] != self.graph.n:
            raise ValueError(f"{self.features.shape[0]} feature rows for {self.graph.n} nodes")
        if self.labels.shape[0] != self.graph.n:
            raise ValueError(f"{self.labels.shape[0]} labels for {self.graph.n} nodes")
        if self.labels.min(initial=0) < 0:
            raise ValueError("labels must be non-negative class ids")

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1


def _read_id_rows(path, what):
    """Rows of a CSV whose first column is an integer node id.
    A non-numeric first line is treated as a header."""
    rows = {}
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), 1):
            if not rec or not "".join(rec).strip() or rec[0].lstrip().startswith("#"):
                continue
            try:
                node = int(rec[0])
                vals = [float(v) for v in rec[1:]]
            except ValueError:
                if lineno == 1:
                    continue
                raise ValueError(f"{path}:{lineno}: cannot parse {what} row {rec!r}") from None
            if node in rows:
                raise ValueError(f"{path}:{lineno}: duplicate node id {node}")
            rows[node] = vals
    return rows


def _dense_by_id(rows, path):
    n = len(rows)
    if set(rows) != set(range(n)):
        missing = sorted(set(range(n)) - set(rows))[:5]
        raise ValueError(f"{path}: node ids must be 0..{n - 1}; missing e.g. {missing}")
    return [rows[i] for i in range(n)]


def load_features(path) -> np.ndarray:
    rows = _dense_by_id(_read_id_rows(path, "feature"), path)
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: feature rows have differing widths {sorted(widths)}")
    return np.asarray(rows, dtype=np.float64)


def load_labels(path) -> np.ndarray:
    rows = _dense_by_id(_read_id_rows(path, "label"), path)
    for i, r in enumerate(rows):
        if len(r) != 1 or r[0] != int(r[0]):
            raise ValueError(f"{path}: node {i} needs exactly one integer label")
    return np.asarray([int(r[0]) for r in rows], dtype=np.int64)


def load_dataset(edge_path, feature_path, label_path) -> Dataset:
    x = load_features(feature_path)
    y = load_labels(label_path)
    if y.shape[0] != x.shape[0]:
        raise ValueError(f"row-count mismatch: {x.shape[0]} feature rows vs {y.shape[0]} labels")
    edges = read_edge_list(edge_path)
    n = x.shape[0]
    if edges.size:
        bad = edges[(edges < 0) | (edges >= n)]
        if bad.size:
            raise ValueError(f"{edge_path}: edge references unknown node id {int(bad[0])}")
    return Dataset(graph=build_graph(edges, n), features=x, labels=y)


def write_labels(labels, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "label"])
        w.writerows((i, int(c)) for i, c in enumerate(labels))


def write_matrix(x, path, header_prefix="f"):
    x = np.asarray(x)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id"] + [f"{header_prefix}{j}" for j in range(x.shape[1])])
        for i, row in enumerate(x):
            w.writerow([i] + [repr(float(v)) for v in row])


RATIO_SPLITS = {
    "wikics": (1, 1, 2),
    "corafull": (0.1, 0.4, 0.5),
}


@dataclass(frozen=True)
class SplitSpec:
    per_class_train: int = 20
    per_class_val: int = 25
    per_class_test: int = 55
    rho: float = 1.0
    seed: int = 0
    strategy: str = "step"  # "step", "wikics" or "corafull"

    def __post_init__(self):
        if min(self.per_class_train, self.per_class_val, self.per_class_test) < 1:
            raise ValueError("per-class counts must be >= 1")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must lie in (0, 1]")
        if self.strategy != "step" and self.strategy not in RATIO_SPLITS:
            raise ValueError(f"unknown split strategy {self.strategy!r}")


def minority_classes(num_classes):
    """The last ceil(C/2) class ids."""
    k = math.ceil(num_classes / 2)
    return list(range(num_classes - k, num_classes))


def minority_train_count(spec: SplitSpec) -> int:
    return math.ceil(round(spec.per_class_train * spec.rho, 9))


def make_step_split(labels, spec: SplitSpec):
    """Boolean (train, val, test) masks.

    ``step``: majority classes keep ``per_class_train`` training nodes,
    minority classes ceil(per_class_train * rho); val/test counts are the
    same for every class. Ratio strategies split each class proportionally.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    num_classes = int(labels.max()) + 1
    rng = np.random.default_rng(spec.seed)
    masks = [np.zeros(n, dtype=bool) for _ in range(3)]
    minority = set(minority_classes(num_classes))
    for c in range(num_classes):
        members = np.flatnonzero(labels == c)
        members = members[rng.permutation(members.size)]
        if spec.strategy == "step":
            n_train = minority_train_count(spec) if c in minority else spec.per_class_train
            counts = (n_train, spec.per_class_val, spec.per_class_test)
            need = spec.per_class_train + spec.per_class_val + spec.per_class_test
            if members.size < need:
                raise ValueError(f"class {c} has {members.size} nodes, "
                                 f"{need - members.size} short of the {need} required")
        else:
            r = np.asarray(RATIO_SPLITS[spec.strategy], dtype=float)
            r = r / r.sum()
            n_train = max(1, int(round(r[0] * members.size)))
            n_val = int(round(r[1] * members.size))
            counts = (n_train, n_val, members.size - n_train - n_val)
            if min(counts) < 1:
                raise ValueError(f"class {c} with {members.size} nodes is too small for "
                                 f"the {spec.strategy} split")
        start = 0
        for mask, cnt in zip(masks, counts):
            mask[members[start:start + cnt]] = True
            start += cnt
    return tuple(masks)


def _coerce(value: str, default):
    if isinstance(default, bool):
        low = value.strip().lower()
        if low not in ("1", "0", "true", "false", "yes", "no"):
            raise ValueError(f"not a boolean: {value!r}")
        return low in ("1", "true", "yes")
    if isinstance(default, tuple):
        return tuple(int(v) for v in value.replace(",", " ").split())
    return type(default)(value.strip())


def parse_config(text, cls):
    """Parse ``key = value`` lines into dataclass ``cls``; ``#`` comments allowed."""
    defaults = {f.name: f.default for f in dataclasses.fields(cls)}
    kw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in defaults:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        try:
            kw[key] = _coerce(value, defaults[key])
        except ValueError as exc:
            raise ValueError(f"config line {lineno}: bad value for {key}: {exc}") from None
    return cls(**kw)


def format_config(cfg) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(str(s) for s in v)
        elif isinstance(v, bool):
            v = str(v).lower()
        lines.append(f"{f.name}={v}")
    return "\n".join(lines) + "\n"
