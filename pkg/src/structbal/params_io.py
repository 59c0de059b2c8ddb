"""Flat little-endian float64 parameter files.

Layout (every value stored as ``<f8``)::

    num_blocks
    ndim_0, dim_0_0, ..., ndim_1, ...     # shape header per block
    block_0 values (C order), block_1 values, ...
"""

from __future__ import annotations

import numpy as np

DTYPE = np.dtype("<f8")


def save_arrays(path, arrays):
    header = [float(len(arrays))]
    for a in arrays:
        a = np.asarray(a)
        header.append(float(a.ndim))
        header.extend(float(s) for s in a.shape)
    body = [np.asarray(a, dtype=DTYPE).ravel() for a in arrays]
    np.concatenate([np.asarray(header, dtype=DTYPE)] + body).tofile(path)


def load_arrays(path):
    flat = np.fromfile(path, dtype=DTYPE)
    if flat.size == 0:
        raise ValueError(f"{path}: empty parameter file")
    pos = 1
    shapes = []
    for _ in range(int(flat[0])):
        ndim = int(flat[pos])
        shapes.append(tuple(int(s) for s in flat[pos + 1:pos + 1 + ndim]))
        pos += 1 + ndim
    out = []
    for shape in shapes:
        size = int(np.prod(shape, dtype=np.int64))
        if pos + size > flat.size:
            raise ValueError(f"{path}: truncated parameter file")
        out.append(flat[pos:pos + size].reshape(shape).astype(np.float64))
        pos += size
    if pos != flat.size:
        raise ValueError(f"{path}: {flat.size - pos} trailing values after the last block")
    return out


def save_params(path, *params):
    """Write one or more param dataclasses (each exposing ``arrays()``)."""
    save_arrays(path, [a for p in params for a in p.arrays().values()])


def load_params(path, *classes):
    """Inverse of ``save_params`` for the given dataclass types, in order."""
    arrays = load_arrays(path)
    out = []
    for cls in classes:
        names = [f for f in cls.__dataclass_fields__]
        if len(arrays) < len(names):
            raise ValueError(f"{path}: not enough blocks for {cls.__name__}")
        out.append(cls(**dict(zip(names, arrays[:len(names)]))))
        arrays = arrays[len(names):]
    if arrays:
        raise ValueError(f"{path}: {len(arrays)} unused blocks")
    return out
