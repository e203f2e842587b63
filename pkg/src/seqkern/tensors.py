"""Truncated tensor algebra over R^d.

Elements are graded: level m is a dense tensor with d**m entries, stored flat
in row-major order (index (i_1,...,i_m) maps to sum_k i_k * d**(m-k)).  The
product concatenates grades and truncates; the inner product is level-wise.
This module is the exact oracle and feature engine for small d and M; dense
d**M storage is accepted by design.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .sequences import Sequence, increments

MAX_LEVEL = 20


@dataclass
class TruncatedTensor:
    """Graded element of the tensor algebra over R^d, levels 0..level."""

    dim: int
    level: int
    levels: list  # levels[m] is a flat float64 array with dim**m entries

    def __post_init__(self):
        if self.dim < 1 or self.level < 0:
            raise ValueError("need dim >= 1 and level >= 0")
        if len(self.levels) != self.level + 1:
            raise ValueError("levels list must have level+1 entries")
        fixed = []
        for m, arr in enumerate(self.levels):
            a = np.asarray(arr, dtype=np.float64).ravel()
            if a.size != self.dim**m:
                raise ValueError(f"level {m} must have dim**{m} entries")
            fixed.append(a)
        self.levels = fixed

    def copy(self) -> "TruncatedTensor":
        return TruncatedTensor(self.dim, self.level, [a.copy() for a in self.levels])

    def level_matrix(self, m: int) -> np.ndarray:
        """Level m reshaped to its natural (d, ..., d) tensor shape."""
        return self.levels[m].reshape((self.dim,) * m)


def tensor_unit(dim: int, level: int) -> TruncatedTensor:
    """The multiplicative unit (1, 0, ..., 0)."""
    levels = [np.zeros(dim**m) for m in range(level + 1)]
    levels[0][0] = 1.0
    return TruncatedTensor(dim, level, levels)


def tensor_zero(dim: int, level: int) -> TruncatedTensor:
    return TruncatedTensor(dim, level, [np.zeros(dim**m) for m in range(level + 1)])


def tensor_add(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    lvl = min(a.level, b.level)
    return TruncatedTensor(a.dim, lvl, [a.levels[m] + b.levels[m] for m in range(lvl + 1)])


def tensor_mul(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Graded (non-commutative) product, truncated at min(a.level, b.level).

    Level m of the result is sum_i a_i (x) b_{m-i}; for flat row-major
    storage the tensor product of levels is the raveled outer product.
    """
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    lvl = min(a.level, b.level)
    out = [np.zeros(a.dim**m) for m in range(lvl + 1)]
    for m in range(lvl + 1):
        acc = out[m]
        for i in range(m + 1):
            acc += np.outer(a.levels[i], b.levels[m - i]).ravel()
    return TruncatedTensor(a.dim, lvl, out)


def tensor_inner(a: TruncatedTensor, b: TruncatedTensor) -> float:
    """Level-wise inner product up to min(a.level, b.level).

    Elements homogeneous in different degrees are orthogonal by construction.
    """
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    lvl = min(a.level, b.level)
    return float(sum(float(a.levels[m] @ b.levels[m]) for m in range(lvl + 1)))


def tensor_norm(a: TruncatedTensor) -> float:
    return math.sqrt(max(tensor_inner(a, a), 0.0))


def _step_exponential(v: np.ndarray, level: int, order: int) -> TruncatedTensor:
    """sum_{m=0}^{order} v^(x)m / m!, truncated at ``level``."""
    d = v.size
    levels = [np.zeros(d**m) for m in range(level + 1)]
    levels[0][0] = 1.0
    cur = np.ones(1)
    for m in range(1, min(order, level) + 1):
        cur = np.outer(cur, v).ravel()
        levels[m] = cur / math.factorial(m)
    return TruncatedTensor(d, level, levels)


def discrete_signature(s: Sequence, level: int, order: int = 1) -> TruncatedTensor:
    """Step-wise tensor-exponential signature of a sequence.

    Multiplies, over the increment sequence, the per-step factors
    sum_{m=0}^{order} (increment)^(x)m / m!, truncating at ``level`` inside
    every multiplication.  ``order=1`` is the plain discrete signature; a
    length-1 sequence gives the unit.
    """
    if level < 0 or level > MAX_LEVEL:
        raise ValueError("level too large")
    if order < 1:
        raise ValueError("order must be >= 1")
    result = tensor_unit(s.dim, level)
    for v in increments(s):
        result = tensor_mul(result, _step_exponential(v, level, order))
    return result


def exact_pcwlinear_signature(s: Sequence, level: int) -> TruncatedTensor:
    """Truncated signature of the piecewise-linear path through s.points.

    Equals the product over segments of the full truncated tensor
    exponential of each increment, i.e. the order-D signature with D=level.
    """
    return discrete_signature(s, level, order=level if level >= 1 else 1)


def shuffle_defect_level2(t: TruncatedTensor) -> float:
    """Frobenius norm of level1 (x) level1 - level2 - level2^T.

    Zero exactly when the level-2 shuffle identity holds (group-like
    elements, e.g. signatures of actual paths).
    """
    if t.level < 2:
        raise ValueError("need level >= 2")
    g1 = t.levels[1]
    g2 = t.level_matrix(2)
    return float(np.linalg.norm(np.outer(g1, g1) - g2 - g2.T))


def discretization_error_bound(segment_variations) -> float:
    """exp(sum v_i) - prod(1 + v_i) for nonnegative per-segment variations.

    Upper-bounds the tensor-algebra distance between the discrete signature
    on a grid and the signature of the underlying path, where v_i is the
    path's variation on the i-th grid segment.
    """
    v = np.asarray(segment_variations, dtype=np.float64)
    if v.size == 0:
        raise ValueError("need at least one segment")
    if np.any(v < 0.0):
        raise ValueError("segment variations must be nonnegative")
    return float(np.exp(v.sum()) - np.prod(1.0 + v))


def tensor_to_json(t: TruncatedTensor) -> str:
    """Flat debugging export: dim, level, concatenated level arrays."""
    flat = np.concatenate(t.levels) if t.levels else np.zeros(0)
    return json.dumps({"dim": t.dim, "level": t.level, "data": flat.tolist()})


def tensor_from_json(text: str) -> TruncatedTensor:
    obj = json.loads(text)
    dim, level = int(obj["dim"]), int(obj["level"])
    data = np.asarray(obj["data"], dtype=np.float64)
    levels, pos = [], 0
    for m in range(level + 1):
        n = dim**m
        levels.append(data[pos : pos + n])
        pos += n
    if pos != data.size:
        raise ValueError("data length does not match dim/level")
    return TruncatedTensor(dim, level, levels)
