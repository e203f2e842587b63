"""Static base kernels and the increment cross-matrix they induce.

Three built-in kernels:

* linear:    k(x, y) = gamma * <x, y>
* gaussian:  k(x, y) = theta * exp(-0.5 * gamma^2 * ||x - y||^2)
* indicator: k(x, y) = 1 if x == y exactly, else 0 (symbol semantics)

Any user-supplied symmetric function of two point arrays may be used in
place of a spec; positive semi-definiteness is then the caller's
responsibility.  The increment matrix is the four-point second difference
of the base kernel on two sequences' grids and is the sole input of all
sequential-kernel algorithms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sequences import Sequence

KERNEL_KINDS = ("linear", "gaussian", "indicator")


@dataclass(frozen=True)
class KernelSpec:
    """Identifies a static kernel and its parameters (gamma, theta > 0)."""

    kind: str
    gamma: float = 1.0
    theta: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}, expected one of {KERNEL_KINDS}")
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        if not self.theta > 0.0:
            raise ValueError("theta must be positive")


def kernel_matrix(spec, X, Y) -> np.ndarray:
    """Pairwise kernel matrix between the rows of X (n, d) and Y (m, d).

    ``spec`` is a KernelSpec or a callable (X, Y) -> (n, m) array.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise ValueError("dimension mismatch between point sets")
    if callable(spec):
        return np.asarray(spec(X, Y), dtype=np.float64)
    if spec.kind == "linear":
        return spec.gamma * (X @ Y.T)
    if spec.kind == "gaussian":
        sq = (
            (X * X).sum(axis=1)[:, None]
            + (Y * Y).sum(axis=1)[None, :]
            - 2.0 * (X @ Y.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return spec.theta * np.exp(-0.5 * spec.gamma**2 * sq)
    # indicator: exact equality of the full vectors
    return (X[:, None, :] == Y[None, :, :]).all(axis=2).astype(np.float64)


def kernel_eval(spec, x, y) -> float:
    """Single kernel evaluation k(x, y) between two points."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    return float(kernel_matrix(spec, x[None, :], y[None, :])[0, 0])


@dataclass(frozen=True)
class IncrementMatrix:
    """Four-point difference matrix of a base kernel on two sequences.

    values[i, j] = k(s[i+1], t[j+1]) + k(s[i], t[j])
                 - k(s[i], t[j+1]) - k(s[i+1], t[j]),
    one row per increment of s, one column per increment of t.  For the
    linear kernel this is gamma * <ds_i, dt_j>.  A length-1 input yields an
    empty (0-row or 0-column) matrix that callers must treat as "no terms".
    """

    values: np.ndarray
    spec: object = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape


def increment_gram(spec, s: Sequence, t: Sequence) -> np.ndarray:
    """Raw (L-1) x (L'-1) increment matrix as an ndarray."""
    if s.dim != t.dim:
        raise ValueError("dimension mismatch between sequences")
    K = kernel_matrix(spec, s.points, t.points)
    return K[1:, 1:] + K[:-1, :-1] - K[:-1, 1:] - K[1:, :-1]


def increment_matrix(spec, s: Sequence, t: Sequence) -> IncrementMatrix:
    return IncrementMatrix(increment_gram(spec, s, t), spec)
