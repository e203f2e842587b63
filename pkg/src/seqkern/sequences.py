"""Sequence containers and index-tuple utilities.

A sequence is an ordered list of points in R^d.  Everything downstream
(signatures, sequential kernels) consumes either the points themselves or
their first-difference sequence.  Index tuples over ``range(L)`` come in two
flavours: strictly increasing ("strict") and non-decreasing ("monotone",
optionally with a cap on how often a value may repeat).  The enumerators here
are deliberately naive; they back the brute-force oracles that the fast
algorithms are tested against.

Indices are 0-based throughout the public API.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence as SequenceABC

import numpy as np


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
        raise ValueError("points must be a non-empty list of equal-dimension vectors")
    return pts


@dataclass(frozen=True)
class Sequence:
    """An ordered tuple of points in R^d, optionally with timestamps in [0,1].

    Invariants: all points share the dimension d >= 1; length L >= 1;
    timestamps, if present, are strictly increasing and lie in [0, 1].
    Instances are immutable (the underlying arrays are marked read-only),
    so they are safe to share across threads.
    """

    points: np.ndarray
    timestamps: np.ndarray | None = field(default=None)

    def __post_init__(self):
        pts = _as_points(self.points)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.timestamps is not None:
            ts = np.asarray(self.timestamps, dtype=np.float64)
            if ts.shape != (pts.shape[0],):
                raise ValueError("timestamps must have one entry per point")
            if np.any(ts < 0.0) or np.any(ts > 1.0):
                raise ValueError("timestamps must lie in [0, 1]")
            if np.any(np.diff(ts) <= 0.0):
                raise ValueError("timestamps must be strictly increasing")
            ts.setflags(write=False)
            object.__setattr__(self, "timestamps", ts)

    @property
    def length(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def reversed(self) -> "Sequence":
        return Sequence(self.points[::-1].copy())

    def scaled(self, c: float) -> "Sequence":
        return Sequence(c * self.points)


def increments(s: Sequence) -> np.ndarray:
    """First-difference sequence, shape (L-1, d).

    A length-1 sequence yields an empty (0, d) array; not an error.
    """
    return np.diff(s.points, axis=0)


def variation(s: Sequence) -> float:
    """Sum of Euclidean norms of the increments (0.0 for L = 1)."""
    if s.length < 2:
        return 0.0
    return float(np.linalg.norm(increments(s), axis=1).sum())


def mesh(s: Sequence) -> float:
    """Largest Euclidean increment norm.  Requires L >= 2."""
    if s.length < 2:
        raise ValueError("mesh undefined: sequence has no increments")
    return float(np.linalg.norm(increments(s), axis=1).max())


def cumulative_points(incs, start=None) -> Sequence:
    """Inverse of :func:`increments`: prepend a start point and cumulative-sum.

    ``increments(cumulative_points(v))`` recovers ``v`` exactly.
    """
    incs = np.atleast_2d(np.asarray(incs, dtype=np.float64))
    d = incs.shape[1]
    first = np.zeros(d) if start is None else np.asarray(start, dtype=np.float64)
    pts = np.vstack([first[None, :], first[None, :] + np.cumsum(incs, axis=0)])
    return Sequence(pts)


def concat(s: Sequence, t: Sequence) -> Sequence:
    """Concatenate two sequences that share an endpoint (s.last == t.first)."""
    if s.dim != t.dim:
        raise ValueError("dimension mismatch")
    if not np.array_equal(s.points[-1], t.points[0]):
        raise ValueError("sequences must share an endpoint to concatenate")
    return Sequence(np.vstack([s.points, t.points[1:]]))


# index tuples -----------------------------------------------------------


@dataclass(frozen=True)
class IndexTuple:
    """A tuple of 0-based indices into a host sequence of length L."""

    indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if any(i < 0 for i in self.indices):
            raise ValueError("indices must be non-negative")

    def __len__(self) -> int:
        return len(self.indices)

    def is_strict(self) -> bool:
        return all(a < b for a, b in zip(self.indices, self.indices[1:]))

    def is_monotone(self) -> bool:
        return all(a <= b for a, b in zip(self.indices, self.indices[1:]))

    def max_repeat(self) -> int:
        """Count of the most frequent index (0 for the empty tuple)."""
        if not self.indices:
            return 0
        return max(self.indices.count(v) for v in set(self.indices))

    def factorial(self) -> float:
        return tuple_factorial(self.indices)


def tuple_factorial(indices) -> float:
    """Product of factorials of the multiplicities of the values in ``indices``.

    Equals 1.0 for strict tuples and for the empty tuple.
    """
    f = 1.0
    run = 1
    for a, b in zip(indices, indices[1:]):
        if a == b:
            run += 1
            f *= run
        else:
            run = 1
    return f


def enumerate_strict_subtuples(L: int, max_len: int) -> Iterator[tuple]:
    """Yield every strictly increasing tuple over range(L) of length 0..max_len.

    Includes the empty tuple; the total count is sum_m C(L, m).
    """
    if L < 0 or max_len < 0:
        raise ValueError("L and max_len must be non-negative")
    yield ()
    stack = [(i,) for i in range(L - 1, -1, -1)]
    while stack:
        cur = stack.pop()
        yield cur
        if len(cur) < max_len:
            for nxt in range(L - 1, cur[-1], -1):
                stack.append(cur + (nxt,))


def enumerate_monotone_subtuples(L: int, max_len: int, max_repeat: int) -> Iterator[tuple]:
    """Yield every non-decreasing tuple over range(L) of length 0..max_len
    in which no value repeats more than ``max_repeat`` times.

    Includes the empty tuple.  ``max_repeat=1`` reduces to the strict case.
    """
    if L < 0 or max_len < 0:
        raise ValueError("L and max_len must be non-negative")
    if max_repeat < 1:
        raise ValueError("max_repeat must be >= 1")

    def rec(start: int, cur: list) -> Iterator[tuple]:
        yield tuple(cur)
        if len(cur) == max_len:
            return
        for v in range(start, L):
            run = 1 if (not cur or cur[-1] != v) else _tail_run(cur) + 1
            if run > max_repeat:
                continue
            cur.append(v)
            yield from rec(v, cur)
            cur.pop()

    def _tail_run(cur: list) -> int:
        n = 0
        for v in reversed(cur):
            if v != cur[-1]:
                break
            n += 1
        return n

    yield from rec(0, [])
