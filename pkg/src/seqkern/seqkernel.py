"""Sequential kernels: turn a static kernel into a kernel on sequences.

The value of the sequential kernel at truncation level M is

    1 + sum over equal-length pairs of increasing index tuples (i, j),
        lengths 1..M, of prod_r K[i_r, j_r] / (i! * j!)

where K is the increment matrix of the base kernel and i! is the product of
multiplicity factorials (only relevant for order > 1, where tuples may be
non-decreasing with up to ``order`` repeats per value).  Three evaluation
routes are provided:

* ``seq_kernel_naive``  -- literal enumeration; the oracle, guarded to tiny inputs;
* ``seq_kernel_dp``     -- Horner-style dynamic program, order 1, O(M L L');
* ``seq_kernel_dp_high``-- dynamic program for general order, O(D^2 M L L').

The string kernel is the special case of an indicator base kernel with a
geometric span penalty; it gets its own dynamic program.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelSpec, increment_gram, kernel_matrix
from .sequences import (
    Sequence,
    enumerate_monotone_subtuples,
    tuple_factorial,
)

ALGORITHMS = ("naive", "dp", "dp-high", "lowrank", "lowrank-joint")

_NAIVE_MAX_LEVEL = 6
_NAIVE_MAX_LEN = 10


@dataclass(frozen=True)
class SeqKernelConfig:
    """Configuration of a sequential kernel evaluation.

    level:          truncation level M >= 1
    order:          per-step approximation order D, 1 <= D <= level
    base:           static KernelSpec (or a callable kernel matrix function)
    use_increments: if False, the dynamic programs run on the raw kernel
                    matrix k(s[i], t[j]) instead of the increment matrix
                    (numerically unstable for long sequences; off by default)
    algorithm:      one of {"naive", "dp", "dp-high", "lowrank", "lowrank-joint"}
    mesh_normalize: divide the input matrix by its entry count, turning index
                    sums into averages (off by default)
    """

    level: int
    order: int = 1
    base: object = field(default_factory=lambda: KernelSpec("linear"))
    use_increments: bool = True
    algorithm: str = "dp"
    mesh_normalize: bool = False

    def __post_init__(self):
        if not (1 <= self.order <= self.level <= 20):
            raise ValueError("need 1 <= order <= level <= 20")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


def dp_input_matrix(cfg: SeqKernelConfig, s: Sequence, t: Sequence) -> np.ndarray:
    """The matrix the dynamic programs consume for the pair (s, t)."""
    if cfg.use_increments:
        K = increment_gram(cfg.base, s, t)
    else:
        K = kernel_matrix(cfg.base, s.points, t.points)
    if cfg.mesh_normalize and K.size:
        K = K / K.size
    return K


# strict-shift cumulative sums: entry (i, j) accumulates strictly earlier
# rows/columns, matching strict subtuple semantics.


def _shifted_cumsum_both(A: np.ndarray) -> np.ndarray:
    out = np.zeros_like(A)
    out[1:, 1:] = np.cumsum(np.cumsum(A, axis=0), axis=1)[:-1, :-1]
    return out


def _shifted_cumsum_axis(A: np.ndarray, axis: int) -> np.ndarray:
    out = np.zeros_like(A)
    c = np.cumsum(A, axis=axis)
    if axis == 0:
        out[1:, :] = c[:-1, :]
    else:
        out[:, 1:] = c[:, :-1]
    return out


def seq_kernel_naive(cfg: SeqKernelConfig, s: Sequence, t: Sequence) -> float:
    """Brute-force sequential kernel by explicit tuple-pair enumeration.

    Guarded to level <= 6 and sequence length <= 10; beyond that the term
    count explodes and the dynamic programs should be used instead.
    """
    if cfg.level > _NAIVE_MAX_LEVEL or s.length > _NAIVE_MAX_LEN or t.length > _NAIVE_MAX_LEN:
        raise ValueError("input too large for the enumeration oracle; use dp")
    K = dp_input_matrix(cfg, s, t)
    n, m = K.shape
    total = 1.0  # empty index-tuple pair
    if n == 0 or m == 0:
        return total
    rows = _tuples_by_length(n, cfg.level, cfg.order)
    cols = _tuples_by_length(m, cfg.level, cfg.order)
    for length in range(1, cfg.level + 1):
        R, wr = rows.get(length, (None, None))
        C, wc = cols.get(length, (None, None))
        if R is None or C is None:
            continue
        prod = np.ones((R.shape[0], C.shape[0]))
        for r in range(length):
            prod *= K[R[:, r][:, None], C[:, r][None, :]]
        total += float((wr[:, None] * wc[None, :] * prod).sum())
    return total


def _tuples_by_length(n: int, max_len: int, max_repeat: int) -> dict:
    by_len: dict = {}
    for tup in enumerate_monotone_subtuples(n, max_len, max_repeat):
        if tup:
            by_len.setdefault(len(tup), []).append(tup)
    return {
        length: (
            np.asarray(tups, dtype=np.intp),
            np.asarray([1.0 / tuple_factorial(tp) for tp in tups]),
        )
        for length, tups in by_len.items()
    }


def seq_kernel_dp(cfg: SeqKernelConfig, s: Sequence, t: Sequence) -> float:
    """Order-1 sequential kernel via the Horner-type dynamic program.

    A starts as K; each pass replaces A by K * (1 + shifted cumulative sum
    of A), so that after pass m entry (i, j) holds all tuple pairs of length
    <= m ending at (i, j).  The final value is 1 + sum(A).  O(M L L') time,
    O(L L') working memory (A is overwritten in place each level).
    """
    K = dp_input_matrix(cfg, s, t)
    return _dp_from_matrix(K, cfg.level)


def _dp_from_matrix(K: np.ndarray, level: int) -> float:
    n, m = K.shape
    if n == 0 or m == 0:
        return 1.0
    A = K.copy()
    # passes beyond min(n, m) cannot add longer tuples; A has stabilized
    for _ in range(2, min(level, n, m) + 1):
        A = K * (1.0 + _shifted_cumsum_both(A))
    return 1.0 + float(A.sum())


def seq_kernel_dp_high(cfg: SeqKernelConfig, s: Sequence, t: Sequence) -> float:
    """General-order sequential kernel via the four-branch dynamic program.

    The state A[d, d', :, :] holds, per end position (i, j), the weighted sum
    over tuple pairs whose final values repeat exactly d times on the row
    side and d' times on the column side (d, d' <= order).  Each pass extends
    pairs by one position via the four branches: fresh start on both sides,
    repeat the row value (weight 1/d), repeat the column value (weight 1/d'),
    or repeat both (weight 1/(d d')).
    """
    K = dp_input_matrix(cfg, s, t)
    return _dp_high_from_matrix(K, cfg.level, cfg.order)


def _dp_high_from_matrix(K: np.ndarray, level: int, order: int) -> float:
    if order == 1:
        return _dp_from_matrix(K, level)
    n, m = K.shape
    if n == 0 or m == 0:
        return 1.0
    A = np.zeros((order, order, n, m))
    A[0, 0] = K
    # with up to `order` repeats per value, tuples cannot exceed order*min(n, m)
    for lvl in range(2, min(level, order * n, order * m) + 1):
        new = np.zeros_like(A)
        new[0, 0] = K * (1.0 + _shifted_cumsum_both(A.sum(axis=(0, 1))))
        for d in range(2, min(order, lvl) + 1):
            new[d - 1, 0] = (1.0 / d) * K * _shifted_cumsum_axis(A[d - 2].sum(axis=0), axis=1)
            new[0, d - 1] = (1.0 / d) * K * _shifted_cumsum_axis(A[:, d - 2].sum(axis=0), axis=0)
            for dd in range(2, min(order, lvl) + 1):
                new[d - 1, dd - 1] = (1.0 / (d * dd)) * K * A[d - 2, dd - 2]
        A = new
    return 1.0 + float(A.sum())


def seq_kernel(cfg: SeqKernelConfig, s: Sequence, t: Sequence) -> float:
    """Evaluate the sequential kernel with the algorithm named in cfg."""
    if cfg.algorithm == "naive":
        return seq_kernel_naive(cfg, s, t)
    if cfg.algorithm == "dp":
        if cfg.order != 1:
            raise ValueError("algorithm 'dp' requires order 1; use 'dp-high'")
        return seq_kernel_dp(cfg, s, t)
    if cfg.algorithm == "dp-high":
        return seq_kernel_dp_high(cfg, s, t)
    if cfg.algorithm in ("lowrank", "lowrank-joint"):
        from .lowrank import seq_kernel_lowrank

        return seq_kernel_lowrank(cfg, s, t)
    raise ValueError(f"unknown algorithm {cfg.algorithm!r}")


# string kernel ----------------------------------------------------------


def _symbol_codes(symbols) -> list:
    return list(symbols)


def string_kernel(lam: float, sigma, tau, max_len: int) -> float:
    """Subsequence kernel on symbol strings with span penalty lambda.

    Sums, over equal-length pairs of strictly increasing index tuples whose
    selected symbols agree, lam ** (span(i) + span(j)) where span(i) is
    last - first + 1; the empty pair contributes 1.  ``max_len`` caps the
    subsequence length.  Evaluated by a dynamic program over match matrices
    with geometrically weighted prefix scans, O(max_len * L * L').
    """
    if not lam > 0.0:
        raise ValueError("lambda must be positive")
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    s = _symbol_codes(sigma)
    t = _symbol_codes(tau)
    Ls, Lt = len(s), len(t)
    if Ls == 0 or Lt == 0 or max_len == 0:
        return 1.0
    match = np.array([[1.0 if a == b else 0.0 for b in t] for a in s])
    # B[i, j]: weighted sum over matching pairs of length m ending at (i, j),
    # carrying lam ** ((i - i_first) + (j - j_first)); the remaining lam**2
    # from the span definition is applied once at the end.
    B = match.copy()
    total = B.sum()
    for _ in range(2, min(max_len, Ls, Lt) + 1):
        B = match * _geometric_prescan(_geometric_prescan(B, lam, axis=0), lam, axis=1)
        total += B.sum()
    return 1.0 + lam * lam * float(total)


def _geometric_prescan(X: np.ndarray, lam: float, axis: int) -> np.ndarray:
    """out[i] = sum_{i' < i} lam**(i - i') * X[i'] along the given axis."""
    Xm = np.moveaxis(X, axis, 0)
    out = np.zeros_like(Xm)
    acc = np.zeros_like(Xm[0])
    for i in range(1, Xm.shape[0]):
        acc = lam * (Xm[i - 1] + acc)
        out[i] = acc
    return np.moveaxis(out, 0, axis)


def string_to_cumulative_onehot(symbols, alphabet) -> Sequence:
    """Embed a symbol string as the cumulative one-hot count sequence.

    The r-th increment of the embedded sequence is the unit vector of the
    r-th symbol, so the linear kernel on this embedding reproduces symbol
    agreement; the lambda=1 string kernel equals its sequentialization.
    """
    alphabet = list(alphabet)
    index = {a: i for i, a in enumerate(alphabet)}
    pts = np.zeros((len(list(symbols)) + 1, len(alphabet)))
    for r, ch in enumerate(symbols):
        pts[r + 1] = pts[r]
        pts[r + 1, index[ch]] += 1.0
    return Sequence(pts)
