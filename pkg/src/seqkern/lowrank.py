"""Low-rank factor algebra and length-linear sequential-kernel evaluation.

A pair (U, V) with U of shape (a, r) and V of shape (b, r) presents the
matrix A = U V^T; r is the presentation rank, which may exceed the matrix
rank.  Shifting, cumulative summation, summation, entrywise addition and
entrywise multiplication of presented matrices all lift to cheap operations
on the factors alone, which turns the quadratic sequential-kernel dynamic
program into one that is linear in sequence length.  A joint presentation of
all pairwise increment matrices of a dataset further collapses the Gram
computation to one factor recursion per sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import kernel_matrix
from .sequences import Sequence, increments


def cumsum_vector(v) -> np.ndarray:
    """Running sums of a vector: out[k] = sum of v[:k+1].  O(n)."""
    return np.cumsum(np.asarray(v, dtype=np.float64))


def cumsum_array(A, axes) -> np.ndarray:
    """Slice-wise cumulative sum along each listed axis, in order.

    An empty axis list returns the input unchanged (as a copy).
    """
    out = np.array(A, dtype=np.float64)
    for ax in axes:
        if not -out.ndim <= ax < out.ndim:
            raise ValueError(f"axis {ax} out of range for array of ndim {out.ndim}")
        out = np.cumsum(out, axis=ax)
    return out


@dataclass(frozen=True)
class LowRankPair:
    """Factor pair presenting A = U @ V.T (presentation rank = column count)."""

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        U = np.atleast_2d(np.asarray(self.U, dtype=np.float64))
        V = np.atleast_2d(np.asarray(self.V, dtype=np.float64))
        if U.shape[1] != V.shape[1]:
            raise ValueError("factors must have the same number of columns")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)

    @property
    def rank(self) -> int:
        return int(self.U.shape[1])

    @property
    def shape(self) -> tuple:
        return (int(self.U.shape[0]), int(self.V.shape[0]))

    def densify(self) -> np.ndarray:
        return self.U @ self.V.T


def _strict_shift_cumsum_rows(F: np.ndarray) -> np.ndarray:
    """Row i of the result accumulates rows strictly before i."""
    out = np.zeros_like(F)
    if F.shape[0] > 1:
        np.cumsum(F[:-1], axis=0, out=out[1:])
    return out


def lr_shift_cumsum(p: LowRankPair, side: str) -> LowRankPair:
    """Strict-shifted cumulative sum of the presented matrix along one side.

    Only the chosen factor is touched; the rank is unchanged.
    """
    if side == "row":
        return LowRankPair(_strict_shift_cumsum_rows(p.U), p.V)
    if side == "col":
        return LowRankPair(p.U, _strict_shift_cumsum_rows(p.V))
    raise ValueError("side must be 'row' or 'col'")


def lr_add(p: LowRankPair, q: LowRankPair) -> LowRankPair:
    """Entrywise sum of the presented matrices, by factor concatenation."""
    if p.shape != q.shape:
        raise ValueError("outer dimensions must agree")
    return LowRankPair(np.hstack([p.U, q.U]), np.hstack([p.V, q.V]))


def _khatri_rao_rows(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Row-wise column products: every column of F times every column of G."""
    a, r1 = F.shape
    r2 = G.shape[1]
    return (F[:, :, None] * G[:, None, :]).reshape(a, r1 * r2)


def lr_mul(p: LowRankPair, q: LowRankPair) -> LowRankPair:
    """Entrywise (Hadamard) product of the presented matrices.

    Both factors expand by the same column-pairing scheme, so the rank of
    the result is rank(p) * rank(q).
    """
    if p.shape != q.shape:
        raise ValueError("outer dimensions must agree")
    return LowRankPair(_khatri_rao_rows(p.U, q.U), _khatri_rao_rows(p.V, q.V))


def lr_reduce(p: LowRankPair, tol: float = 0.0, max_rank: int | None = None) -> LowRankPair:
    """Re-present the same matrix with fewer columns.

    Keeps the presentation error below tol * ||A||_F in Frobenius norm
    (tol=0 keeps everything up to exactly-zero singular values), optionally
    also capping the rank at max_rank.  Works on the factors via thin QR, so
    the presented matrix is never materialized when r << min(a, b).
    """
    if tol < 0.0:
        raise ValueError("tol must be >= 0")
    if p.rank == 0:
        return p
    Qu, Ru = np.linalg.qr(p.U)
    Qv, Rv = np.linalg.qr(p.V)
    W, sv, Zt = np.linalg.svd(Ru @ Rv.T)
    total = float(np.sqrt((sv**2).sum()))
    if total == 0.0:
        keep = 0
    else:
        tail = np.sqrt(np.cumsum((sv**2)[::-1]))[::-1]  # tail[k] = ||sv[k:]||
        keep = int(np.searchsorted(-tail, -tol * total))
        keep = max(keep, 0)
    if max_rank is not None:
        keep = min(keep, max_rank)
    root = np.sqrt(sv[:keep])
    return LowRankPair(Qu @ (W[:, :keep] * root), Qv @ (Zt[:keep].T * root))


# sequential kernel on factors -------------------------------------------


def linear_increment_factors(spec, s: Sequence, t: Sequence) -> LowRankPair:
    """Exact rank-d factors of the linear-kernel increment matrix."""
    root = np.sqrt(spec.gamma)
    return LowRankPair(root * increments(s), root * increments(t))


def _increment_cross_kernel(spec, lefts_a, rights_a, lefts_b, rights_b) -> np.ndarray:
    return (
        kernel_matrix(spec, rights_a, rights_b)
        + kernel_matrix(spec, lefts_a, lefts_b)
        - kernel_matrix(spec, lefts_a, rights_b)
        - kernel_matrix(spec, rights_a, lefts_b)
    )


def nystrom_increment_factors(
    spec,
    sequences,
    n_landmarks: int | None = None,
    seed: int = 0,
    cutoff: float = 1e-10,
) -> list:
    """Jointly consistent factors U_i with U_i @ U_j.T ~= increment matrix (i, j).

    Landmarks are increments (consecutive point pairs) pooled from all
    sequences; n_landmarks=None uses the full pool, which reproduces every
    increment matrix exactly up to conditioning.  The landmark kernel matrix
    is pseudo-inverted through its eigen-decomposition with a relative
    eigenvalue cutoff.
    """
    lefts = np.vstack([s.points[:-1] for s in sequences])
    rights = np.vstack([s.points[1:] for s in sequences])
    pool = lefts.shape[0]
    if pool == 0:
        return [np.zeros((max(s.length - 1, 0), 0)) for s in sequences]
    if n_landmarks is not None:
        if n_landmarks < 1:
            raise ValueError("need at least one landmark")
        if n_landmarks < pool:
            rng = np.random.default_rng(seed)
            pick = np.sort(rng.choice(pool, size=n_landmarks, replace=False))
            lefts, rights = lefts[pick], rights[pick]
    W = _increment_cross_kernel(spec, lefts, rights, lefts, rights)
    eigval, eigvec = np.linalg.eigh(W)
    keep = eigval > cutoff * max(eigval.max(), 0.0)
    half = eigvec[:, keep] / np.sqrt(eigval[keep])
    out = []
    for s in sequences:
        C = _increment_cross_kernel(spec, s.points[:-1], s.points[1:], lefts, rights)
        out.append(C @ half)
    return out


def pair_increment_factors(cfg, s: Sequence, t: Sequence, n_landmarks=None, seed=0) -> LowRankPair:
    """Factors presenting the increment matrix of one pair.

    Exact for the linear kernel; Nystrom over the pair's pooled increments
    otherwise.
    """
    spec = cfg.base
    if not callable(spec) and spec.kind == "linear":
        return linear_increment_factors(spec, s, t)
    Us = nystrom_increment_factors(spec, [s, t], n_landmarks=n_landmarks, seed=seed)
    return LowRankPair(Us[0], Us[1])


def _factor_recursion(U: np.ndarray, level: int, reducer=None) -> np.ndarray:
    """Run the per-side level recursion; returns the final level factor."""
    B = U
    for _ in range(2, level + 1):
        P = np.empty((B.shape[0], B.shape[1] + 1))
        P[:, :-1] = _strict_shift_cumsum_rows(B)
        P[:, -1] = 1.0
        B = _khatri_rao_rows(U, P)
        if reducer is not None:
            B = reducer(B)
    return B


def seq_kernel_lowrank(
    cfg,
    s: Sequence,
    t: Sequence,
    base_factors: LowRankPair | None = None,
    n_landmarks: int | None = None,
    seed: int = 0,
    rank_cap: int | None = None,
    rank_tol: float | None = None,
    return_factors: bool = False,
):
    """Sequential kernel of one pair, evaluated on low-rank factors.

    Runs the level recursion on the factors of the increment matrix: per
    level, strict-shift-cumsum each factor, append an all-ones column, and
    column-multiply with the base factors; the result is 1 plus the inner
    product of the final factors' column sums.  With exact base factors this
    equals the dense dynamic program; cost O((L + L') * rank * level).
    Rank reduction is off unless rank_cap or rank_tol is given.
    """
    if cfg.order != 1:
        raise ValueError("low-rank evaluation supports order 1 only")
    if base_factors is None:
        base_factors = pair_increment_factors(cfg, s, t, n_landmarks=n_landmarks, seed=seed)
    U, V = base_factors.U, base_factors.V
    if U.shape[0] != max(s.length - 1, 0) or V.shape[0] != max(t.length - 1, 0):
        raise ValueError("factor dimensions do not match the sequences' increment counts")
    if U.shape[0] == 0 or V.shape[0] == 0 or U.shape[1] == 0:
        value = 1.0
        return (value, LowRankPair(U, V)) if return_factors else value

    if rank_cap is not None or rank_tol is not None:
        level = cfg.level
        B, C = U, V
        for _ in range(2, level + 1):
            p = lr_shift_cumsum(LowRankPair(B, C), "row")
            p = lr_shift_cumsum(p, "col")
            ones = LowRankPair(np.ones((B.shape[0], 1)), np.ones((C.shape[0], 1)))
            p = lr_mul(LowRankPair(U, V), lr_add(p, ones))
            p = lr_reduce(p, tol=rank_tol or 0.0, max_rank=rank_cap)
            B, C = p.U, p.V
    else:
        # lean path: reduction disabled, per-side recursions are independent
        level = min(cfg.level, U.shape[0], V.shape[0])
        B = _factor_recursion(U, level)
        C = _factor_recursion(V, level)
    value = 1.0 + float(B.sum(axis=0) @ C.sum(axis=0))
    return (value, LowRankPair(B, C)) if return_factors else value


def gram_lowrank_joint(
    cfg,
    sequences,
    n_landmarks: int | None = None,
    seed: int = 0,
    rank_cap: int | None = None,
    rank_tol: float | None = None,
):
    """Sequential-kernel Gram matrix from one shared factor recursion.

    Joint factors U_i present every cross increment matrix (exactly for the
    linear kernel, via Nystrom landmarks otherwise).  Each sequence's factor
    runs the level recursion independently; Gram[i, j] is then 1 plus the
    inner product of the column sums of the final factors.  Cost
    O(N * L * rank * level).  Returns (per-sequence level vectors, gram).
    """
    if cfg.order != 1:
        raise ValueError("low-rank evaluation supports order 1 only")
    sequences = list(sequences)
    spec = cfg.base
    if not callable(spec) and spec.kind == "linear":
        root = np.sqrt(spec.gamma)
        factors = [root * increments(s) for s in sequences]
    else:
        factors = nystrom_increment_factors(
            spec, sequences, n_landmarks=n_landmarks, seed=seed
        )
    blocks = [f for f in factors]
    for _ in range(2, cfg.level + 1):
        new = []
        for U, B in zip(factors, blocks):
            P = np.empty((B.shape[0], B.shape[1] + 1))
            P[:, :-1] = _strict_shift_cumsum_rows(B)
            P[:, -1] = 1.0
            new.append(_khatri_rao_rows(U, P))
        blocks = new
        if rank_cap is not None or rank_tol is not None:
            blocks = _joint_reduce(blocks, rank_cap, rank_tol)
    phis = [B.sum(axis=0) for B in blocks]
    width = max((p.size for p in phis), default=0)
    phi = np.zeros((len(sequences), width))
    for i, p in enumerate(phis):
        phi[i, : p.size] = p  # length-1 sequences have empty factors
    gram = 1.0 + phi @ phi.T
    return blocks, gram


def _joint_reduce(blocks, rank_cap, rank_tol):
    """Shared right-rotation of all per-sequence factors onto a common basis.

    Stacks the factors, takes the top right singular vectors, and applies
    the same projection to every block, so cross inner products remain
    consistent.
    """
    if not blocks:
        return blocks
    stack = np.vstack(blocks)
    if stack.shape[1] == 0:
        return blocks
    _, sv, Zt = np.linalg.svd(stack, full_matrices=False)
    keep = len(sv)
    if rank_tol is not None and sv.size:
        total = float(np.sqrt((sv**2).sum()))
        if total > 0.0:
            tail = np.sqrt(np.cumsum((sv**2)[::-1]))[::-1]
            keep = int(np.searchsorted(-tail, -rank_tol * total))
    if rank_cap is not None:
        keep = min(keep, rank_cap)
    Z = Zt[:keep].T
    return [B @ Z for B in blocks]
