"""Dataset ingestion, Gram assembly, normalization, PSD diagnostics, and IO.

File formats:

* dataset JSONL: one object per line,
  ``{"id": str, "label": str|null, "series": [[f, ...], ...]}``
  (outer list runs over time, inner over the d coordinates);
* dataset CSV: header ``id,label,t,x1,...,xd``, rows grouped by id and
  ordered by t;
* Gram CSV: a header row of sample ids, then N rows of N floats printed
  with repr-level precision (%.17g), locale independent;
* Gram binary: magic ``SEQK1``, little-endian u32 N, N*N row-major
  little-endian f64, then a UTF-8 JSON metadata block.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .lowrank import gram_lowrank_joint, pair_increment_factors, seq_kernel_lowrank
from .seqkernel import (
    SeqKernelConfig,
    seq_kernel_dp,
    seq_kernel_dp_high,
    seq_kernel_naive,
)
from .sequences import Sequence

GRAM_MAGIC = b"SEQK1"


@dataclass
class Dataset:
    """Labelled samples sharing one point dimension; ids are unique."""

    samples: list  # list of (id, label or None, Sequence)

    def __post_init__(self):
        ids = [sid for sid, _, _ in self.samples]
        if len(set(ids)) != len(ids):
            raise ValueError("sample ids must be unique")
        dims = {seq.dim for _, _, seq in self.samples}
        if len(dims) > 1:
            raise ValueError(f"sequences have mixed dimensions {sorted(dims)}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def dim(self) -> int:
        if not self.samples:
            raise ValueError("empty dataset has no dimension")
        return self.samples[0][2].dim

    @property
    def ids(self) -> list:
        return [sid for sid, _, _ in self.samples]

    @property
    def labels(self) -> list:
        return [label for _, label, _ in self.samples]

    @property
    def sequences(self) -> list:
        return [seq for _, _, seq in self.samples]


def load_dataset(path: str, format: str) -> Dataset:
    """Parse a dataset file; raises with the offending sample or line."""
    if format == "jsonl":
        return _load_jsonl(path)
    if format == "csv":
        return _load_csv(path)
    raise ValueError(f"unknown dataset format {format!r}")


def _load_jsonl(path: str) -> Dataset:
    samples = []
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                sid = str(obj["id"])
                label = obj.get("label")
                label = None if label is None else str(label)
                series = np.asarray(obj["series"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: malformed record at line {lineno}: {exc}") from exc
            if series.ndim != 2:
                raise ValueError(
                    f"{path}: sample {sid!r} (line {lineno}) has a ragged or non-2D series"
                )
            if dim is None:
                dim = series.shape[1]
            elif series.shape[1] != dim:
                raise ValueError(
                    f"{path}: sample {sid!r} has dimension {series.shape[1]}, expected {dim}"
                )
            samples.append((sid, label, Sequence(series)))
    if not samples:
        raise ValueError(f"{path}: no samples")
    return Dataset(samples)


def _load_csv(path: str) -> Dataset:
    rows_by_id: dict = {}
    order: list = []
    labels: dict = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: no samples") from None
        if len(header) < 4 or header[:3] != ["id", "label", "t"]:
            raise ValueError(f"{path}: expected header id,label,t,x1,...,xd")
        d = len(header) - 3
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: wrong column count at line {lineno}")
            sid, label = row[0], row[1]
            try:
                t = float(row[2])
                coords = [float(c) for c in row[3:]]
            except ValueError:
                raise ValueError(f"{path}: non-numeric cell at line {lineno}") from None
            if sid not in rows_by_id:
                rows_by_id[sid] = []
                order.append(sid)
                labels[sid] = label if label != "" else None
            rows_by_id[sid].append((t, coords))
    if not order:
        raise ValueError(f"{path}: no samples")
    samples = []
    for sid in order:
        rows = sorted(rows_by_id[sid], key=lambda r: r[0])
        ts = np.array([r[0] for r in rows])
        if len(ts) > 1 and np.any(np.diff(ts) <= 0):
            raise ValueError(f"{path}: sample {sid!r} has non-increasing t values")
        pts = np.array([r[1] for r in rows])
        span = ts[-1] - ts[0]
        stamps = (ts - ts[0]) / span if (len(ts) > 1 and span > 0) else np.zeros(len(ts))
        samples.append((sid, labels[sid], Sequence(pts, stamps)))
    return Dataset(samples)


@dataclass
class GramMatrix:
    """Symmetric kernel matrix with provenance metadata."""

    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("gram matrix must be square")
        self.values = v


def _pair_value(cfg: SeqKernelConfig, s: Sequence, t: Sequence, n_landmarks, seed,
                rank_cap, rank_tol) -> float:
    if cfg.algorithm == "naive":
        return seq_kernel_naive(cfg, s, t)
    if cfg.algorithm == "dp":
        return seq_kernel_dp(cfg, s, t)
    if cfg.algorithm == "dp-high":
        return seq_kernel_dp_high(cfg, s, t)
    if cfg.algorithm == "lowrank":
        return seq_kernel_lowrank(
            cfg, s, t, n_landmarks=n_landmarks, seed=seed,
            rank_cap=rank_cap, rank_tol=rank_tol,
        )
    raise ValueError(f"algorithm {cfg.algorithm!r} is not a per-pair algorithm")


def compute_gram(
    cfg: SeqKernelConfig,
    dataset: Dataset,
    normalize: bool = False,
    n_landmarks: int | None = None,
    seed: int = 0,
    rank_cap: int | None = None,
    rank_tol: float | None = None,
) -> GramMatrix:
    """Assemble the N x N sequential-kernel matrix of a dataset.

    Only the upper triangle is evaluated and mirrored.  With normalize=True
    entries are divided by sqrt(diag_i * diag_j), making the diagonal
    exactly 1.  Evaluation errors are re-raised with the offending ids.
    """
    seqs = dataset.sequences
    n = len(seqs)
    if cfg.algorithm == "lowrank-joint":
        _, values = gram_lowrank_joint(
            cfg, seqs, n_landmarks=n_landmarks, seed=seed,
            rank_cap=rank_cap, rank_tol=rank_tol,
        )
        values = 0.5 * (values + values.T)
    else:
        values = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                try:
                    v = _pair_value(cfg, seqs[i], seqs[j], n_landmarks, seed, rank_cap, rank_tol)
                except Exception as exc:
                    ids = dataset.ids
                    raise RuntimeError(
                        f"kernel evaluation failed for samples {ids[i]!r}, {ids[j]!r}: {exc}"
                    ) from exc
                values[i, j] = v
                values[j, i] = v
    if normalize:
        diag = np.sqrt(np.diag(values).copy())
        values = values / np.outer(diag, diag)
        np.fill_diagonal(values, 1.0)
    base = cfg.base
    meta = {
        "ids": dataset.ids,
        "algorithm": cfg.algorithm,
        "level": cfg.level,
        "order": cfg.order,
        "kernel": "custom" if callable(base) else base.kind,
        "gamma": None if callable(base) else base.gamma,
        "theta": None if callable(base) else base.theta,
        "use_increments": cfg.use_increments,
        "normalized": bool(normalize),
    }
    return GramMatrix(values, meta)


def psd_report(g: GramMatrix) -> tuple:
    """(smallest eigenvalue of the symmetrized matrix, max |K - K^T| entry)."""
    K = g.values
    defect = float(np.abs(K - K.T).max()) if K.size else 0.0
    sym = 0.5 * (K + K.T)
    mineig = float(np.linalg.eigvalsh(sym).min()) if K.size else 0.0
    return mineig, defect


# persistence --------------------------------------------------------------


def write_gram_csv(g: GramMatrix, path: str) -> None:
    ids = g.meta.get("ids", [str(i) for i in range(g.values.shape[0])])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(ids) + "\n")
        for row in g.values:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def read_gram_csv(path: str) -> GramMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        ids = header.split(",") if header else []
        values = np.loadtxt(fh, delimiter=",", ndmin=2)
    return GramMatrix(values, {"ids": ids})


def write_gram_binary(g: GramMatrix, path: str) -> None:
    n = g.values.shape[0]
    meta = json.dumps(g.meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(GRAM_MAGIC)
        fh.write(struct.pack("<I", n))
        fh.write(np.ascontiguousarray(g.values, dtype="<f8").tobytes())
        fh.write(meta)


def read_gram_binary(path: str) -> GramMatrix:
    with open(path, "rb") as fh:
        magic = fh.read(len(GRAM_MAGIC))
        if magic != GRAM_MAGIC:
            raise ValueError(f"{path}: not a gram file (bad magic {magic!r})")
        (n,) = struct.unpack("<I", fh.read(4))
        buf = fh.read(8 * n * n)
        if len(buf) != 8 * n * n:
            raise ValueError(f"{path}: truncated gram payload")
        values = np.frombuffer(buf, dtype="<f8").reshape(n, n).copy()
        meta = json.loads(fh.read().decode("utf-8") or "{}")
    return GramMatrix(values, meta)


def gram_csv_text(g: GramMatrix) -> str:
    out = io.StringIO()
    ids = g.meta.get("ids", [str(i) for i in range(g.values.shape[0])])
    out.write(",".join(ids) + "\n")
    for row in g.values:
        out.write(",".join("%.17g" % v for v in row) + "\n")
    return out.getvalue()
