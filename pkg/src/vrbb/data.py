"""Sparse dataset ingestion in LIBSVM text format.

Datasets are immutable after construction and safe to share across
concurrently executing runs. Feature indices are 1-based in files and
0-based in memory; labels are normalized to {-1, +1}.
"""

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp


class ParseError(ValueError):
    """Malformed LIBSVM input. Carries the 1-based line number."""

    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnsupportedLabelsError(ValueError):
    """Raised when raw labels take more than two distinct values."""


@dataclass(frozen=True)
class SparseExample:
    """One row: strictly increasing 0-based indices, values, label in {-1,+1}."""

    indices: np.ndarray
    values: np.ndarray
    label: float


class SparseDataset:
    """n sparse feature rows with +/-1 labels, backed by a CSR matrix.

    Empty rows are kept: they contribute a constant loss and a zero
    loss-gradient, and dropping them would silently change n.
    """

    def __init__(self, matrix, labels):
        matrix = sp.csr_matrix(matrix)
        labels = np.asarray(labels, dtype=np.float64)
        if matrix.shape[0] != labels.shape[0]:
            raise ValueError("row count and label count differ")
        if matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise ValueError("dataset must have n >= 1 and d >= 1")
        bad = np.setdiff1d(np.unique(labels), [-1.0, 1.0])
        if bad.size:
            raise ValueError(f"labels must be in {{-1,+1}}, got {bad.tolist()}")
        matrix.sort_indices()
        self.X = matrix
        self.z = labels
        self._inf_norms = None
        self._nnz_counts = None

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    def row(self, i):
        if not 0 <= i < self.n:
            raise IndexError(f"row index {i} out of range for n={self.n}")
        lo, hi = self.X.indptr[i], self.X.indptr[i + 1]
        return SparseExample(
            indices=self.X.indices[lo:hi].copy(),
            values=self.X.data[lo:hi].copy(),
            label=float(self.z[i]),
        )

    def row_inf_norms(self):
        """Per-row max |value|; zeros for empty rows."""
        if self._inf_norms is None:
            out = np.zeros(self.n)
            absdata = np.abs(self.X.data)
            ptr = self.X.indptr
            for i in range(self.n):
                if ptr[i + 1] > ptr[i]:
                    out[i] = absdata[ptr[i]:ptr[i + 1]].max()
            self._inf_norms = out
        return self._inf_norms

    def row_nnz_counts(self):
        """Per-row count of stored nonzeros."""
        if self._nnz_counts is None:
            self._nnz_counts = np.diff(self.X.indptr).astype(np.int64)
        return self._nnz_counts

    def row_inf_norm(self, i):
        if not 0 <= i < self.n:
            raise IndexError(f"row index {i} out of range for n={self.n}")
        return float(self.row_inf_norms()[i])

    def row_nnz(self, i):
        if not 0 <= i < self.n:
            raise IndexError(f"row index {i} out of range for n={self.n}")
        return int(self.row_nnz_counts()[i])

    def to_libsvm(self):
        """Serialize back to LIBSVM text (1-based indices)."""
        lines = []
        for i in range(self.n):
            lo, hi = self.X.indptr[i], self.X.indptr[i + 1]
            parts = [f"{int(self.z[i]):+d}"]
            for j, v in zip(self.X.indices[lo:hi], self.X.data[lo:hi]):
                parts.append(f"{j + 1}:{float(v)!r}")
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        if not isinstance(other, SparseDataset):
            return NotImplemented
        return (
            self.n == other.n
            and self.d == other.d
            and np.array_equal(self.z, other.z)
            and np.array_equal(self.X.indptr, other.X.indptr)
            and np.array_equal(self.X.indices, other.X.indices)
            and np.array_equal(self.X.data, other.X.data)
        )


def remap_labels(raw_labels):
    """Map a two-class label list onto {-1, +1}.

    The larger raw value maps to +1, the smaller to -1. Labels already
    in {-1, +1} pass through unchanged. More than two distinct values
    raises UnsupportedLabelsError.
    """
    raw = np.asarray(raw_labels, dtype=np.float64)
    distinct = np.unique(raw)
    if distinct.size > 2:
        raise UnsupportedLabelsError(
            f"expected at most 2 distinct labels, got {distinct.size}"
        )
    if np.all(np.isin(distinct, [-1.0, 1.0])):
        return raw.copy()
    if distinct.size == 1:
        return np.full_like(raw, 1.0)
    out = np.where(raw == distinct[1], 1.0, -1.0)
    return out


def parse_libsvm(source, dim=None):
    """Parse LIBSVM-format text into a SparseDataset.

    `source` may be str/bytes content, a file-like object, or an
    iterable of lines. File indices are 1-based and must be strictly
    increasing within a row. `dim` overrides the inferred dimension
    (max index seen); it must not be smaller than any observed index.
    """
    if isinstance(source, bytes):
        lines = io.BytesIO(source)
    elif isinstance(source, str):
        lines = io.StringIO(source)
    else:
        lines = source

    raw_labels = []
    indptr = [0]
    indices = []
    data = []
    max_index = 0

    for line_no, raw_line in enumerate(lines, start=1):
        if isinstance(raw_line, bytes):
            raw_line = raw_line.decode("ascii")
        line = raw_line.strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise ParseError(line_no, f"invalid label {tokens[0]!r}") from None
        prev_idx = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise ParseError(line_no, f"missing ':' in token {tok!r}")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ParseError(line_no, f"invalid token {tok!r}") from None
            if idx < 1:
                raise ParseError(line_no, f"index {idx} is not 1-based positive")
            if idx <= prev_idx:
                raise ParseError(
                    line_no, f"index {idx} not strictly increasing after {prev_idx}"
                )
            prev_idx = idx
            indices.append(idx - 1)
            data.append(val)
        max_index = max(max_index, prev_idx)
        raw_labels.append(label)
        indptr.append(len(indices))

    if not raw_labels:
        raise ParseError(0, "empty input: no examples found")

    if dim is None:
        d = max(max_index, 1)
    else:
        if dim < max_index:
            raise ValueError(
                f"dim override {dim} is smaller than max observed index {max_index}"
            )
        d = int(dim)

    matrix = sp.csr_matrix(
        (
            np.asarray(data, dtype=np.float64),
            np.asarray(indices, dtype=np.int32),
            np.asarray(indptr, dtype=np.int64),
        ),
        shape=(len(raw_labels), d),
    )
    labels = remap_labels(raw_labels)
    return SparseDataset(matrix, labels)


def load_libsvm(path, dim=None):
    """Load a LIBSVM file from disk."""
    with open(Path(path), "rb") as fh:
        return parse_libsvm(fh, dim=dim)
