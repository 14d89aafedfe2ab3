"""Embedding containers and the small amount of linear algebra shared by the package.

All matrices are stored one word per row: dense inputs are ``V x L``, codes
are ``V x K``.  Arithmetic is float64 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np


class UndefinedSimilarityError(ValueError):
    """Raised when cosine similarity is requested for a zero-norm vector."""


class SparseVector(NamedTuple):
    """A length-``size`` vector given by ascending ``indices`` and nonzero ``values``."""

    indices: np.ndarray
    values: np.ndarray
    size: int

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.size)
        out[self.indices] = self.values
        return out


Vector = Union[np.ndarray, SparseVector]


def sparsify(row) -> SparseVector:
    """Keep the exactly-nonzero entries of a dense row."""
    row = np.asarray(row, dtype=np.float64)
    idx = np.flatnonzero(row)
    return SparseVector(idx.astype(np.int64), row[idx].copy(), row.shape[0])


def densify(vec: SparseVector) -> np.ndarray:
    return vec.to_dense()


def _index_of(vocab: Sequence[str]) -> dict[str, int]:
    index: dict[str, int] = {}
    for i, w in enumerate(vocab):
        if w in index:
            raise ValueError(f"duplicate word in vocabulary: {w!r}")
        index[w] = i
    return index


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Dense word vectors, one row per vocabulary entry."""

    vocab: tuple[str, ...]
    data: np.ndarray
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vocab = tuple(self.vocab)
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"embedding data must be 2-d, got shape {data.shape}")
        if data.shape[0] != len(vocab):
            raise ValueError(f"{len(vocab)} words but {data.shape[0]} rows")
        if not np.all(np.isfinite(data)):
            raise ValueError("embedding data contains non-finite entries")
        data.setflags(write=False)
        object.__setattr__(self, "vocab", vocab)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "index", _index_of(vocab))

    @property
    def V(self) -> int:
        return self.data.shape[0]

    @property
    def L(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.L

    def __len__(self):
        return self.V

    def __contains__(self, word):
        return word in self.index

    def vector(self, word: str) -> np.ndarray:
        return self.data[self.index[word]]

    def dense_vector(self, word: str) -> np.ndarray:
        return self.data[self.index[word]]

    def to_dense(self) -> np.ndarray:
        return self.data


@dataclass(frozen=True)
class Dictionary:
    """The ``L x K`` basis matrix; column ``j`` is basis vector ``j``."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"dictionary must be 2-d, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("dictionary contains non-finite entries")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def L(self) -> int:
        return self.data.shape[0]

    @property
    def K(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class SparseEmbeddings:
    """Sparse codes: per word, ascending indices in ``[0, K)`` and nonzero values."""

    vocab: tuple[str, ...]
    K: int
    rows: tuple[SparseVector, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vocab = tuple(self.vocab)
        if len(self.rows) != len(vocab):
            raise ValueError(f"{len(vocab)} words but {len(self.rows)} rows")
        rows = []
        for n, r in enumerate(self.rows):
            idx = np.asarray(r[0], dtype=np.int64)
            val = np.asarray(r[1], dtype=np.float64)
            if idx.shape != val.shape or idx.ndim != 1:
                raise ValueError(f"row {n}: indices and values differ in shape")
            if idx.size:
                if idx[0] < 0 or idx[-1] >= self.K or np.any(np.diff(idx) <= 0):
                    raise ValueError(f"row {n}: indices must be strictly increasing in [0, {self.K})")
                if np.any(val == 0):
                    raise ValueError(f"row {n}: stored values must be nonzero")
            idx.setflags(write=False)
            val.setflags(write=False)
            rows.append(SparseVector(idx, val, self.K))
        object.__setattr__(self, "vocab", vocab)
        object.__setattr__(self, "rows", tuple(rows))
        object.__setattr__(self, "index", _index_of(vocab))

    @classmethod
    def from_dense(cls, vocab, data) -> "SparseEmbeddings":
        data = np.asarray(data, dtype=np.float64)
        return cls(tuple(vocab), data.shape[1], tuple(sparsify(r) for r in data))

    @property
    def V(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> int:
        return self.K

    @property
    def nnz(self) -> int:
        return sum(r.indices.size for r in self.rows)

    def __len__(self):
        return self.V

    def __contains__(self, word):
        return word in self.index

    def vector(self, word: str) -> SparseVector:
        return self.rows[self.index[word]]

    def dense_vector(self, word: str) -> np.ndarray:
        return self.rows[self.index[word]].to_dense()

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.V, self.K))
        for i, r in enumerate(self.rows):
            out[i, r.indices] = r.values
        return out


@dataclass(frozen=True)
class BinaryEmbeddings:
    """Binary codes: per word, the ascending set of active indices."""

    vocab: tuple[str, ...]
    K: int
    rows: tuple[np.ndarray, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vocab = tuple(self.vocab)
        if len(self.rows) != len(vocab):
            raise ValueError(f"{len(vocab)} words but {len(self.rows)} rows")
        rows = []
        for n, r in enumerate(self.rows):
            idx = np.asarray(r, dtype=np.int64).reshape(-1)
            if idx.size and (idx[0] < 0 or idx[-1] >= self.K or np.any(np.diff(idx) <= 0)):
                raise ValueError(f"row {n}: active indices must be strictly increasing in [0, {self.K})")
            idx.setflags(write=False)
            rows.append(idx)
        object.__setattr__(self, "vocab", vocab)
        object.__setattr__(self, "rows", tuple(rows))
        object.__setattr__(self, "index", _index_of(vocab))

    @property
    def V(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> int:
        return self.K

    def __len__(self):
        return self.V

    def __contains__(self, word):
        return word in self.index

    def vector(self, word: str) -> SparseVector:
        idx = self.rows[self.index[word]]
        return SparseVector(idx, np.ones(idx.size), self.K)

    def dense_vector(self, word: str) -> np.ndarray:
        return self.vector(word).to_dense()

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.V, self.K))
        for i, r in enumerate(self.rows):
            out[i, r] = 1.0
        return out

    def to_sparse(self) -> SparseEmbeddings:
        return SparseEmbeddings(self.vocab, self.K, tuple((r, np.ones(r.size)) for r in self.rows))


def sparsity(a: SparseEmbeddings) -> float:
    """Fraction of exactly-zero cells in the ``V x K`` code matrix."""
    total = a.V * a.K
    if total == 0:
        raise ValueError("sparsity is undefined for an empty code matrix")
    return 1.0 - a.nnz / total


def _unit_scaled(x: np.ndarray) -> np.ndarray:
    # divide by the max magnitude first so norms neither underflow nor overflow
    m = float(np.max(np.abs(x))) if x.size else 0.0
    if m == 0.0:
        raise UndefinedSimilarityError("cosine similarity is undefined for a zero vector")
    return x / m


def cosine(u: Vector, v: Vector) -> float:
    """Cosine similarity of two dense or sparse vectors of equal length.

    Sparse-sparse pairs only touch the shared active indices.
    """
    if isinstance(u, SparseVector) and isinstance(v, SparseVector):
        if u.size != v.size:
            raise ValueError(f"length mismatch: {u.size} vs {v.size}")
        uv, vv = _unit_scaled(u.values), _unit_scaled(v.values)
        _, iu, iv = np.intersect1d(u.indices, v.indices, assume_unique=True, return_indices=True)
        dot = float(np.dot(uv[iu], vv[iv]))
    else:
        du = u.to_dense() if isinstance(u, SparseVector) else np.asarray(u, dtype=np.float64)
        dv = v.to_dense() if isinstance(v, SparseVector) else np.asarray(v, dtype=np.float64)
        if du.shape != dv.shape:
            raise ValueError(f"length mismatch: {du.shape} vs {dv.shape}")
        uv, vv = _unit_scaled(du), _unit_scaled(dv)
        dot = float(np.dot(uv, vv))
    # rounding can push |cos| a hair past 1
    return min(1.0, max(-1.0, dot / (float(np.linalg.norm(uv)) * float(np.linalg.norm(vv)))))
