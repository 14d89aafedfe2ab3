"""Length-preserving transformations of dense vectors used as comparison points."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import BinaryEmbeddings, EmbeddingMatrix


@dataclass(frozen=True)
class MeanThresholds:
    """Global means of the strictly positive and strictly negative entries.

    A side with no entries is ``None`` and its output symbol is never emitted.
    """

    m_plus: float | None
    m_minus: float | None


def sign_binarize(X: EmbeddingMatrix) -> BinaryEmbeddings:
    """Index ``j`` of a word is active iff its value is strictly positive."""
    rows = tuple(np.flatnonzero(r > 0) for r in X.data)
    return BinaryEmbeddings(X.vocab, X.L, rows)


def mean_thresholds(X: EmbeddingMatrix) -> MeanThresholds:
    data = X.data
    pos = data[data > 0]
    neg = data[data < 0]
    return MeanThresholds(
        float(pos.mean()) if pos.size else None,
        float(neg.mean()) if neg.size else None,
    )


def mean_threshold(X: EmbeddingMatrix) -> tuple[EmbeddingMatrix, MeanThresholds]:
    """Ternary vectors: 1 where ``x >= M+``, -1 where ``x <= M-``, else 0.

    ``M+`` and ``M-`` are means over the whole matrix, zeros excluded.
    """
    th = mean_thresholds(X)
    out = np.zeros_like(X.data)
    if th.m_plus is None:
        warnings.warn("no positive entries; the +1 branch is disabled", RuntimeWarning, stacklevel=2)
    else:
        out[X.data >= th.m_plus] = 1.0
    if th.m_minus is None:
        warnings.warn("no negative entries; the -1 branch is disabled", RuntimeWarning, stacklevel=2)
    else:
        out[X.data <= th.m_minus] = -1.0
    return EmbeddingMatrix(X.vocab, out), th
