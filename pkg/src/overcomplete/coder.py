"""Training loops for sparse (method A) and nonnegative/binary (method B) codes."""

from __future__ import annotations

import logging
import math
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .core import BinaryEmbeddings, Dictionary, EmbeddingMatrix, SparseEmbeddings, sparsity
from .optim import ConfigError, OptimizerState, TrainerConfig, code_gradient, dict_update, rda_update

logger = logging.getLogger(__name__)


class DivergenceError(ArithmeticError):
    def __init__(self, epoch: int, value: float):
        self.epoch = epoch
        self.value = value
        super().__init__(
            f"objective became non-finite ({value}) at epoch {epoch}; try a smaller eta"
        )


@dataclass
class EpochStats:
    """Objective at the end of an epoch; ``l1`` and ``dictionary`` are unweighted."""

    epoch: int
    objective: float
    reconstruction: float
    l1: float
    dictionary: float


@dataclass
class TrainReport:
    epochs: list[EpochStats] = field(default_factory=list)
    sparsity: float = float("nan")
    seconds: float = 0.0
    epochs_run: int = 0

    @property
    def final(self) -> EpochStats:
        return self.epochs[-1]

    def to_dict(self) -> dict:
        return {
            "epochs": [vars(e) for e in self.epochs],
            "sparsity": self.sparsity,
            "seconds": self.seconds,
            "epochs_run": self.epochs_run,
        }


def objective_terms(X, D, A) -> tuple[float, float, float]:
    """Unweighted parts ``(||X - DA||^2, sum|A|, ||D||_F^2)``; ``X`` and ``A`` are word-per-row."""
    X = _dense(X)
    D = D.data if isinstance(D, Dictionary) else np.asarray(D, dtype=np.float64)
    A = _dense(A)
    if X.shape[0] != A.shape[0] or X.shape[1] != D.shape[0] or A.shape[1] != D.shape[1]:
        raise ConfigError(f"shape mismatch: X {X.shape}, D {D.shape}, A {A.shape}")
    resid = X - A @ D.T
    return float(np.sum(resid * resid)), float(np.sum(np.abs(A))), float(np.sum(D * D))


def objective(X, D, A, lam: float, tau: float) -> tuple[float, float, float, float]:
    """Joint loss ``(total, reconstruction, lam * l1, tau * ||D||_F^2)``; total is the sum of the rest."""
    rec, l1, dterm = objective_terms(X, D, A)
    pen, reg = lam * l1, tau * dterm
    return rec + pen + reg, rec, pen, reg


def _dense(m) -> np.ndarray:
    if isinstance(m, (EmbeddingMatrix, SparseEmbeddings, BinaryEmbeddings)):
        return m.to_dense()
    return np.asarray(m, dtype=np.float64)


def init_dictionary(L: int, K: int, rng: np.random.Generator) -> np.ndarray:
    bound = 0.5 / math.sqrt(L)
    return rng.uniform(-bound, bound, size=(L, K))


def _visit(X, D, A, state, config, words):
    for i in words:
        x = X[i]
        g = code_gradient(x, D, A[i])
        A[i] = rda_update(state, i, g, config)
        dict_update(state, D, x, A[i], config)


def _run_epoch(X, D, A, state, config, order):
    if config.threads == 1:
        _visit(X, D, A, state, config, order)
        return
    # code rows are partitioned by word; D and its accumulators are shared without locks
    workers = [
        threading.Thread(target=_visit, args=(X, D, A, state, config, order[w :: config.threads]))
        for w in range(config.threads)
    ]
    for t in workers:
        t.start()
    for t in workers:
        t.join()


def _train(X: EmbeddingMatrix, config: TrainerConfig, min_rel_improvement=None):
    config = config.resolved(X.L)
    V, L, K = X.V, X.L, config.K
    if K <= L:
        logger.warning("K=%d does not exceed L=%d; the representation is not overcomplete", K, L)
    rng = np.random.default_rng(config.seed)
    data = np.ascontiguousarray(X.data)
    D = init_dictionary(L, K, rng)
    A = np.zeros((V, K))
    state = OptimizerState(V, L, K)
    report = TrainReport()
    start = time.perf_counter()
    prev = None
    for epoch in range(1, config.epochs + 1):
        _run_epoch(data, D, A, state, config, rng.permutation(V))
        rec, l1, dterm = objective_terms(data, D, A)
        total = rec + config.lam * l1 + config.tau * dterm
        if not math.isfinite(total):
            raise DivergenceError(epoch, total)
        report.epochs.append(EpochStats(epoch, total, rec, l1, dterm))
        report.epochs_run = epoch
        logger.info("epoch %d objective %.6g (rec %.6g, l1 %.6g)", epoch, total, rec, l1)
        if min_rel_improvement is not None and prev is not None:
            if prev - total < min_rel_improvement * abs(prev):
                break
        prev = total
    report.seconds = time.perf_counter() - start
    codes = SparseEmbeddings.from_dense(X.vocab, A)
    report.sparsity = sparsity(codes)
    if config.lam == 0:
        logger.warning("lambda is 0: codes will be dense (sparsity %.3f)", report.sparsity)
    return Dictionary(D), codes, report


def train_sparse(X: EmbeddingMatrix, config: TrainerConfig, min_rel_improvement=None):
    """Learn a dictionary and l1-sparse codes for ``X``.

    Each epoch visits every word once in a seeded random order: gradient of
    the reconstruction error at the current code, a dual-averaging code
    update, then an AdaGrad step on the dictionary.  With ``threads > 1``
    the words of an epoch are split across threads that share the
    dictionary without locking.

    Returns ``(Dictionary, SparseEmbeddings, TrainReport)``.
    """
    if config.nonnegative:
        raise ConfigError("train_sparse needs nonnegative=False; use train_nonneg")
    return _train(X, config, min_rel_improvement)


def train_nonneg(X: EmbeddingMatrix, config: TrainerConfig, min_rel_improvement=None):
    """Like :func:`train_sparse` but codes are projected onto the nonnegative orthant.

    The dictionary stays unconstrained.
    """
    if not config.nonnegative:
        raise ConfigError("train_nonneg needs nonnegative=True")
    return _train(X, config, min_rel_improvement)


def train(X: EmbeddingMatrix, config: TrainerConfig, min_rel_improvement=None):
    """Dispatch on ``config.nonnegative``; also binarize when ``config.binarize``.

    Returns ``(D, A, B, report)`` where ``B`` is ``None`` unless binarizing.
    """
    if config.nonnegative:
        D, A, report = train_nonneg(X, config, min_rel_improvement)
    else:
        D, A, report = train_sparse(X, config, min_rel_improvement)
    B = binarize(A) if config.binarize else None
    return D, A, B, report


def binarize(A: SparseEmbeddings) -> BinaryEmbeddings:
    """Map every stored (nonzero) code value to 1 and leave zeros alone."""
    return BinaryEmbeddings(A.vocab, A.K, tuple(r.indices for r in A.rows))
