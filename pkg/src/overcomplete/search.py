"""Hyperparameter grid search and code-length sweeps scored on a dev similarity set."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from .coder import train
from .core import EmbeddingMatrix
from .evaluation import EvaluationError, eval_similarity
from .io import SimilarityDataset
from .optim import TrainerConfig

logger = logging.getLogger(__name__)

DEFAULT_LAMBDAS = (0.1, 0.5, 1.0)
DEFAULT_FACTORS = (10, 20)
DEFAULT_MIN_SPARSITY = 0.90
DEFAULT_ALPHAS = (1, 2, 3, 5, 10, 15, 20)


@dataclass
class GridCell:
    lam: float
    factor: int
    K: int
    sparsity: float
    rho: float | None
    covered: int
    skipped: int
    objective: float

    def eligible(self, min_sparsity: float) -> bool:
        return self.rho is not None and self.sparsity >= min_sparsity

    def to_dict(self) -> dict:
        return dict(vars(self))


def score_cell(X: EmbeddingMatrix, dev: SimilarityDataset, config: TrainerConfig):
    """Train one configuration and score it on ``dev``; returns ``(cell, trained)``."""
    D, A, B, report = train(X, config)
    vectors = B if B is not None else A
    try:
        res = eval_similarity(vectors, dev)
        rho, covered, skipped = res.rho, res.covered, res.skipped
    except (EvaluationError, ValueError) as e:
        logger.warning("lambda=%s K=%s: dev similarity undefined (%s)", config.lam, config.code_length(X.L), e)
        rho, covered, skipped = None, 0, len(dev)
    cell = GridCell(
        config.lam, config.factor if config.factor is not None else 0, config.code_length(X.L),
        report.sparsity, rho, covered, skipped, report.final.objective,
    )
    return cell, (D, A, B, report)


def select_cell(cells, min_sparsity: float = DEFAULT_MIN_SPARSITY):
    """Index of the best-rho cell meeting the sparsity floor (first wins ties), or ``None``."""
    best = None
    for n, c in enumerate(cells):
        if c.eligible(min_sparsity) and (best is None or c.rho > cells[best].rho):
            best = n
    return best


def rank_cells(cells, min_sparsity: float = DEFAULT_MIN_SPARSITY):
    """Eligible cells by descending rho, then the rest by descending rho."""
    def key(item):
        n, c = item
        return (not c.eligible(min_sparsity), -(c.rho if c.rho is not None else float("-inf")), n)

    return [c for _, c in sorted(enumerate(cells), key=key)]


def grid_search(X, dev, base: TrainerConfig, lambdas=DEFAULT_LAMBDAS, factors=DEFAULT_FACTORS,
                min_sparsity=DEFAULT_MIN_SPARSITY):
    """Train every ``(lambda, K = factor * L)`` cell and pick the winner.

    Returns ``(cells, best_index, best_artifacts)``; only the winning cell's
    trained artifacts are kept.
    """
    cells, best, kept = [], None, None
    for lam in lambdas:
        for factor in factors:
            config = replace(base, lam=lam, factor=factor, K=None)
            cell, trained = score_cell(X, dev, config)
            logger.info("lambda=%g K=%d sparsity=%.4f rho=%s", lam, cell.K, cell.sparsity, cell.rho)
            cells.append(cell)
            if select_cell(cells, min_sparsity) == len(cells) - 1:
                best, kept = len(cells) - 1, (config.resolved(X.L), trained)
    return cells, best, kept


def length_sweep(X, dev, base: TrainerConfig, alphas=DEFAULT_ALPHAS):
    """Score ``K = alpha * L`` for each alpha with the other settings fixed."""
    return [score_cell(X, dev, replace(base, factor=a, K=None))[0] for a in alphas]
