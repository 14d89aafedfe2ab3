"""Sparse overcomplete word vectors learned by online dictionary learning."""

__version__ = "0.1.0"

from .baselines import MeanThresholds, mean_threshold, sign_binarize
from .coder import DivergenceError, TrainReport, binarize, objective, train, train_nonneg, train_sparse
from .core import (
    BinaryEmbeddings,
    Dictionary,
    EmbeddingMatrix,
    SparseEmbeddings,
    SparseVector,
    UndefinedSimilarityError,
    cosine,
    sparsity,
)
from .optim import ConfigError, OptimizerState, TrainerConfig, code_gradient, dict_update, rda_update

__all__ = [
    "BinaryEmbeddings", "ConfigError", "Dictionary", "DivergenceError", "EmbeddingMatrix",
    "MeanThresholds", "OptimizerState", "SparseEmbeddings", "SparseVector", "TrainReport",
    "TrainerConfig", "UndefinedSimilarityError", "binarize", "code_gradient", "cosine",
    "dict_update", "mean_threshold", "objective", "rda_update", "sign_binarize", "sparsity",
    "train", "train_nonneg", "train_sparse",
]
