"""AdaGrad-flavoured regularized dual averaging for the codes, plain AdaGrad for the dictionary."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np


class ConfigError(ValueError):
    """Invalid hyperparameters or mismatched dimensions."""


@dataclass(frozen=True)
class TrainerConfig:
    """Hyperparameters for one training run.

    ``K`` may be left as ``None`` and resolved later from ``factor * L``.
    """

    lam: float = 1.0
    tau: float = 1e-5
    K: int | None = None
    factor: int | None = 10
    eta: float = 0.05
    epochs: int = 20
    seed: int = 0
    nonnegative: bool = False
    binarize: bool = False
    threads: int = 1
    regularizer: str = "l1"

    def __post_init__(self):
        if self.binarize and not self.nonnegative:
            object.__setattr__(self, "nonnegative", True)
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ConfigError(f"lambda must be finite and >= 0, got {self.lam}")
        if not (self.tau >= 0 and math.isfinite(self.tau)):
            raise ConfigError(f"tau must be finite and >= 0, got {self.tau}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ConfigError(f"eta must be finite and > 0, got {self.eta}")
        if self.K is None and self.factor is None:
            raise ConfigError("one of K or factor is required")
        if self.K is not None and self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if self.factor is not None and self.factor < 1:
            raise ConfigError(f"factor must be >= 1, got {self.factor}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.regularizer != "l1":
            raise ConfigError(f"unsupported regularizer {self.regularizer!r}; only 'l1' is available")

    def code_length(self, L: int) -> int:
        return self.K if self.K is not None else self.factor * L

    def resolved(self, L: int) -> "TrainerConfig":
        """Copy with ``K`` fixed for input dimension ``L``."""
        d = asdict(self)
        d["K"] = self.code_length(L)
        return TrainerConfig(**d)

    def to_dict(self) -> dict:
        return asdict(self)


class OptimizerState:
    """Per-coordinate accumulators.

    Code side, per word ``i`` and coordinate ``j``: running gradient sum,
    running squared-gradient sum, and the word's update count.  Dictionary
    side: running squared-gradient sum per entry.  The average gradient is
    ``sum_grad[i] / steps[i]``, divided on read.
    """

    def __init__(self, V: int, L: int, K: int):
        self.sum_grad = np.zeros((V, K))
        self.sum_sq = np.zeros((V, K))
        self.steps = np.zeros(V, dtype=np.int64)
        self.dict_sq = np.zeros((L, K))

    @property
    def shape(self):
        return self.sum_grad.shape[0], self.dict_sq.shape[0], self.dict_sq.shape[1]

    def average_gradient(self, i: int) -> np.ndarray:
        t = self.steps[i]
        if t == 0:
            return np.zeros(self.sum_grad.shape[1])
        return self.sum_grad[i] / t


def code_gradient(x, D, a) -> np.ndarray:
    """Gradient of ``||x - D a||^2`` with respect to ``a``: ``2 D^T (D a - x)``."""
    x = np.asarray(x, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    if D.ndim != 2 or x.shape != (D.shape[0],) or a.shape != (D.shape[1],):
        raise ConfigError(f"shape mismatch: x {x.shape}, D {D.shape}, a {a.shape}")
    return 2.0 * (D.T @ (D @ a - x))


def threshold_codes(avg_grad, sum_sq, t, lam, eta, nonnegative=False) -> np.ndarray:
    """Closed-form dual-averaging step from accumulated statistics.

    Coordinates whose average gradient magnitude is at most ``lam`` become
    exactly zero; the rest take
    ``-sign(g) * eta * t / sqrt(G) * (|g| - lam)``.  With ``nonnegative``
    the negative results are zeroed as well.
    """
    avg_grad = np.asarray(avg_grad, dtype=np.float64)
    out = np.zeros_like(avg_grad)
    mag = np.abs(avg_grad)
    active = mag > lam
    if not np.any(active):
        return out
    G = np.asarray(sum_sq, dtype=np.float64)[active]
    # G == 0 forces every gradient so far to be 0, so |avg| = 0 <= lam
    assert np.all(G > 0), "positive average gradient with zero squared-gradient sum"
    gamma = -np.sign(avg_grad[active]) * (eta * t / np.sqrt(G)) * (mag[active] - lam)
    if nonnegative:
        gamma[gamma < 0] = 0.0
    out[active] = gamma
    return out


def rda_update(state: OptimizerState, i: int, grad, config: TrainerConfig) -> np.ndarray:
    """Fold ``grad`` into word ``i``'s accumulators and return its new code row.

    The returned row is dense with literal zeros in every thresholded
    coordinate.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.sum_grad.shape[1:]:
        raise ConfigError(f"gradient shape {grad.shape} does not match K={state.sum_grad.shape[1]}")
    state.sum_grad[i] += grad
    state.sum_sq[i] += grad * grad
    state.steps[i] += 1
    t = int(state.steps[i])
    return threshold_codes(
        state.sum_grad[i] / t, state.sum_sq[i], t, config.lam, config.eta, config.nonnegative
    )


def dictionary_gradient(x, D, a, tau: float) -> np.ndarray:
    """Per-sample gradient ``2 (D a - x) a^T + 2 tau D``."""
    resid = D @ a - x
    return 2.0 * np.outer(resid, a) + 2.0 * tau * D


def dict_update(state: OptimizerState, D: np.ndarray, x, a, config: TrainerConfig) -> np.ndarray:
    """One AdaGrad step on ``D`` (modified in place) for sample ``(x, a)``.

    Entries whose squared-gradient sum is still zero are skipped.  With
    ``tau == 0`` only the columns where ``a`` is nonzero can move, so the
    rest are not touched at all.
    """
    x = np.asarray(x, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    if D.shape != state.dict_sq.shape or x.shape != (D.shape[0],) or a.shape != (D.shape[1],):
        raise ConfigError(f"shape mismatch: x {x.shape}, D {D.shape}, a {a.shape}")
    resid = D @ a - x
    if config.tau == 0:
        cols = np.flatnonzero(a)
        if cols.size == 0:
            return D
        g = 2.0 * np.outer(resid, a[cols])
        G = state.dict_sq[:, cols] + g * g
        state.dict_sq[:, cols] = G
        step = np.zeros_like(g)
        np.divide(g, np.sqrt(G), out=step, where=G > 0)
        D[:, cols] -= config.eta * step
        return D
    g = 2.0 * np.outer(resid, a) + 2.0 * config.tau * D
    # normalize by a local sum so a concurrent lost update cannot make |step| exceed eta
    G = state.dict_sq + g * g
    state.dict_sq[...] = G
    step = np.zeros_like(g)
    np.divide(g, np.sqrt(G), out=step, where=G > 0)
    D -= config.eta * step
    return D
