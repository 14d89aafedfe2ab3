"""Intrinsic and extrinsic evaluation of word vectors.

Word similarity (cosine against human scores, Spearman's rho), sentence
classification with l2-regularized logistic regression on averaged or
concatenated word vectors, k-means clustering of vectors, and generation of
word-intrusion instances for human annotation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, log_expit, logsumexp
from scipy.stats import rankdata

from .core import UndefinedSimilarityError, cosine
from .io import LabeledTextDataset, SimilarityDataset

logger = logging.getLogger(__name__)

DEFAULT_L2_GRID = tuple(float(v) for v in np.logspace(-3, 2, 6))


class UndefinedCorrelationError(ValueError):
    pass


class EvaluationError(ValueError):
    pass


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman's rho: Pearson correlation of average-tie ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"inputs must be 1-d and equal length, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise ValueError("need at least 2 observations")
    rx = rankdata(x) - (x.size + 1) / 2.0
    ry = rankdata(y) - (y.size + 1) / 2.0
    denom = math.sqrt(float(np.dot(rx, rx)) * float(np.dot(ry, ry)))
    if denom == 0.0:
        raise UndefinedCorrelationError("rank correlation is undefined for constant input")
    return min(1.0, max(-1.0, float(np.dot(rx, ry)) / denom))


@dataclass
class SimilarityResult:
    rho: float
    covered: int
    skipped: int
    # covered pairs where a vector was all zeros; also counted in skipped
    undefined: int = 0


def eval_similarity(vectors, dataset: SimilarityDataset) -> SimilarityResult:
    """Correlate cosine similarities with human scores.

    Pairs with an out-of-vocabulary word are skipped, as are pairs where one
    vector is all zeros (cosine undefined); both are counted.
    """
    model, gold = [], []
    skipped = undefined = 0
    for w1, w2, score in dataset.pairs:
        if w1 not in vectors or w2 not in vectors:
            skipped += 1
            continue
        try:
            model.append(cosine(vectors.vector(w1), vectors.vector(w2)))
        except UndefinedSimilarityError:
            skipped += 1
            undefined += 1
            continue
        gold.append(score)
    if len(model) < 2:
        raise EvaluationError(f"only {len(model)} pairs covered; need at least 2")
    return SimilarityResult(spearman(model, gold), len(model), skipped, undefined)


def featurize(tokens: Sequence[str], vectors, mode: str = "average", n_tokens: int = 3):
    """Feature vector for one example and whether it had no known tokens.

    ``average`` means the in-vocabulary token vectors (zeros if none);
    ``concat`` joins exactly ``n_tokens`` vectors in order, zero-filling
    unknown words.
    """
    dim = vectors.dim
    if mode == "average":
        known = [vectors.dense_vector(t) for t in tokens if t in vectors]
        if not known:
            return np.zeros(dim), True
        return np.mean(known, axis=0), False
    if mode == "concat":
        if len(tokens) != n_tokens:
            raise EvaluationError(f"concat mode needs {n_tokens} tokens, got {len(tokens)}")
        parts = [vectors.dense_vector(t) if t in vectors else np.zeros(dim) for t in tokens]
        return np.concatenate(parts), not any(t in vectors for t in tokens)
    raise ValueError(f"unknown feature mode {mode!r}")


def featurize_dataset(ds: LabeledTextDataset, vectors, mode="average", n_tokens=3):
    """Stack features for every example; returns ``(F, labels, n_flagged)``."""
    rows, flagged = [], 0
    for tokens, _ in ds.examples:
        f, empty = featurize(tokens, vectors, mode, n_tokens)
        rows.append(f)
        flagged += empty
    width = vectors.dim * (n_tokens if mode == "concat" else 1)
    F = np.array(rows, dtype=np.float64).reshape(len(rows), width)
    return F, [label for _, label in ds.examples], flagged


@dataclass
class LogisticModel:
    classes: tuple
    W: np.ndarray  # d x m; m == 1 for two classes
    b: np.ndarray
    l2: float

    def scores(self, F) -> np.ndarray:
        return np.asarray(F, dtype=np.float64) @ self.W + self.b

    def predict(self, F) -> list:
        s = self.scores(F)
        if len(self.classes) == 2:
            idx = (s[:, 0] > 0).astype(int)
        else:
            idx = np.argmax(s, axis=1)
        return [self.classes[i] for i in idx]

    def accuracy(self, F, labels) -> float:
        pred = self.predict(F)
        return float(np.mean([p == y for p, y in zip(pred, labels)]))


def logreg_loss_grad(params, F, y, n_classes: int, l2: float):
    """Mean cross-entropy plus ``l2/2 * ||W||^2`` (bias unpenalized) and its gradient.

    ``params`` packs ``W`` (``d x m``) then ``b`` (``m``), where ``m`` is 1
    for binary (sigmoid) problems and ``n_classes`` otherwise.  ``y`` holds
    integer class ids.
    """
    n, d = F.shape
    m = 1 if n_classes == 2 else n_classes
    W = params[: d * m].reshape(d, m)
    b = params[d * m :]
    S = F @ W + b
    if m == 1:
        s = S[:, 0]
        sign = np.where(y == 1, 1.0, -1.0)
        loss = -float(np.mean(log_expit(sign * s)))
        dS = (-sign * expit(-sign * s) / n)[:, None]
    else:
        lse = logsumexp(S, axis=1)
        loss = float(np.mean(lse - S[np.arange(n), y]))
        P = np.exp(S - lse[:, None])
        P[np.arange(n), y] -= 1.0
        dS = P / n
    loss += 0.5 * l2 * float(np.sum(W * W))
    gW = F.T @ dS + l2 * W
    gb = dS.sum(axis=0)
    return loss, np.concatenate([gW.ravel(), gb])


def _encode(labels, classes):
    lookup = {c: i for i, c in enumerate(classes)}
    try:
        return np.array([lookup[y] for y in labels], dtype=np.int64)
    except KeyError as e:
        raise EvaluationError(f"label {e.args[0]!r} not seen in training data") from None


def fit_logreg(F, labels, l2: float, classes=None, tol: float = 1e-6, max_iter: int = 2000,
               init=None) -> LogisticModel:
    """Fit one l2-regularized logistic regression (softmax when more than two classes).

    Minimized with L-BFGS until the projected gradient norm drops below
    ``tol`` or ``max_iter`` iterations pass.
    """
    F = np.asarray(F, dtype=np.float64)
    classes = tuple(classes) if classes is not None else tuple(dict.fromkeys(labels))
    if len(set(labels)) < 2:
        raise EvaluationError("training data has a single class")
    y = _encode(labels, classes)
    d = F.shape[1]
    m = 1 if len(classes) == 2 else len(classes)
    x0 = np.zeros(d * m + m) if init is None else np.asarray(init, dtype=np.float64)
    res = minimize(
        logreg_loss_grad, x0, args=(F, y, len(classes), l2), jac=True, method="L-BFGS-B",
        options={"gtol": tol, "maxiter": max_iter, "maxcor": 20},
    )
    W = res.x[: d * m].reshape(d, m)
    b = res.x[d * m :]
    return LogisticModel(classes, W, b, l2)


@dataclass
class ClassifierResult:
    model: LogisticModel
    l2: float
    dev_accuracy: dict = field(default_factory=dict)
    test_accuracy: float | None = None


def train_logreg(train, dev, l2_grid=DEFAULT_L2_GRID, test=None) -> ClassifierResult:
    """Pick the l2 strength with the best dev accuracy (ties go to the larger value).

    ``train``, ``dev`` and ``test`` are ``(features, labels)`` pairs.
    """
    Ftr, ytr = train
    Fdev, ydev = dev
    classes = tuple(dict.fromkeys(ytr))
    if len(classes) < 2:
        raise EvaluationError("training data has a single class")
    best = None
    accs = {}
    for l2 in sorted(l2_grid):
        model = fit_logreg(Ftr, ytr, l2, classes)
        acc = model.accuracy(Fdev, ydev)
        accs[l2] = acc
        if best is None or acc >= best[0]:
            best = (acc, model)
    result = ClassifierResult(best[1], best[1].l2, accs)
    if test is not None:
        result.test_accuracy = best[1].accuracy(*test)
    return result


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    wcss: float
    history: list[float]
    iterations: int


def _sq_dists(X, C, x_sq):
    d = x_sq[:, None] - 2.0 * (X @ C.T) + np.sum(C * C, axis=1)[None, :]
    return np.maximum(d, 0.0)


def _kmeanspp(X, k, rng):
    n = X.shape[0]
    x_sq = np.sum(X * X, axis=1)
    centers = [int(rng.integers(n))]
    closest = _sq_dists(X, X[centers], x_sq)[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            rest = np.setdiff1d(np.arange(n), centers)
            nxt = int(rng.choice(rest))
        centers.append(nxt)
        closest = np.minimum(closest, _sq_dists(X, X[[nxt]], x_sq)[:, 0])
    return X[centers].copy()


def kmeans(X, k: int, seed: int = 0, max_iters: int = 100) -> KMeansResult:
    """Lloyd's algorithm from a seeded k-means++ start.

    An empty cluster is re-seeded with the point farthest from its current
    centroid.  ``history`` holds the within-cluster sum of squares after
    each assignment step and never increases.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    C = _kmeanspp(X, k, rng)
    x_sq = np.sum(X * X, axis=1)
    labels = None
    history = []
    it = 0
    for it in range(1, max_iters + 1):
        new = np.argmin(_sq_dists(X, C, x_sq), axis=1)
        counts = np.bincount(new, minlength=k)
        for e in np.flatnonzero(counts == 0):
            cost = np.sum((X - C[new]) ** 2, axis=1)
            # only steal from clusters that keep at least one point
            cost[counts[new] <= 1] = -1.0
            p = int(np.argmax(cost))
            counts[new[p]] -= 1
            new[p] = e
            counts[e] = 1
            C[e] = X[p]
        history.append(float(np.sum((X - C[new]) ** 2)))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            C[j] = X[labels == j].mean(axis=0)
    wcss = float(np.sum((X - C[labels]) ** 2))
    return KMeansResult(labels, C, wcss, history, it)


@dataclass(frozen=True)
class IntrusionInstance:
    dimension: int
    top_words: tuple[str, str, str, str]
    intruder: str
    presented: tuple[str, ...]


def gen_intrusions(vectors, n_dims: int = 25, per_dim: int = 1, seed: int = 0):
    """Build word-intrusion instances for the highest-variance dimensions.

    Each instance holds the four top-ranked words of a dimension and one
    intruder from the bottom half of that dimension's ranking that is in the
    top 10% (``ceil(0.1 V)`` words) of some other dimension.  Intruders are
    sampled uniformly without replacement among valid candidates.

    Returns ``(instances, skipped_dimensions)``.
    """
    M = vectors.to_dense()
    vocab = vectors.vocab
    V, K = M.shape
    if V < 5:
        raise EvaluationError(f"need at least 5 words, got {V}")
    rng = np.random.default_rng(seed)
    n_top = math.ceil(0.1 * V)
    n_bottom = V // 2
    # per word: number of dimensions where it ranks in the top decile
    top_sets = np.argpartition(-M, n_top - 1, axis=0)[:n_top] if n_top < V else None
    top_count = np.zeros(V, dtype=np.int64)
    if top_sets is None:
        top_count[:] = K
    else:
        np.add.at(top_count, top_sets.ravel(), 1)
    variances = M.var(axis=0)
    dims = np.argsort(-variances, kind="stable")[: min(n_dims, K)]
    instances, skipped = [], []
    for j in dims:
        j = int(j)
        order = np.argsort(-M[:, j], kind="stable")
        top4 = order[:4]
        own_top = np.zeros(V, dtype=bool)
        own_top[top_sets[:, j] if top_sets is not None else slice(None)] = True
        cands = [
            int(w) for w in order[V - n_bottom :]
            if w not in top4 and top_count[w] - own_top[w] >= 1
        ]
        if not cands:
            skipped.append(j)
            logger.info("dimension %d: no valid intruder", j)
            continue
        picks = rng.choice(cands, size=min(per_dim, len(cands)), replace=False)
        for w in picks:
            words = [vocab[i] for i in top4] + [vocab[int(w)]]
            presented = tuple(words[i] for i in rng.permutation(5))
            instances.append(IntrusionInstance(j, tuple(words[:4]), words[4], presented))
    return instances, skipped
