"""The five boosting trainers plus probability/loss/derivative kernels.

All five trainers share the additive-model skeleton: scores F (N x K)
start at zero, probabilities are the row-wise softmax of F, and each
iteration adds shrunk regression-tree outputs to F.

  mart            first-order split gain, leaf = (K-1)/K * sum(g)/sum(h)
  robust-logit    identical to mart but second-order split gain
  abc-mart        exhaustive base-class search; first-order splits on the
                  base-conditioned residuals; base column forced to the
                  negative sum of the others each iteration
  abc-logit       abc-mart with second-order splits
  classic-logit   per-sample responses z clipped to z_max, trees fit by
                  weighted least squares, per-sample centering across
                  classes (reference implementation)

Trainers are sequential and deterministic: identical config and data give
bit-identical models, and replaying a saved model over the training rows
reproduces the trainer's final score matrix exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .data import Dataset, presort
from .errors import TrainingError
from .tree import (GradientPairs, RegressionTree, SplitCriterion, fit_tree,
                   tree_predict_batch)

P_FLOOR = 1e-15  # floor inside log() of the loss only, never in residuals


class Algorithm(Enum):
    MART = "mart"
    ROBUST_LOGIT = "robust-logit"
    ABC_MART = "abc-mart"
    ABC_LOGIT = "abc-logit"
    CLASSIC_LOGIT = "classic-logit"

    @property
    def is_abc(self) -> bool:
        return self in (Algorithm.ABC_MART, Algorithm.ABC_LOGIT)

    @classmethod
    def from_cli_name(cls, name: str) -> "Algorithm":
        table = {
            "mart": cls.MART,
            "logitboost": cls.ROBUST_LOGIT,
            "abc-mart": cls.ABC_MART,
            "abc-logitboost": cls.ABC_LOGIT,
            "classic-logitboost": cls.CLASSIC_LOGIT,
        }
        try:
            return table[name]
        except KeyError:
            raise ValueError(f"unknown algorithm {name!r}") from None


@dataclass(frozen=True)
class TrainConfig:
    algorithm: Algorithm
    J: int  # terminal nodes per tree
    nu: float  # shrinkage
    M: int  # boosting iterations
    min_leaf: int = 1
    z_max: float = 4.0  # classic-logit response clip
    loss_stop: float = 1e-10  # stop once training loss falls below

    def validate(self) -> None:
        if self.J < 2:
            raise TrainingError("J must be >= 2")
        if not 0.0 < self.nu <= 1.0:
            raise TrainingError("nu must be in (0, 1]")
        if self.M < 1:
            raise TrainingError("M must be >= 1")
        if self.min_leaf < 1:
            raise TrainingError("min_leaf must be >= 1")
        if not 2.0 <= self.z_max <= 4.0:
            raise TrainingError("z_max must lie in [2, 4]")
        if self.loss_stop < 0:
            raise TrainingError("loss_stop must be >= 0")


@dataclass(frozen=True)
class Iteration:
    """Trees committed by one boosting iteration.

    ``classes[i]`` is the class whose score column ``trees[i]`` updates.
    For abc iterations ``base`` is set and no tree is keyed by it.
    """

    classes: tuple[int, ...]
    trees: tuple[RegressionTree, ...]
    base: int | None = None


@dataclass(frozen=True)
class BoostedModel:
    algorithm: Algorithm
    num_classes: int
    num_features: int
    shrinkage: float
    tree_size: int
    iterations: tuple[Iteration, ...]


@dataclass
class TrainingLog:
    train_loss: list[float] = field(default_factory=list)
    test_errors: list[int] | None = None
    base_class: list[int] | None = None
    max_abs_z: list[float] | None = None
    # abc only: per-iteration candidate losses L(b) for every base b
    candidate_losses: list[list[float]] | None = None
    # abc only, first `record_candidates_upto` iterations: per base b, the
    # (class, tree) pairs fitted for that candidate
    candidate_trees: list[list[list[tuple[int, RegressionTree]]]] | None = None


def softmax_probs(F: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-subtraction for overflow safety."""
    F = np.asarray(F, dtype=np.float64)
    shifted = F - F.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def neg_log_likelihood(P: np.ndarray, labels: np.ndarray) -> float:
    """Multi-class negative log-likelihood, true-class probability floored."""
    p_true = P[np.arange(len(labels)), labels]
    return float(-np.sum(np.log(np.maximum(p_true, P_FLOOR))))


def logit_residuals(P: np.ndarray, labels: np.ndarray, k: int) -> GradientPairs:
    """Per-sample g = r_k - p_k (negative gradient), h = p_k (1 - p_k)."""
    pk = P[:, k]
    r = (labels == k).astype(np.float64)
    return GradientPairs(r - pk, pk * (1.0 - pk))


def abc_residuals(P: np.ndarray, labels: np.ndarray, k: int, b: int) -> GradientPairs:
    """Base-conditioned residuals for class k with base class b.

    g = (r_k - p_k) - (r_b - p_b)
    h = p_b(1-p_b) + p_k(1-p_k) + 2 p_b p_k
    """
    if k == b:
        raise ValueError("class k must differ from the base class b")
    pk, pb = P[:, k], P[:, b]
    rk = (labels == k).astype(np.float64)
    rb = (labels == b).astype(np.float64)
    g = (rk - pk) - (rb - pb)
    h = pb * (1.0 - pb) + pk * (1.0 - pk) + 2.0 * pb * pk
    return GradientPairs(g, h)


def _base_overwrite(F: np.ndarray, b: int) -> None:
    """Force column b to the negative sum of the others, in class order.

    Shared by training and replay so both accumulate in the same order and
    stay bit-identical.
    """
    s = np.zeros(F.shape[0], dtype=np.float64)
    for k in range(F.shape[1]):
        if k != b:
            s += F[:, k]
    F[:, b] = -s


def train(config: TrainConfig, train_ds: Dataset, monitor: Dataset | None = None,
          record_candidates_upto: int = 0,
          iteration_callback=None) -> tuple[BoostedModel, TrainingLog]:
    """Run one trainer; returns the model and its per-iteration log.

    ``monitor`` adds a per-iteration misclassification count on a held-out
    set (log-only; never influences training). ``iteration_callback(m, F, P)``
    and ``record_candidates_upto`` exist for verification harnesses.
    """
    config.validate()
    algo = config.algorithm
    K = train_ds.num_classes
    if algo.is_abc and K < 3:
        raise TrainingError(f"{algo.value} requires K >= 3 classes, got K={K}")
    if monitor is not None:
        if monitor.num_features != train_ds.num_features:
            raise TrainingError("monitor feature dimensionality mismatch")
        if monitor.num_classes > K:
            raise TrainingError("monitor declares more classes than the training set")

    order = presort(train_ds)
    y = train_ds.labels
    n = train_ds.num_samples
    nu = config.nu
    crit = (SplitCriterion.FIRST_ORDER
            if algo in (Algorithm.MART, Algorithm.ABC_MART)
            else SplitCriterion.SECOND_ORDER)

    F = np.zeros((n, K), dtype=np.float64)
    P = softmax_probs(F)
    log = TrainingLog()
    if monitor is not None:
        log.test_errors = []
        m_x = monitor.features
        m_f = np.zeros((monitor.num_samples, K), dtype=np.float64)
    if algo.is_abc:
        log.base_class = []
        log.candidate_losses = []
        if record_candidates_upto > 0:
            log.candidate_trees = []
    if algo is Algorithm.CLASSIC_LOGIT:
        log.max_abs_z = []

    iterations: list[Iteration] = []
    for m in range(config.M):
        if algo in (Algorithm.MART, Algorithm.ROBUST_LOGIT):
            it = _plain_iteration(F, P, y, order, config, crit, K, nu)
        elif algo.is_abc:
            it, cand_losses, cand_trees = _abc_iteration(
                F, P, y, order, config, crit, K, nu,
                keep_trees=m < record_candidates_upto)
            log.base_class.append(it.base)
            log.candidate_losses.append(cand_losses)
            if log.candidate_trees is not None and cand_trees is not None:
                log.candidate_trees.append(cand_trees)
        else:
            it, max_z = _classic_iteration(F, P, y, order, config, K, nu)
            log.max_abs_z.append(max_z)
        P = softmax_probs(F)
        iterations.append(it)

        loss = neg_log_likelihood(P, y)
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite training loss at iteration {m}")
        log.train_loss.append(loss)

        if monitor is not None:
            _apply_iteration(m_f, it, algo, nu, K, m_x)
            pred = np.argmax(m_f, axis=1)
            log.test_errors.append(int(np.sum(pred != monitor.labels)))

        if iteration_callback is not None:
            iteration_callback(m, F, P)
        if loss < config.loss_stop:
            break

    model = BoostedModel(algo, K, train_ds.num_features, nu, config.J,
                         tuple(iterations))
    return model, log


def _plain_iteration(F, P, y, order, config, crit, K, nu) -> Iteration:
    factor = (K - 1.0) / K
    trees = []
    for k in range(K):
        pairs = logit_residuals(P, y, k)
        tree, leaf_of = fit_tree(pairs, order, config.J, crit,
                                 config.min_leaf, return_leaf_of=True)
        tree = tree.scaled(factor)
        trees.append(tree)
        F[:, k] += nu * tree.value[leaf_of]
    return Iteration(tuple(range(K)), tuple(trees))


def _abc_iteration(F, P, y, order, config, crit, K, nu, keep_trees=False):
    best_loss = np.inf
    best_b = -1
    best_g = None
    best_trees = None
    cand_losses = []
    cand_trees = [] if keep_trees else None
    for b in range(K):
        G = F.copy()
        trees_b = []
        for k in range(K):
            if k == b:
                continue
            pairs = abc_residuals(P, y, k, b)
            tree, leaf_of = fit_tree(pairs, order, config.J, crit,
                                     config.min_leaf, return_leaf_of=True)
            trees_b.append((k, tree))
            G[:, k] = F[:, k] + nu * tree.value[leaf_of]
        _base_overwrite(G, b)
        q = softmax_probs(G)
        loss_b = neg_log_likelihood(q, y)
        cand_losses.append(loss_b)
        if keep_trees:
            cand_trees.append(trees_b)
        if loss_b < best_loss:  # strict: ties keep the smallest b
            best_loss = loss_b
            best_b = b
            best_g = G
            best_trees = trees_b
    F[:] = best_g
    classes = tuple(k for k, _ in best_trees)
    trees = tuple(t for _, t in best_trees)
    return Iteration(classes, trees, best_b), cand_losses, cand_trees


def _classic_iteration(F, P, y, order, config, K, nu):
    n = len(y)
    factor = (K - 1.0) / K
    fvals = np.empty((n, K), dtype=np.float64)
    trees = []
    max_z = 0.0
    for k in range(K):
        pk = P[:, k]
        rk = y == k
        with np.errstate(divide="ignore"):
            z = np.where(rk, 1.0 / pk, -1.0 / (1.0 - pk))
        np.clip(z, -config.z_max, config.z_max, out=z)
        max_z = max(max_z, float(np.abs(z).max()))
        w = pk * (1.0 - pk)
        tree, leaf_of = fit_tree(GradientPairs(z * w, w), order, config.J,
                                 SplitCriterion.SECOND_ORDER, config.min_leaf,
                                 return_leaf_of=True)
        trees.append(tree)
        fvals[:, k] = tree.value[leaf_of]
    F += nu * factor * (fvals - fvals.mean(axis=1, keepdims=True))
    return Iteration(tuple(range(K)), tuple(trees)), max_z


def _apply_iteration(F: np.ndarray, it: Iteration, algo: Algorithm, nu: float,
                     K: int, X: np.ndarray) -> None:
    """Replay one iteration onto a score matrix, training-identical arithmetic."""
    if algo is Algorithm.CLASSIC_LOGIT:
        fvals = np.empty((X.shape[0], K), dtype=np.float64)
        for k, tree in zip(it.classes, it.trees):
            fvals[:, k] = tree_predict_batch(tree, X)
        F += nu * ((K - 1.0) / K) * (fvals - fvals.mean(axis=1, keepdims=True))
        return
    for k, tree in zip(it.classes, it.trees):
        F[:, k] += nu * tree_predict_batch(tree, X)
    if it.base is not None:
        _base_overwrite(F, it.base)


def predict_scores_batch(model: BoostedModel, X) -> np.ndarray:
    """Final score matrix for many rows, replaying iterations in order."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.num_features:
        raise ValueError(
            f"expected feature matrix with {model.num_features} columns")
    F = np.zeros((X.shape[0], model.num_classes), dtype=np.float64)
    for it in model.iterations:
        _apply_iteration(F, it, model.algorithm, model.shrinkage,
                         model.num_classes, X)
    return F


def predict_scores(model: BoostedModel, x) -> np.ndarray:
    """Length-K score vector for one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.num_features:
        raise ValueError(f"expected a feature vector of length {model.num_features}")
    return predict_scores_batch(model, x[None, :])[0]


def predict_class(model: BoostedModel, x) -> int:
    """Argmax class id; ties go to the smallest id."""
    return int(np.argmax(predict_scores(model, x)))


def predict_class_batch(model: BoostedModel, X) -> np.ndarray:
    return np.argmax(predict_scores_batch(model, X), axis=1)
