"""Boosted gain-ratio trees with pessimistic pruning (C5.0-style) and the
case-flow variable importance that goes with them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from .base import C50Params, Dataset, derive_seed
from .tree import Tree, grow_tree, log2_table, presort, prune_tree

_EPS_FLOOR = 1e-8  # stage-weight clamp for a zero-error trial


@dataclass
class C50Model:
    """Weighted vote over boosted trees; vote ties go to the positive class."""

    trees: list[Tree]
    stage_weights: list[float]
    params: C50Params
    n_features: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        vote1 = np.zeros(X.shape[0])
        vote0 = np.zeros(X.shape[0])
        for tree, a in zip(self.trees, self.stage_weights):
            pred = tree.predict(X)
            vote1 += a * (pred == 1)
            vote0 += a * (pred == 0)
        return (vote1 >= vote0).astype(np.int8)


def train_c50(train: Dataset, params: C50Params = C50Params(),
              seed: int = 0) -> C50Model:
    """Boost pruned gain-ratio trees with multiplicative reweighting.

    The first trial is always retained. Boosting stops early when a trial's
    weighted error reaches 0 (trial kept, stage weight clamped) or 0.5 or
    more (trial discarded unless it is the first).
    """
    train.require_both_classes()
    X, y = train.X, train.y
    n, p = train.n, train.p
    order = presort(X)
    table = log2_table(n)

    weights: np.ndarray | None = None  # None = uniform, kernel fast path
    trees: list[Tree] = []
    stage_weights: list[float] = []
    for trial in range(params.trials):
        tree = grow_tree(X, y, weights, order, table, mtry=p,
                         min_weight=params.min_cases, bootstrap=False,
                         seed=derive_seed(seed, "c50", trial))
        prune_tree(tree, params.cf)
        pred = tree.predict(X)
        miss = pred != y
        w = np.ones(n) if weights is None else weights
        err = float(w[miss].sum() / w.sum())

        if err >= 0.5:
            if trial == 0:
                trees.append(tree)
                stage_weights.append(0.0)
            break
        if err <= 0.0:
            trees.append(tree)
            stage_weights.append(math.log((1.0 - _EPS_FLOOR) / _EPS_FLOOR))
            break
        trees.append(tree)
        stage_weights.append(math.log((1.0 - err) / err))

        beta = err / (1.0 - err)
        w = w.copy()
        w[~miss] *= beta
        w *= n / w.sum()  # keep min_cases calibrated in weighted cases
        weights = w

    if not trees:  # unreachable: the first trial is always kept
        raise TrainingError("boosting produced no usable tree")
    return C50Model(trees, stage_weights, params, p)


def c50_importance(model: C50Model) -> np.ndarray:
    """Per-feature share of training cases flowing through split nodes,
    averaged over trials and normalized to sum 100 (all-zero for stumps)."""
    if not isinstance(model, C50Model):
        raise TypeError("importance is defined for boosted-tree models only")
    total = np.zeros(model.n_features)
    for tree in model.trees:
        imp = np.zeros(model.n_features)
        root_cases = float(tree.n_cases[0])
        for i in tree.reachable_nodes():
            f = int(tree.feature[i])
            if f >= 0:
                imp[f] += 100.0 * float(tree.n_cases[i]) / root_cases
        total += imp
    total /= len(model.trees)
    s = total.sum()
    if s > 0.0:
        total *= 100.0 / s
    return total
