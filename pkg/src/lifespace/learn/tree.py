"""Single gain-ratio trees: growth via the kernel backend, pessimistic
pruning, and the public split-scoring function."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import betaincinv

from ._backend import core


class SplitScore(NamedTuple):
    gain: float
    split_info: float
    gain_ratio: float


def entropy_split_score(X, y, feature: int, threshold: float,
                        weights=None) -> SplitScore:
    """Information gain, split information, and gain ratio (all in bits)
    for the binary split x[feature] <= threshold.

    Degenerate splits (an empty side) score (0, 0, 0); a zero-entropy parent
    yields gain ratio 0.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if len(y) < 2:
        raise ValueError("need at least 2 cases to score a split")
    w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=np.float64)

    left = X[:, feature] <= threshold
    w_left, w_right = float(w[left].sum()), float(w[~left].sum())
    total = w_left + w_right
    if w_left == 0.0 or w_right == 0.0:
        return SplitScore(0.0, 0.0, 0.0)

    def entropy(mask) -> float:
        ww = w[mask]
        tot = ww.sum()
        h = 0.0
        for cls in np.unique(y):
            frac = float(ww[y[mask] == cls].sum()) / tot
            if frac > 0.0:
                h -= frac * math.log2(frac)
        return h

    everything = np.ones(len(y), dtype=bool)
    gain = (entropy(everything)
            - (w_left / total) * entropy(left)
            - (w_right / total) * entropy(~left))
    pl, pr = w_left / total, w_right / total
    split_info = -pl * math.log2(pl) - pr * math.log2(pr)
    if gain <= 0.0 or split_info <= 0.0:
        return SplitScore(max(gain, 0.0), split_info, 0.0)
    return SplitScore(gain, split_info, gain / split_info)


def presort(X: np.ndarray) -> np.ndarray:
    """Per-feature stable argsort, shaped (p, n) int32, for the tree kernel."""
    n, p = X.shape
    order = np.empty((p, n), dtype=np.int32)
    for f in range(p):
        order[f] = np.argsort(X[:, f], kind="stable").astype(np.int32)
    return order


def log2_table(n: int) -> np.ndarray:
    """k*log2(k) for k = 0..n; shared by both kernel backends."""
    table = np.zeros(n + 1, dtype=np.float64)
    for k in range(2, n + 1):
        table[k] = k * math.log2(k)
    return table


@dataclass
class Tree:
    """Flat-array binary tree. feature == -1 marks a leaf; pruning collapses
    a node by flipping its feature to -1 (children become unreachable)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    n_cases: np.ndarray
    w0: np.ndarray
    w1: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        offsets = np.array([0, len(self.feature)], dtype=np.int32)
        return core.predict_trees(self.feature, self.threshold, self.left,
                                  self.right, self.w0, self.w1, offsets,
                                  np.atleast_2d(X))[0]

    def reachable_nodes(self) -> list[int]:
        out = []
        stack = [0]
        while stack:
            i = stack.pop()
            out.append(i)
            if self.feature[i] >= 0:
                stack.append(int(self.right[i]))
                stack.append(int(self.left[i]))
        return out

    def n_leaves(self) -> int:
        return sum(1 for i in self.reachable_nodes() if self.feature[i] < 0)

    def depth(self) -> int:
        depths = {0: 0}
        best = 0
        for i in self.reachable_nodes():
            d = depths[i]
            best = max(best, d)
            if self.feature[i] >= 0:
                depths[int(self.left[i])] = d + 1
                depths[int(self.right[i])] = d + 1
        return best


def grow_tree(X, y, weights, order, table, mtry: Optional[int] = None,
              min_weight: float = 2.0, bootstrap: bool = False,
              seed: int = 0) -> Tree:
    """Grow one tree through the kernel backend."""
    p = X.shape[1]
    seeds = np.array([seed], dtype=np.uint64)
    arrays = core.grow_forest(X, y, weights, order, table, 1,
                              mtry if mtry is not None else p,
                              min_weight, bootstrap, seeds)
    feature, threshold, left, right, n_cases, w0, w1, _ = arrays
    return Tree(feature, threshold, left, right, n_cases, w0, w1)


@lru_cache(maxsize=200_000)
def _extra_errors(n: float, e: float, cf: float) -> float:
    """Pessimistic additional errors: binomial upper confidence bound at CF."""
    if n <= 0.0:
        return 0.0
    e = min(max(e, 0.0), n)
    if n - e < 1e-9:
        return 0.0
    if e < 1e-9:
        return n * (1.0 - cf ** (1.0 / n))
    upper = float(betaincinv(e + 1.0, n - e, 1.0 - cf))
    return min(max(n * upper - e, 0.0), n - e)


def pessimistic_error(tree: Tree, cf: float = 0.25) -> float:
    """Predicted (pessimistic) training errors of the tree's current leaves."""
    total = 0.0
    for i in tree.reachable_nodes():
        if tree.feature[i] < 0:
            w = tree.w0[i] + tree.w1[i]
            e = w - max(tree.w0[i], tree.w1[i])
            total += e + _extra_errors(float(w), float(e), cf)
    return total


def prune_tree(tree: Tree, cf: float = 0.25) -> Tree:
    """Collapse subtrees whose pessimistic error estimate would not grow.

    Works bottom-up (child ids always exceed the parent's in the preorder
    layout), so a collapsed child's estimate feeds its ancestors. The
    estimate never increases: a node collapses only when the leaf estimate
    is <= the subtree estimate.
    """
    k = len(tree.feature)
    est = np.zeros(k, dtype=np.float64)
    for i in range(k - 1, -1, -1):
        w = float(tree.w0[i] + tree.w1[i])
        e = w - float(max(tree.w0[i], tree.w1[i]))
        leaf_est = e + _extra_errors(w, e, cf)
        if tree.feature[i] < 0:
            est[i] = leaf_est
        else:
            subtree = est[tree.left[i]] + est[tree.right[i]]
            if leaf_est <= subtree:
                tree.feature[i] = -1
                est[i] = leaf_est
            else:
                est[i] = subtree
    return tree
