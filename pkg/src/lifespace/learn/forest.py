"""Random forest: bootstrap-sampled, feature-subsampled, unpruned gain-ratio
trees with majority voting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import core
from .base import Dataset, RFParams, derive_seed
from .tree import log2_table, presort


@dataclass
class RFModel:
    """Stacked node arrays for all trees; vote ties go to the positive class."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    n_cases: np.ndarray
    w0: np.ndarray
    w1: np.ndarray
    offsets: np.ndarray
    params: RFParams
    n_features: int

    @property
    def n_trees(self) -> int:
        return len(self.offsets) - 1

    def tree_votes(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return core.predict_trees(self.feature, self.threshold, self.left,
                                  self.right, self.w0, self.w1, self.offsets, X)

    def predict(self, X: np.ndarray) -> np.ndarray:
        votes1 = self.tree_votes(X).sum(axis=0, dtype=np.int64)
        return (2 * votes1 >= self.n_trees).astype(np.int8)


def train_rf(train: Dataset, params: RFParams = RFParams(),
             seed: int = 0) -> RFModel:
    """Grow the whole forest in one kernel call (per-tree derived seeds)."""
    train.require_both_classes()
    if not 1 <= params.mtry <= train.p:
        raise ValueError(f"mtry {params.mtry} outside [1, {train.p}]")
    order = presort(train.X)
    table = log2_table(train.n)
    seeds = np.array([derive_seed(seed, "rf", t) for t in range(params.n_trees)],
                     dtype=np.uint64)
    arrays = core.grow_forest(train.X, train.y, None, order, table,
                              params.n_trees, params.mtry, 1.0,
                              params.bootstrap, seeds)
    return RFModel(*arrays, params=params, n_features=train.p)
