"""Stratified k-fold cross-validation for hyperparameter selection."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import FoldError
from .base import C50Params, Dataset, RFParams, SVMParams, derive_seed
from .boost import train_c50
from .forest import train_rf
from .svm import train_svm


def fit_with_params(train: Dataset, params, seed: int = 0):
    """Dispatch to the right trainer from the params type."""
    if isinstance(params, C50Params):
        return train_c50(train, params, seed)
    if isinstance(params, RFParams):
        return train_rf(train, params, seed)
    if isinstance(params, SVMParams):
        return train_svm(train, params, seed)
    raise TypeError(f"unknown hyperparameter type {type(params).__name__}")


def stratified_folds(y: np.ndarray, k: int, seed: int = 0) -> list[np.ndarray]:
    """Deal each class round-robin into k folds after a seeded shuffle."""
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == cls))
        for j, ix in enumerate(idx):
            folds[j % k].append(int(ix))
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]


def cv_tune(train: Dataset, grid: Sequence, k: int = 10, seed: int = 0):
    """Pick the grid point with the best mean fold accuracy.

    The grid is scanned in ascending complexity (fewer trials, smaller mtry,
    linear before RBF, smaller C then smaller gamma) and only a strictly
    better mean accuracy displaces the incumbent, so ties go to the least
    complex configuration.
    """
    if train.n < k:
        raise FoldError(f"{k}-fold CV needs at least {k} samples, have {train.n}")
    train.require_both_classes()
    if not grid:
        raise ValueError("empty hyperparameter grid")

    folds = stratified_folds(train.y, k, derive_seed(seed, "folds"))
    fit_seeds = [derive_seed(seed, "cvfit", j) for j in range(k)]
    all_idx = np.arange(train.n)

    best = None
    best_acc = -1.0
    for params in sorted(grid, key=lambda hp: hp.complexity_key()):
        fold_accs = []
        for j, test_idx in enumerate(folds):
            if len(test_idx) == 0:
                continue
            train_idx = np.setdiff1d(all_idx, test_idx, assume_unique=True)
            model = fit_with_params(train.subset(train_idx), params, fit_seeds[j])
            pred = model.predict(train.X[test_idx])
            fold_accs.append(float((pred == train.y[test_idx]).mean()))
        acc = sum(fold_accs) / len(fold_accs)
        if acc > best_acc:
            best_acc = acc
            best = params
    return best
