"""From-scratch classifiers (boosted gain-ratio trees, random forest, SVM),
k-fold tuning, and variable importance."""

from __future__ import annotations

import numpy as np

from ..errors import PredictionError
from ._backend import backend_name
from .base import (C50Params, Dataset, RFParams, SVMParams, default_grids,
                   derive_seed, int_to_label, label_to_int,
                   NEGATIVE_LABEL, POSITIVE_LABEL)
from .boost import C50Model, c50_importance, train_c50
from .dump import model_debug_json
from .forest import RFModel, train_rf
from .svm import SVMModel, train_svm
from .tree import (SplitScore, Tree, entropy_split_score, pessimistic_error,
                   prune_tree)
from .tune import cv_tune, fit_with_params, stratified_folds

__all__ = [
    "backend_name", "C50Params", "Dataset", "RFParams", "SVMParams",
    "default_grids", "derive_seed", "int_to_label", "label_to_int",
    "NEGATIVE_LABEL", "POSITIVE_LABEL", "C50Model", "c50_importance",
    "train_c50", "RFModel", "train_rf", "SVMModel", "train_svm",
    "SplitScore", "Tree", "entropy_split_score", "pessimistic_error",
    "prune_tree", "cv_tune", "fit_with_params", "stratified_folds",
    "model_debug_json",
    "predict", "predict_many",
]


def predict_many(model, X) -> np.ndarray:
    """Predict 0/1 classes for a matrix of feature rows."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if not np.all(np.isfinite(X)):
        raise PredictionError("prediction input contains non-finite values")
    return model.predict(X)


def predict(model, x) -> str:
    """Predict the class label for one feature vector."""
    return int_to_label(int(predict_many(model, x)[0]))
