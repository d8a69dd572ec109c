"""Soft-margin SVM trained by SMO on internally standardized features."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import TrainingError
from ._backend import core
from .base import Dataset, SVMParams

KKT_TOL = 1e-3
MAX_PASSES = 20_000_000


def _kernel_matrix(params: SVMParams, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if params.kernel == "linear":
        return A @ B.T
    sq = (np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :]
          - 2.0 * (A @ B.T))
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-params.gamma * sq)


@dataclass
class SVMModel:
    """Support vectors live in standardized space; sign 0 predicts MCI_AD."""

    params: SVMParams
    mean: np.ndarray
    scale: np.ndarray
    sv: np.ndarray          # standardized support-vector rows
    sv_coef: np.ndarray     # alpha_i * y_i
    bias: float
    degenerate: bool        # no free support vector pinned the bias
    objective_trace: Optional[np.ndarray] = field(default=None, repr=False)

    def decision(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Z = (X - self.mean) / self.scale
        if len(self.sv) == 0:
            return np.full(Z.shape[0], self.bias)
        return self.sv_coef @ _kernel_matrix(self.params, self.sv, Z) + self.bias

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.decision(X) >= 0.0).astype(np.int8)


def train_svm(train: Dataset, params: SVMParams = SVMParams("linear", 1.0),
              seed: int = 0, max_passes: int = MAX_PASSES,
              want_trace: bool = False) -> SVMModel:
    """Standardize with training mean/SD (sample SD; zero SD becomes 1),
    then solve the dual by SMO to KKT tolerance 1e-3."""
    del seed  # training is deterministic; kept for a uniform trainer signature
    train.require_both_classes()
    X, y = train.X, train.y
    mean = X.mean(axis=0)
    scale = X.std(axis=0, ddof=1)
    scale = np.where(scale == 0.0, 1.0, scale)
    Z = (X - mean) / scale
    y_pm = (2.0 * y - 1.0).astype(np.float64)

    K = _kernel_matrix(params, Z, Z)
    alpha, bias, passes, converged, trace = core.smo_train(
        K, y_pm, float(params.c), KKT_TOL, max_passes, want_trace)
    if not converged:
        raise TrainingError(
            f"SMO did not converge within the {max_passes}-iteration cap")

    sv_mask = alpha > 1e-12
    free = (alpha > 1e-12) & (alpha < params.c - 1e-12)
    return SVMModel(
        params=params,
        mean=mean,
        scale=scale,
        sv=Z[sv_mask],
        sv_coef=(alpha * y_pm)[sv_mask],
        bias=float(bias),
        degenerate=not bool(free.any()),
        objective_trace=trace if want_trace else None,
    )
