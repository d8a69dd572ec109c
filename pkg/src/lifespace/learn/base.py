"""Shared dataset/HyperParams types, label coding, and seed derivation."""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ..errors import TrainingError
from ..trips import FEATURE_NAMES, LifeSpaceVector

POSITIVE_LABEL = "MCI_AD"   # the class the pipeline screens for
NEGATIVE_LABEL = "CU"

_MASK64 = (1 << 64) - 1


def label_to_int(label: str) -> int:
    if label == POSITIVE_LABEL:
        return 1
    if label == NEGATIVE_LABEL:
        return 0
    raise ValueError(f"unknown class label {label!r}")


def int_to_label(value: int) -> str:
    return POSITIVE_LABEL if value else NEGATIVE_LABEL


def splitmix64(x: int) -> int:
    """One splitmix64 output step; the shared PRNG scramble for seed chains."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *parts: int | str) -> int:
    """Stable seed derivation: fold tags into the base with splitmix64."""
    state = base & _MASK64
    for part in parts:
        tag = zlib.crc32(part.encode()) if isinstance(part, str) else int(part)
        state = splitmix64(state ^ (tag & _MASK64))
    return state


@dataclass
class Dataset:
    """Feature matrix plus 0/1 class labels (1 = MCI_AD)."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.int8)
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X and y shapes disagree")
        if self.X.shape[0] < 2:
            raise ValueError("need at least 2 samples")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("non-finite feature values")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, idx: Sequence[int]) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.X[idx], self.y[idx], self.feature_names)

    def require_both_classes(self, what: str = "training") -> None:
        if len(np.unique(self.y)) < 2:
            raise TrainingError(f"{what} requires both classes to be present")

    @classmethod
    def from_vectors(cls, vectors: Iterable[LifeSpaceVector]
                     ) -> tuple["Dataset", list[str]]:
        vectors = list(vectors)
        X = np.array([v.features for v in vectors], dtype=np.float64)
        y = np.array([label_to_int(v.ca_label) for v in vectors], dtype=np.int8)
        return cls(X, y), [v.driver_id for v in vectors]


@dataclass(frozen=True)
class C50Params:
    """Boosted gain-ratio tree settings (canonical C5.0 defaults)."""

    trials: int = 10
    min_cases: float = 2.0     # weighted cases per child
    cf: float = 0.25           # pruning confidence factor

    def complexity_key(self):
        return (self.trials,)


@dataclass(frozen=True)
class RFParams:
    """Random forest settings; bootstrap=False is a test hook."""

    n_trees: int = 500
    mtry: int = 3
    bootstrap: bool = True

    def complexity_key(self):
        return (self.n_trees, self.mtry)


@dataclass(frozen=True)
class SVMParams:
    """Soft-margin SVM settings; gamma is ignored by the linear kernel."""

    kernel: str = "rbf"        # "linear" or "rbf"
    c: float = 1.0
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.kernel not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "rbf" and self.gamma is None:
            raise ValueError("rbf kernel requires gamma")

    def complexity_key(self):
        return (self.kernel != "linear", self.c, self.gamma or 0.0)


def default_grids(n_features: int = 12) -> dict[str, list]:
    """The tuning grids used by the evaluation protocol."""
    gammas = [1.0 / (4 * n_features), 1.0 / n_features, 4.0 / n_features]
    return {
        "c50": [C50Params(trials=t) for t in (1, 5, 10, 20)],
        "rf": [RFParams(mtry=m) for m in (2, 3, 4, 6)],
        "svm": ([SVMParams("linear", c) for c in (0.1, 1.0, 10.0, 100.0)]
                + [SVMParams("rbf", c, g)
                   for c in (0.1, 1.0, 10.0, 100.0) for g in gammas]),
    }
