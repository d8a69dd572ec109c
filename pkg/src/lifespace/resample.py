"""The resampled evaluation protocol: split generation, per-split model
fitting with 10-fold tuning, metric summaries, per-driver misclassification,
and importance aggregation."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import SplitError, SummaryError, LifeSpaceError
from .learn import (Dataset, c50_importance, cv_tune, default_grids,
                    derive_seed, fit_with_params)
from .trips import FEATURE_NAMES, LifeSpaceVector

logger = logging.getLogger(__name__)

MODEL_NAMES = ("svm", "rf", "c50")

MIN_COHORT = 5


@dataclass(frozen=True)
class SplitPlan:
    """One 80/20 partition; seed drives every stochastic step of the split."""

    split_id: int
    train_idx: np.ndarray
    test_idx: np.ndarray
    seed: int


@dataclass
class ModelResult:
    accuracy: float
    tp: int
    fp: int
    fn: int
    tn: int
    predicted: np.ndarray                 # aligned with the plan's test_idx
    importance: Optional[np.ndarray] = None
    params: object = None


@dataclass
class SplitResult:
    split_id: int
    models: dict[str, ModelResult] = field(default_factory=dict)
    error: Optional[str] = None


class PRF(NamedTuple):
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]


@dataclass(frozen=True)
class MetricSummary:
    name: str
    q1: float
    median: float
    q3: float
    sd: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


@dataclass(frozen=True)
class DriverMisclass:
    driver_id: str
    n_test: int
    n_miss: int

    @property
    def pct(self) -> Optional[float]:
        if self.n_test == 0:
            return None
        return 100.0 * self.n_miss / self.n_test


def make_splits(n: int, labels: Sequence, count: int = 1000,
                train_frac: float = 0.8, seed: int = 0,
                max_retries: int = 1000) -> list[SplitPlan]:
    """Simple random splits (not stratified); draws whose training side
    lacks a class are rejected, logged, and redrawn."""
    if n < MIN_COHORT:
        raise SplitError(f"cohort of {n} is below the minimum of {MIN_COHORT}")
    y = np.asarray([(1 if lab in (1, "MCI_AD") else 0) for lab in labels],
                   dtype=np.int8)
    if len(y) != n:
        raise SplitError("labels length does not match n")
    if len(np.unique(y)) < 2:
        raise SplitError("both classes must be present to draw splits")
    n_train = int(round(train_frac * n))
    if not 1 <= n_train <= n - 1:
        raise SplitError(f"train_frac {train_frac} leaves an empty side")

    rng = np.random.default_rng(seed)
    plans: list[SplitPlan] = []
    rejected = 0
    for split_id in range(1, count + 1):
        for _ in range(max_retries):
            perm = rng.permutation(n)
            train_idx = np.sort(perm[:n_train])
            test_idx = np.sort(perm[n_train:])
            if len(np.unique(y[train_idx])) == 2:
                break
            rejected += 1
            logger.debug("split %d: training side lacked a class, redrawing",
                         split_id)
        else:
            raise SplitError(
                f"split {split_id}: no class-complete training set in "
                f"{max_retries} redraws")
        plans.append(SplitPlan(split_id, train_idx, test_idx, seed ^ split_id))
    if rejected:
        logger.info("rejected and redrew %d class-incomplete splits", rejected)
    return plans


def _run_one_split(X: np.ndarray, y: np.ndarray, plan: SplitPlan,
                   models: Sequence[str], grids: dict, cv_folds: int
                   ) -> SplitResult:
    result = SplitResult(plan.split_id)
    try:
        train = Dataset(X[plan.train_idx], y[plan.train_idx])
        y_test = y[plan.test_idx]
        for name in models:
            hp = cv_tune(train, grids[name], k=cv_folds,
                         seed=derive_seed(plan.seed, name, "tune"))
            model = fit_with_params(train, hp,
                                    seed=derive_seed(plan.seed, name, "fit"))
            pred = model.predict(X[plan.test_idx])
            tp = int(np.sum((pred == 1) & (y_test == 1)))
            fp = int(np.sum((pred == 1) & (y_test == 0)))
            fn = int(np.sum((pred == 0) & (y_test == 1)))
            tn = int(np.sum((pred == 0) & (y_test == 0)))
            mr = ModelResult(
                accuracy=(tp + tn) / len(y_test),
                tp=tp, fp=fp, fn=fn, tn=tn,
                predicted=pred.astype(np.int8),
                params=hp,
            )
            if name == "c50":
                mr.importance = c50_importance(model)
            result.models[name] = mr
    except LifeSpaceError as exc:
        result.error = f"split {plan.split_id}: {exc}"
        result.models = {}
    return result


def run_protocol(vectors: Sequence[LifeSpaceVector],
                 splits: Sequence[SplitPlan],
                 models: Sequence[str] = MODEL_NAMES,
                 grids: Optional[dict] = None,
                 cv_folds: int = 10,
                 jobs: int = 1) -> list[SplitResult]:
    """Tune, fit, and score every model on every split.

    Tuning and fitting see only the training side; results are merged in
    split order, and per-split derived seeds make serial and parallel runs
    agree bit for bit. Failed splits carry an error string instead of model
    results.
    """
    dataset, _ = Dataset.from_vectors(vectors)
    grids = dict(default_grids(dataset.p)) | (grids or {})
    unknown = set(models) - set(grids)
    if unknown:
        raise ValueError(f"no grid for model(s): {sorted(unknown)}")

    if jobs > 1 and len(splits) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(
                _run_one_split,
                [dataset.X] * len(splits), [dataset.y] * len(splits),
                splits, [tuple(models)] * len(splits),
                [grids] * len(splits), [cv_folds] * len(splits),
                chunksize=max(1, len(splits) // (jobs * 4)),
            ))
    else:
        results = [_run_one_split(dataset.X, dataset.y, plan, tuple(models),
                                  grids, cv_folds)
                   for plan in splits]

    failed = [r for r in results if r.error]
    for r in failed:
        logger.warning("excluded from summaries: %s", r.error)
    if failed:
        logger.warning("%d of %d splits failed", len(failed), len(results))
    return results


def prf(tp: int, fp: int, fn: int, tn: int) -> PRF:
    """Precision/recall/F1 with MCI_AD positive; zero denominators yield None."""
    del tn
    precision = tp / (tp + fp) if tp + fp > 0 else None
    recall = tp / (tp + fn) if tp + fn > 0 else None
    f1 = None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    return PRF(precision, recall, f1)


def summarize(values: Iterable[Optional[float]], name: str = "") -> MetricSummary:
    """Quartiles by linear interpolation of order statistics (type 7) and the
    n-1 standard deviation; None values (undefined metrics) are dropped."""
    vals = np.array([v for v in values if v is not None], dtype=np.float64)
    if len(vals) == 0:
        raise SummaryError(f"no defined values to summarize for {name!r}")
    q1, med, q3 = np.quantile(vals, [0.25, 0.5, 0.75], method="linear")
    sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
    return MetricSummary(name, float(q1), float(med), float(q3), sd)


def accuracy_summaries(results: Sequence[SplitResult],
                       models: Sequence[str] = MODEL_NAMES
                       ) -> dict[str, MetricSummary]:
    out = {}
    for name in models:
        accs = [r.models[name].accuracy for r in results if not r.error]
        out[name] = summarize(accs, f"{name} accuracy")
    return out


def select_best_model(summaries: dict[str, MetricSummary]) -> str:
    """Highest median accuracy; ties prefer the tighter interquartile range."""
    return min(summaries,
               key=lambda m: (-summaries[m].median, summaries[m].iqr, m))


def driver_misclass(results: Sequence[SplitResult],
                    splits: Sequence[SplitPlan],
                    driver_ids: Sequence[str],
                    labels: Sequence[int],
                    model: str = "c50") -> list[DriverMisclass]:
    """Per-driver test appearances and misclassification counts for one model."""
    plan_by_id = {p.split_id: p for p in splits}
    n_test = np.zeros(len(driver_ids), dtype=np.int64)
    n_miss = np.zeros(len(driver_ids), dtype=np.int64)
    y = np.asarray(labels, dtype=np.int8)
    for res in results:
        if res.error or model not in res.models:
            continue
        plan = plan_by_id[res.split_id]
        pred = res.models[model].predicted
        n_test[plan.test_idx] += 1
        n_miss[plan.test_idx] += pred != y[plan.test_idx]
    return [DriverMisclass(driver_ids[i], int(n_test[i]), int(n_miss[i]))
            for i in range(len(driver_ids))]


def aggregate_importance(results: Sequence[SplitResult],
                         feature_names: Sequence[str] = FEATURE_NAMES
                         ) -> list[tuple[str, float]]:
    """Mean per-feature importance across splits, sorted descending; ties
    keep the canonical feature order."""
    vectors = [r.models["c50"].importance for r in results
               if not r.error and "c50" in r.models
               and r.models["c50"].importance is not None]
    if not vectors:
        raise SummaryError("no importance vectors to aggregate")
    mean = np.mean(np.stack(vectors), axis=0)
    ranked = sorted(range(len(feature_names)), key=lambda i: (-mean[i], i))
    return [(feature_names[i], float(mean[i])) for i in ranked]
