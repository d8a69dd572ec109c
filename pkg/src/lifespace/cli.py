"""Command-line orchestration.

Subcommands: preprocess, features, evaluate, report, synth. Configuration
comes from an optional JSON file; any flag given on the command line wins.
Exit codes: 0 success, 2 input/schema error, 3 data-constraint error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import io as featio
from .errors import (ConfigError, FoldError, InvalidGeohashError,
                     InvalidPointError, InvalidPrecisionError, LifeSpaceError,
                     SchemaError, SplitError, SummaryError, TrainingError,
                     UndefinedExposureError)
from .geo import BoundingBox
from .ingest import (DEFAULT_TIMEZONE, DriveRecord, PreprocessConfig,
                     effective_days, parse_cohort, parse_drives, preprocess)
from .learn import C50Params, RFParams, SVMParams, default_grids
from .report import class_summary, radial_svg, write_class_summary
from .resample import (MODEL_NAMES, accuracy_summaries, aggregate_importance,
                       driver_misclass, make_splits, prf, run_protocol,
                       select_best_model, summarize)
from .synthcohort import CohortSpec, generate
from .trips import (CategoryCounts, apply_relabels, build_location_book,
                    compute_life_space, count_categories, exclude_low_activity,
                    label_trip, DEFAULT_PRECISION)

logger = logging.getLogger(__name__)

_INPUT_ERRORS = (SchemaError, ConfigError, InvalidPointError,
                 InvalidPrecisionError, InvalidGeohashError, OSError)
_DATA_ERRORS = (SplitError, TrainingError, FoldError, SummaryError,
                UndefinedExposureError)


@dataclasses.dataclass
class PipelineConfig:
    drives: Optional[str] = None
    cohort: Optional[str] = None
    locations: Optional[str] = None
    relabels: Optional[str] = None
    features: Optional[str] = None
    out_dir: str = "out"
    precision: int = DEFAULT_PRECISION
    timezone: str = DEFAULT_TIMEZONE
    state_box: tuple[float, float, float, float] = (40.0, 43.0, -104.06, -95.31)
    min_trip_miles: float = 0.2
    splits: int = 1000
    train_frac: float = 0.8
    seed: int = 0
    jobs: int = 1
    models: tuple[str, ...] = MODEL_NAMES
    grids: Optional[dict] = None

    def __post_init__(self):
        if not 1 <= self.precision <= 12:
            raise ConfigError(f"precision {self.precision} outside [1, 12]")
        if not 0.0 < self.train_frac < 1.0:
            raise ConfigError(f"train_frac {self.train_frac} outside (0, 1)")

    def preprocess_config(self) -> PreprocessConfig:
        lat_lo, lat_hi, lon_lo, lon_hi = self.state_box
        return PreprocessConfig(
            min_trip_miles=self.min_trip_miles,
            state_box=BoundingBox(lat_lo, lat_hi, lon_lo, lon_hi),
            timezone=self.timezone)

    def model_grids(self) -> dict:
        grids = default_grids()
        if self.grids:
            grids |= _parse_grid_config(self.grids)
        return grids


def _parse_grid_config(raw: dict) -> dict:
    out = {}
    if "c50" in raw:
        out["c50"] = [C50Params(trials=t) for t in raw["c50"]["trials"]]
    if "rf" in raw:
        n_trees = raw["rf"].get("n_trees", 500)
        out["rf"] = [RFParams(n_trees=n_trees, mtry=m) for m in raw["rf"]["mtry"]]
    if "svm" in raw:
        svm = raw["svm"]
        grid = []
        for kernel in svm.get("kernels", ["linear", "rbf"]):
            for c in svm.get("c", [0.1, 1.0, 10.0, 100.0]):
                if kernel == "linear":
                    grid.append(SVMParams("linear", c))
                else:
                    for g in svm.get("gamma", [1 / 48, 1 / 12, 1 / 3]):
                        grid.append(SVMParams("rbf", c, g))
        out["svm"] = grid
    return out


def load_config(args: argparse.Namespace) -> PipelineConfig:
    """Config file first, then flags on top (flags win)."""
    values: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {args.config}: {exc}") from exc
        unknown = set(raw) - {f.name for f in dataclasses.fields(PipelineConfig)}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(raw)
    for f in dataclasses.fields(PipelineConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    if "models" in values and not isinstance(values["models"], tuple):
        models = values["models"]
        if isinstance(models, str):
            models = models.split(",")
        values["models"] = tuple(m.strip() for m in models)
    if "state_box" in values:
        values["state_box"] = tuple(float(v) for v in values["state_box"])
    return PipelineConfig(**values)


def _require(cfg: PipelineConfig, *names: str) -> None:
    for name in names:
        path = getattr(cfg, name)
        if path is None:
            raise SchemaError(f"missing required input --{name.replace('_', '-')}")
        if not Path(path).exists():
            raise SchemaError(f"input file not found: {path}")


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_drives_csv(records: Sequence[DriveRecord], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(["driver_id", "drive_id", "start_time", "end_time",
                           "start_lat", "start_lon", "end_lat", "end_lon",
                           "self_driven", "maintenance"]) + "\n")
        for r in records:
            start = ("", "") if r.start is None else (f"{r.start.lat:.6f}",
                                                      f"{r.start.lon:.6f}")
            end = ("", "") if r.end is None else (f"{r.end.lat:.6f}",
                                                  f"{r.end.lon:.6f}")
            fh.write(",".join([r.driver_id, r.drive_id,
                               r.start_time.isoformat(), r.end_time.isoformat(),
                               *start, *end,
                               "1" if r.self_driven else "0",
                               "1" if r.maintenance else "0"]) + "\n")


def cmd_preprocess(cfg: PipelineConfig) -> int:
    _require(cfg, "drives")
    with open(cfg.drives, newline="") as fh:
        records, issues = parse_drives(fh)
    for issue in issues:
        logger.warning("drives.csv line %d: %s", issue.line, issue.message)
    kept, report = preprocess(records, cfg.preprocess_config())
    out = _out_dir(cfg)
    _write_drives_csv(kept, out / "clean_drives.csv")
    (out / "removals.json").write_text(report.to_json() + "\n")
    print(f"kept {report.kept} of {report.total} drives "
          f"({len(issues)} unparseable rows)")
    return 0


def build_feature_vectors(cfg: PipelineConfig):
    """Full feature pipeline: parse, filter, label, relabel, count, normalize,
    exclude. Returns (kept vectors, exclusions, orphans, removal report)."""
    _require(cfg, "drives", "cohort", "locations")
    with open(cfg.drives, newline="") as fh:
        records, drive_issues = parse_drives(fh)
    with open(cfg.cohort, newline="") as fh:
        profiles, cohort_issues = parse_cohort(fh)
    with open(cfg.locations, newline="") as fh:
        location_rows, loc_issues = featio.parse_locations(fh)
    relabel_rows: list[tuple[str, str, str]] = []
    if cfg.relabels:
        with open(cfg.relabels, newline="") as fh:
            relabel_rows, relabel_issues = featio.parse_relabels(fh)
        featio.validate_relabel_categories(relabel_rows)
        for issue in relabel_issues:
            logger.warning("relabels.csv line %d: %s", issue.line, issue.message)
    for name, issues in (("drives", drive_issues), ("cohort", cohort_issues),
                         ("locations", loc_issues)):
        for issue in issues:
            logger.warning("%s.csv line %d: %s", name, issue.line, issue.message)

    kept_drives, removal_report = preprocess(records, cfg.preprocess_config())
    books = build_location_book(location_rows, cfg.precision)
    profile_by_id = {p.driver_id: p for p in profiles}

    drives_by_driver: dict[str, list[DriveRecord]] = {}
    for d in kept_drives:
        drives_by_driver.setdefault(d.driver_id, []).append(d)
    orphans = sorted(set(drives_by_driver) - set(profile_by_id))

    labeled_drives = [d for p in profiles
                      for d in drives_by_driver.get(p.driver_id, [])]
    labels = [label_trip(d, books.get(d.driver_id), cfg.precision)
              for d in labeled_drives]
    labels = apply_relabels(labels, relabel_rows)
    counts_by_driver = count_categories(labels, labeled_drives, cfg.timezone)

    vectors = []
    exclusions: list[tuple[str, str]] = []
    for profile in profiles:
        driver_drives = drives_by_driver.get(profile.driver_id, [])
        try:
            days = effective_days(driver_drives, profile, cfg.timezone)
        except UndefinedExposureError:
            exclusions.append((profile.driver_id, "no_exposure"))
            continue
        counts = counts_by_driver.get(profile.driver_id,
                                      CategoryCounts(profile.driver_id))
        vectors.append(compute_life_space(counts, days, profile))
    kept_vectors, low = exclude_low_activity(vectors)
    exclusions.extend(low)
    return kept_vectors, exclusions, orphans, removal_report


def cmd_features(cfg: PipelineConfig) -> int:
    kept, exclusions, orphans, _ = build_feature_vectors(cfg)
    out = _out_dir(cfg)
    with open(out / "features.csv", "w", newline="") as fh:
        featio.write_features(kept, fh)
    log = {"excluded": [{"driver_id": d, "reason": r} for d, r in exclusions],
           "orphans": orphans}
    (out / "exclusions.json").write_text(
        json.dumps(log, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(kept)} feature rows "
          f"({len(exclusions)} excluded, {len(orphans)} orphan drivers)")
    return 0


def cmd_evaluate(cfg: PipelineConfig) -> int:
    _require(cfg, "features")
    with open(cfg.features, newline="") as fh:
        vectors, issues = featio.read_features(fh)
    for issue in issues:
        logger.warning("features.csv line %d: %s", issue.line, issue.message)
    vectors, _ = exclude_low_activity(vectors)
    unknown_models = set(cfg.models) - set(MODEL_NAMES)
    if unknown_models:
        raise ConfigError(f"unknown model(s): {sorted(unknown_models)}; "
                          f"choose from {', '.join(MODEL_NAMES)}")
    labels = [v.ca_label for v in vectors]
    if len(set(labels)) < 2:
        raise SplitError("cohort contains a single class; cannot evaluate")

    splits = make_splits(len(vectors), labels, count=cfg.splits,
                         train_frac=cfg.train_frac, seed=cfg.seed)
    results = run_protocol(vectors, splits, models=cfg.models,
                           grids=cfg.model_grids(), jobs=cfg.jobs)
    ok = [r for r in results if not r.error]
    if not ok:
        raise TrainingError("every split failed; nothing to summarize")

    out = _out_dir(cfg)
    with open(out / "metrics.csv", "w", newline="") as fh:
        fh.write("split_id,model,accuracy,tp,fp,fn,tn\n")
        for r in ok:
            for name in cfg.models:
                m = r.models[name]
                fh.write(f"{r.split_id},{name},{m.accuracy:.6f},"
                         f"{m.tp},{m.fp},{m.fn},{m.tn}\n")

    summaries = accuracy_summaries(ok, cfg.models)
    best = select_best_model(summaries)
    prfs = [prf(m.tp, m.fp, m.fn, m.tn)
            for m in (r.models[best] for r in ok)]
    undefined = {field: sum(1 for p in prfs if getattr(p, field) is None)
                 for field in ("precision", "recall", "f1")}
    y_int = [1 if v.ca_label == "MCI_AD" else 0 for v in vectors]
    misclass = driver_misclass(results, splits, [v.driver_id for v in vectors],
                               y_int, model=best)

    def _summary_dict(s):
        return {"q1": s.q1, "median": s.median, "q3": s.q3, "sd": s.sd}

    payload = {
        "n_drivers": len(vectors),
        "n_splits": len(splits),
        "failed_splits": len(results) - len(ok),
        "models": {name: {"accuracy": _summary_dict(s)}
                   for name, s in summaries.items()},
        "best_model": {
            "name": best,
            "precision": _summary_dict(summarize(
                [p.precision for p in prfs], "precision")),
            "recall": _summary_dict(summarize([p.recall for p in prfs], "recall")),
            "f1": _summary_dict(summarize([p.f1 for p in prfs], "f1")),
            "undefined_counts": undefined,
            "misclassification": [
                {"driver_id": m.driver_id, "n_test": m.n_test,
                 "n_miss": m.n_miss, "pct": m.pct} for m in misclass],
        },
    }
    if "c50" in cfg.models:
        payload["best_model"]["importance"] = [
            {"feature": name, "mean_importance": value}
            for name, value in aggregate_importance(ok)]
    (out / "summary.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n")

    with open(out / "scatter.csv", "w", newline="") as fh:
        fh.write("driver_id,moca,cogstat,misclass_pct,ca_label\n")
        by_id = {m.driver_id: m for m in misclass}
        for v in vectors:
            m = by_id[v.driver_id]
            pct = "" if m.pct is None else f"{m.pct:.6f}"
            fh.write(f"{v.driver_id},{v.moca},{v.cogstat:.6f},{pct},{v.ca_label}\n")

    print(f"evaluated {len(ok)} splits; best model: {best} "
          f"(median accuracy {summaries[best].median:.3f})")
    return 0


def cmd_report(cfg: PipelineConfig) -> int:
    _require(cfg, "features")
    with open(cfg.features, newline="") as fh:
        vectors, issues = featio.read_features(fh)
    for issue in issues:
        logger.warning("features.csv line %d: %s", issue.line, issue.message)
    if not vectors:
        raise SchemaError("features.csv holds no feature rows")
    out = _out_dir(cfg)
    rows = class_summary(vectors)
    with open(out / "class_summary.csv", "w", newline="") as fh:
        write_class_summary(rows, fh)
    (out / "radial.svg").write_text(radial_svg(vectors))
    print(f"wrote class summary ({len(rows)} rows) and radial plot")
    return 0


def cmd_synth(cfg: PipelineConfig, args: argparse.Namespace) -> int:
    spec = CohortSpec(
        n_mci=args.n_mci, n_cu=args.n_cu, days=args.days,
        effect_scale=args.effect_scale, seed=cfg.seed,
        precision=cfg.precision, timezone=cfg.timezone,
        force_collision=args.force_collision)
    files = generate(spec)
    out = _out_dir(cfg)
    (out / "drives.csv").write_bytes(files.drives)
    (out / "locations.csv").write_bytes(files.locations)
    (out / "cohort.csv").write_bytes(files.cohort)
    print(f"generated cohort of {spec.n_mci}+{spec.n_cu} drivers over "
          f"{spec.days} days (effect scale {spec.effect_scale})")
    return 0


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out-dir", dest="out_dir", default=None)
    parser.add_argument("--precision", type=int, default=None)
    parser.add_argument("--timezone", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lifespace",
        description="Life-space trip features and cognitive-ability screening")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="filter a drive log")
    p.add_argument("--drives", default=None)
    _add_shared(p)

    p = sub.add_parser("features", help="compute life-space features")
    for flag in ("--drives", "--cohort", "--locations", "--relabels"):
        p.add_argument(flag, default=None)
    _add_shared(p)

    p = sub.add_parser("evaluate", help="run the resampled model protocol")
    p.add_argument("--features", default=None)
    p.add_argument("--splits", type=int, default=None)
    p.add_argument("--train-frac", dest="train_frac", type=float, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--models", default=None,
                   help="comma-separated subset of svm,rf,c50")
    _add_shared(p)

    p = sub.add_parser("report", help="class summary table and radial plot")
    p.add_argument("--features", default=None)
    _add_shared(p)

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    p.add_argument("--n-mci", type=int, default=60)
    p.add_argument("--n-cu", type=int, default=90)
    p.add_argument("--days", type=int, default=90)
    p.add_argument("--effect-scale", type=float, default=1.0)
    p.add_argument("--force-collision", action="store_true")
    _add_shared(p)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "preprocess":
            return cmd_preprocess(cfg)
        if args.command == "features":
            return cmd_features(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg)
        if args.command == "report":
            return cmd_report(cfg)
        if args.command == "synth":
            return cmd_synth(cfg, args)
        raise ConfigError(f"unknown command {args.command!r}")
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except LifeSpaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
