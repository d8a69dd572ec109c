"""CSV readers/writers for the pipeline's file interfaces:
locations.csv, relabels.csv, and features.csv."""

from __future__ import annotations

import csv
from typing import IO, Optional

from .errors import SchemaError
from .ingest import ParseIssue, _as_text_stream, _check_header
from .trips import FEATURE_NAMES, RELABEL_CATEGORIES, LifeSpaceVector

LOCATIONS_COLUMNS = ["driver_id", "category", "lat", "lon"]
RELABELS_COLUMNS = ["driver_id", "geohash", "new_category"]
FEATURES_COLUMNS = (["driver_id"] + list(FEATURE_NAMES)
                    + ["ca_label", "moca", "cogstat", "effective_days"])


def parse_locations(source: IO) -> tuple[list[tuple[str, str, float, float]],
                                         list[ParseIssue]]:
    stream = _as_text_stream(source)
    reader = csv.reader(stream)
    _check_header(next(reader, None), LOCATIONS_COLUMNS, "locations.csv")
    rows: list[tuple[str, str, float, float]] = []
    issues: list[ParseIssue] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(c.strip() == "" for c in row):
            continue
        try:
            if len(row) != 4:
                raise ValueError(f"expected 4 fields, got {len(row)}")
            rows.append((row[0].strip(), row[1].strip(),
                         float(row[2]), float(row[3])))
        except ValueError as exc:
            issues.append(ParseIssue(line_no, str(exc)))
    return rows, issues


def parse_relabels(source: IO) -> tuple[list[tuple[str, str, str]],
                                        list[ParseIssue]]:
    stream = _as_text_stream(source)
    reader = csv.reader(stream)
    _check_header(next(reader, None), RELABELS_COLUMNS, "relabels.csv")
    rows: list[tuple[str, str, str]] = []
    issues: list[ParseIssue] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(c.strip() == "" for c in row):
            continue
        if len(row) != 3:
            issues.append(ParseIssue(line_no, f"expected 3 fields, got {len(row)}"))
            continue
        rows.append((row[0].strip(), row[1].strip(), row[2].strip()))
    return rows, issues


def write_features(vectors: list[LifeSpaceVector], stream: IO) -> None:
    """features.csv with floats at 6 decimal places."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(FEATURES_COLUMNS)
    for v in vectors:
        writer.writerow(
            [v.driver_id]
            + [f"{x:.6f}" for x in v.features]
            + [v.ca_label or "",
               "" if v.moca is None else str(v.moca),
               "" if v.cogstat is None else f"{v.cogstat:.6f}",
               str(v.effective_days)])


def read_features(source: IO) -> tuple[list[LifeSpaceVector], list[ParseIssue]]:
    stream = _as_text_stream(source)
    reader = csv.reader(stream)
    _check_header(next(reader, None), FEATURES_COLUMNS, "features.csv")
    vectors: list[LifeSpaceVector] = []
    issues: list[ParseIssue] = []
    n_feat = len(FEATURE_NAMES)
    for line_no, row in enumerate(reader, start=2):
        if not row or all(c.strip() == "" for c in row):
            continue
        try:
            if len(row) != len(FEATURES_COLUMNS):
                raise ValueError(
                    f"expected {len(FEATURES_COLUMNS)} fields, got {len(row)}")
            features = tuple(float(x) for x in row[1:1 + n_feat])
            ca_label: Optional[str] = row[1 + n_feat].strip() or None
            moca = int(row[2 + n_feat]) if row[2 + n_feat].strip() else None
            cogstat = float(row[3 + n_feat]) if row[3 + n_feat].strip() else None
            vectors.append(LifeSpaceVector(
                driver_id=row[0].strip(), features=features, ca_label=ca_label,
                moca=moca, cogstat=cogstat,
                effective_days=int(row[4 + n_feat])))
        except ValueError as exc:
            issues.append(ParseIssue(line_no, str(exc)))
    return vectors, issues


def validate_relabel_categories(rows: list[tuple[str, str, str]]) -> None:
    """Schema-level check so bad override files fail before labeling."""
    for driver_id, _, category in rows:
        if category not in RELABEL_CATEGORIES:
            raise SchemaError(
                f"relabels.csv: driver {driver_id} override to {category!r}; "
                f"allowed: {', '.join(RELABEL_CATEGORIES)}")
