"""Drive-log and cohort ingestion plus the four preprocessing filters.

drives.csv schema (exact column order):
    driver_id, drive_id, start_time, end_time, start_lat, start_lon,
    end_lat, end_lon, self_driven, maintenance
Timestamps are ISO-8601 with a UTC offset, booleans are 0/1, and missing
coordinates are empty fields.

cohort.csv schema:
    driver_id, ca_label, moca, cogstat, days_in_study
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, date
from typing import IO, Iterable, Optional
from zoneinfo import ZoneInfo

from .errors import InvalidPointError, SchemaError, UndefinedExposureError
from .geo import BoundingBox, GeoPoint, haversine_miles

DRIVES_COLUMNS = ["driver_id", "drive_id", "start_time", "end_time",
                  "start_lat", "start_lon", "end_lat", "end_lon",
                  "self_driven", "maintenance"]
COHORT_COLUMNS = ["driver_id", "ca_label", "moca", "cogstat", "days_in_study"]

CA_LABELS = ("MCI_AD", "CU")

#: Nebraska's bounding box; the paper gives only "the state's bounding box".
NEBRASKA_BOX = BoundingBox(min_lat=40.0, max_lat=43.0, min_lon=-104.06, max_lon=-95.31)

DEFAULT_TIMEZONE = "America/Chicago"

REMOVAL_RULES = ("incomplete", "not_self_or_maintenance", "short_drive", "out_of_state")


@dataclass(frozen=True, slots=True)
class DriveRecord:
    """One ignition-on to ignition-off drive."""

    driver_id: str
    drive_id: str
    start_time: datetime
    end_time: datetime
    start: Optional[GeoPoint]
    end: Optional[GeoPoint]
    self_driven: bool
    maintenance: bool

    @property
    def incomplete(self) -> bool:
        return self.start is None or self.end is None


@dataclass(frozen=True, slots=True)
class DriverProfile:
    """Cohort metadata for one driver; optional fields parse to None."""

    driver_id: str
    ca_label: Optional[str]
    moca: Optional[int]
    cogstat: Optional[float]
    days_in_study: Optional[int]


@dataclass(frozen=True, slots=True)
class ParseIssue:
    """A malformed row, reported instead of silently dropped."""

    line: int
    message: str


@dataclass
class PreprocessConfig:
    min_trip_miles: float = 0.2
    state_box: BoundingBox = NEBRASKA_BOX
    timezone: str = DEFAULT_TIMEZONE


@dataclass
class RemovalReport:
    """Per-rule removal counts; the first violated rule claims each drive."""

    counts: dict[str, int] = field(default_factory=lambda: {r: 0 for r in REMOVAL_RULES})
    kept: int = 0
    total: int = 0
    per_driver: dict[str, dict[str, int]] = field(default_factory=dict)

    def _driver(self, driver_id: str) -> dict[str, int]:
        if driver_id not in self.per_driver:
            self.per_driver[driver_id] = {r: 0 for r in REMOVAL_RULES} | {"kept": 0}
        return self.per_driver[driver_id]

    def record(self, driver_id: str, rule: Optional[str]) -> None:
        self.total += 1
        if rule is None:
            self.kept += 1
            self._driver(driver_id)["kept"] += 1
        else:
            self.counts[rule] += 1
            self._driver(driver_id)[rule] += 1

    def to_json(self) -> str:
        payload = {"total": self.total, "kept": self.kept,
                   "counts": self.counts, "per_driver": self.per_driver}
        return json.dumps(payload, indent=2, sort_keys=True)


def _as_text_stream(source: IO) -> IO:
    if not hasattr(source, "read"):
        raise SchemaError(f"{source!r} is not a readable stream")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def _parse_timestamp(raw: str) -> datetime:
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {raw!r} has no UTC offset")
    return ts


def _parse_point(lat_raw: str, lon_raw: str) -> Optional[GeoPoint]:
    """Empty field(s) mean a missing point; bad values raise."""
    if lat_raw.strip() == "" or lon_raw.strip() == "":
        return None
    return GeoPoint(float(lat_raw), float(lon_raw))


def _parse_bool(raw: str, column: str) -> bool:
    if raw.strip() == "1":
        return True
    if raw.strip() == "0":
        return False
    raise ValueError(f"{column} must be 0 or 1, got {raw!r}")


def _check_header(header: list[str] | None, expected: list[str], what: str) -> None:
    if header is None:
        raise SchemaError(f"{what}: missing header row")
    if [h.strip() for h in header] != expected:
        raise SchemaError(
            f"{what}: header {header!r} does not match expected columns {expected}")


def parse_drives(source: IO) -> tuple[list[DriveRecord], list[ParseIssue]]:
    """Parse drives.csv; malformed rows become ParseIssues, never silent drops."""
    stream = _as_text_stream(source)
    reader = csv.reader(stream)
    header = next(reader, None)
    _check_header(header, DRIVES_COLUMNS, "drives.csv")

    records: list[DriveRecord] = []
    issues: list[ParseIssue] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(cell.strip() == "" for cell in row):
            continue
        try:
            if len(row) != len(DRIVES_COLUMNS):
                raise ValueError(f"expected {len(DRIVES_COLUMNS)} fields, got {len(row)}")
            start_time = _parse_timestamp(row[2])
            end_time = _parse_timestamp(row[3])
            if end_time < start_time:
                raise ValueError("end_time precedes start_time")
            record = DriveRecord(
                driver_id=row[0].strip(),
                drive_id=row[1].strip(),
                start_time=start_time,
                end_time=end_time,
                start=_parse_point(row[4], row[5]),
                end=_parse_point(row[6], row[7]),
                self_driven=_parse_bool(row[8], "self_driven"),
                maintenance=_parse_bool(row[9], "maintenance"),
            )
        except (ValueError, InvalidPointError) as exc:
            issues.append(ParseIssue(line_no, str(exc)))
            continue
        records.append(record)
    return records, issues


def parse_cohort(source: IO) -> tuple[list[DriverProfile], list[ParseIssue]]:
    """Parse cohort.csv; empty optional fields parse to None, not zero."""
    stream = _as_text_stream(source)
    reader = csv.reader(stream)
    header = next(reader, None)
    _check_header(header, COHORT_COLUMNS, "cohort.csv")

    profiles: list[DriverProfile] = []
    issues: list[ParseIssue] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(cell.strip() == "" for cell in row):
            continue
        try:
            if len(row) != len(COHORT_COLUMNS):
                raise ValueError(f"expected {len(COHORT_COLUMNS)} fields, got {len(row)}")
            label = row[1].strip() or None
            if label is not None and label not in CA_LABELS:
                raise ValueError(f"ca_label must be one of {CA_LABELS}, got {label!r}")
            moca = None
            if row[2].strip():
                moca = int(row[2])
                if not 0 <= moca <= 30:
                    raise ValueError(f"moca {moca} outside [0, 30]")
            cogstat = float(row[3]) if row[3].strip() else None
            days = None
            if row[4].strip():
                days = int(row[4])
                if days < 1:
                    raise ValueError(f"days_in_study {days} must be >= 1")
            profiles.append(DriverProfile(row[0].strip(), label, moca, cogstat, days))
        except ValueError as exc:
            issues.append(ParseIssue(line_no, str(exc)))
    return profiles, issues


def _removal_rule(drive: DriveRecord, cfg: PreprocessConfig) -> Optional[str]:
    """First violated rule in the fixed order, or None when the drive is kept."""
    if drive.incomplete:
        return "incomplete"
    if not drive.self_driven or drive.maintenance:
        return "not_self_or_maintenance"
    if haversine_miles(drive.start, drive.end) < cfg.min_trip_miles:
        return "short_drive"
    if not cfg.state_box.contains(drive.end):
        return "out_of_state"
    return None


def preprocess(drives: Iterable[DriveRecord],
               cfg: PreprocessConfig | None = None) -> tuple[list[DriveRecord], RemovalReport]:
    """Apply the four filters in order; attribution is first-match."""
    cfg = cfg or PreprocessConfig()
    kept: list[DriveRecord] = []
    report = RemovalReport()
    for drive in drives:
        rule = _removal_rule(drive, cfg)
        report.record(drive.driver_id, rule)
        if rule is None:
            kept.append(drive)
    return kept, report


def effective_days(drives: Iterable[DriveRecord],
                   profile: DriverProfile | None = None,
                   timezone: str = DEFAULT_TIMEZONE) -> int:
    """Study exposure in days: declared days_in_study, else the inclusive
    local-date span between the driver's first and last kept drive."""
    if profile is not None and profile.days_in_study is not None:
        return profile.days_in_study
    tz = ZoneInfo(timezone)
    dates: list[date] = [d.end_time.astimezone(tz).date() for d in drives]
    if not dates:
        driver = profile.driver_id if profile else "<unknown>"
        raise UndefinedExposureError(
            f"driver {driver}: no kept drives and no days_in_study")
    return (max(dates) - min(dates)).days + 1
