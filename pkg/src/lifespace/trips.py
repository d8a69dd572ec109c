"""Trip-destination labeling and the twelve life-space variables.

A drive is labeled by matching the geohash of its end point against the
driver's surveyed locations. Single-category matches keep that category,
matches on two or more distinct categories are excluded, and everything
else is an unknown trip. Counts are split weekday/weekend by the local
end date and normalized to trips per 100 study days.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence
from zoneinfo import ZoneInfo

from .errors import ConfigError, LifeSpaceError
from .geo import GeoPoint, encode
from .ingest import DriveRecord, DriverProfile, DEFAULT_TIMEZONE

#: The ten surveyed location categories.
CATEGORIES = ("home", "work", "doctor", "groceries", "prescriptions",
              "gas", "social", "exercise", "religion", "other")

#: Categories a relabel override may assign; home/work/other stay fixed.
RELABEL_CATEGORIES = ("social", "groceries", "gas", "prescriptions",
                      "doctor", "exercise", "religion", "unknown")

#: Pseudo-category for trips ending away from every surveyed location.
UNKNOWN = "unknown"

#: Count keys: the nine fixed categories plus unknown ('other' trips that
#: survive relabeling fold into unknown before counting).
COUNT_KEYS = ("home", "work", "doctor", "groceries", "prescriptions",
              "gas", "social", "exercise", "religion", UNKNOWN)

#: Life-space feature names, weekday/weekend pairs, in output order.
FEATURE_NAMES = ("home_wkd", "home_wkn", "work_wkd", "work_wkn",
                 "errand_wkd", "errand_wkn", "medical_wkd", "medical_wkn",
                 "social_wkd", "social_wkn", "unknown_wkd", "unknown_wkn")

#: Aggregation from count keys to the six feature groups.
FEATURE_GROUPS: dict[str, tuple[str, ...]] = {
    "home": ("home",),
    "work": ("work",),
    "errand": ("groceries", "gas", "prescriptions"),
    "medical": ("doctor",),
    "social": ("social", "exercise", "religion"),
    "unknown": (UNKNOWN,),
}

DEFAULT_PRECISION = 7

SINGLE = "single"
UNKNOWN_TRIP = "unknown"
MULTI_LABEL_EXCLUDED = "multi_label_excluded"


@dataclass(frozen=True, slots=True)
class LocationBook:
    """Per-driver map from category to the geohash cells surveyed for it."""

    driver_id: str
    entries: Mapping[str, frozenset[str]]
    precision: int

    def match(self, code: str) -> frozenset[str]:
        return frozenset(cat for cat, cells in self.entries.items() if code in cells)


@dataclass(frozen=True, slots=True)
class TripLabel:
    """Outcome of matching one drive's end cell against the location book."""

    driver_id: str
    drive_id: str
    end_geohash: str
    matched: frozenset[str]
    disposition: str
    category: Optional[str] = None  # set iff disposition == single


@dataclass
class CategoryCounts:
    """Raw trip counts per (category, day type); day type 1 = weekday."""

    driver_id: str
    counts: dict[str, list[int]] = field(
        default_factory=lambda: {k: [0, 0] for k in COUNT_KEYS})

    def add(self, key: str, weekday: bool) -> None:
        self.counts[key][1 if weekday else 0] += 1

    def total(self) -> int:
        return sum(sum(pair) for pair in self.counts.values())


@dataclass(frozen=True, slots=True)
class LifeSpaceVector:
    """The twelve normalized features plus modeling metadata for one driver."""

    driver_id: str
    features: tuple[float, ...]  # ordered as FEATURE_NAMES, trips per 100 days
    ca_label: Optional[str]
    moca: Optional[int]
    cogstat: Optional[float]
    effective_days: int

    def feature(self, name: str) -> float:
        return self.features[FEATURE_NAMES.index(name)]

    def raw_total(self) -> int:
        """Total labeled trips recovered from the normalization identity."""
        return round(sum(self.features) * self.effective_days / 100.0)


def build_location_book(rows: Iterable[tuple[str, str, float, float]],
                        precision: int = DEFAULT_PRECISION) -> dict[str, LocationBook]:
    """Geohash survey rows (driver_id, category, lat, lon) into per-driver books.

    Duplicate cells within a category are deduplicated; an unknown category
    is a row error.
    """
    staged: dict[str, dict[str, set[str]]] = {}
    for driver_id, category, lat, lon in rows:
        if category not in CATEGORIES:
            raise LifeSpaceError(
                f"driver {driver_id}: unknown location category {category!r} "
                f"(expected one of {', '.join(CATEGORIES)})")
        code = encode(GeoPoint(lat, lon), precision).code
        staged.setdefault(driver_id, {}).setdefault(category, set()).add(code)
    return {
        driver: LocationBook(
            driver_id=driver,
            entries={cat: frozenset(cells) for cat, cells in cats.items()},
            precision=precision,
        )
        for driver, cats in staged.items()
    }


def label_trip(drive: DriveRecord, book: Optional[LocationBook],
               precision: int = DEFAULT_PRECISION) -> TripLabel:
    """Match one drive's end cell; multi-category matches are excluded."""
    if drive.end is None:
        raise LifeSpaceError(
            f"drive {drive.drive_id}: missing end point reached labeling "
            "(should have been filtered)")
    code = encode(drive.end, precision).code
    matched = book.match(code) if book is not None else frozenset()
    if len(matched) == 1:
        category = next(iter(matched))
        return TripLabel(drive.driver_id, drive.drive_id, code, matched, SINGLE, category)
    if len(matched) >= 2:
        return TripLabel(drive.driver_id, drive.drive_id, code, matched,
                         MULTI_LABEL_EXCLUDED)
    return TripLabel(drive.driver_id, drive.drive_id, code, matched, UNKNOWN_TRIP)


def apply_relabels(labels: Sequence[TripLabel],
                   overrides: Iterable[tuple[str, str, str]]) -> list[TripLabel]:
    """Reassign other/unknown trips whose end cell matches an override row.

    Overrides are (driver_id, geohash, new_category) with new_category in
    RELABEL_CATEGORIES. Trips already matched to a real category other than
    'other', and multi-label exclusions, never move.
    """
    table: dict[tuple[str, str], str] = {}
    for driver_id, code, new_category in overrides:
        if new_category not in RELABEL_CATEGORIES:
            raise ConfigError(
                f"relabel override for driver {driver_id} targets {new_category!r}; "
                f"allowed categories: {', '.join(RELABEL_CATEGORIES)}")
        table[(driver_id, code)] = new_category

    if not table:
        return list(labels)

    out: list[TripLabel] = []
    for label in labels:
        eligible = (label.disposition == UNKNOWN_TRIP
                    or (label.disposition == SINGLE and label.category == "other"))
        new_category = table.get((label.driver_id, label.end_geohash))
        if not eligible or new_category is None:
            out.append(label)
        elif new_category == UNKNOWN:
            out.append(TripLabel(label.driver_id, label.drive_id, label.end_geohash,
                                 frozenset(), UNKNOWN_TRIP))
        else:
            out.append(TripLabel(label.driver_id, label.drive_id, label.end_geohash,
                                 frozenset({new_category}), SINGLE, new_category))
    return out


def count_categories(labels: Iterable[TripLabel],
                     drives: Mapping[str, DriveRecord] | Sequence[DriveRecord],
                     timezone: str = DEFAULT_TIMEZONE) -> dict[str, CategoryCounts]:
    """Tally trips per (category, weekday/weekend) using local end dates.

    Multi-label exclusions contribute nothing; trips still labeled 'other'
    (no override applied) fold into the unknown pseudo-category.
    """
    if not isinstance(drives, Mapping):
        drives = {d.drive_id: d for d in drives}
    tz = ZoneInfo(timezone)
    out: dict[str, CategoryCounts] = {}
    for label in labels:
        counts = out.setdefault(label.driver_id, CategoryCounts(label.driver_id))
        if label.disposition == MULTI_LABEL_EXCLUDED:
            continue
        drive = drives[label.drive_id]
        weekday = drive.end_time.astimezone(tz).weekday() < 5
        if label.disposition == SINGLE and label.category != "other":
            counts.add(label.category, weekday)
        else:
            counts.add(UNKNOWN, weekday)
    return out


def compute_life_space(counts: CategoryCounts, effective_days: int,
                       profile: Optional[DriverProfile] = None) -> LifeSpaceVector:
    """Normalize raw counts to the twelve per-100-day features."""
    if effective_days < 1:
        raise LifeSpaceError(
            f"driver {counts.driver_id}: effective_days must be >= 1")
    features: list[float] = []
    for group in ("home", "work", "errand", "medical", "social", "unknown"):
        for daytype in (1, 0):  # weekday column first
            raw = sum(counts.counts[key][daytype] for key in FEATURE_GROUPS[group])
            features.append(100.0 * raw / effective_days)
    return LifeSpaceVector(
        driver_id=counts.driver_id,
        features=tuple(features),
        ca_label=profile.ca_label if profile else None,
        moca=profile.moca if profile else None,
        cogstat=profile.cogstat if profile else None,
        effective_days=effective_days,
    )


#: Exclusion reasons emitted by exclude_low_activity.
LOW_ACTIVITY = "low_activity"
MISSING_SCORES = "missing_scores"
MISSING_LABEL = "missing_label"

#: Minimum total labeled trips for a driver to enter modeling.
MIN_TOTAL_TRIPS = 2


def exclude_low_activity(
        vectors: Iterable[LifeSpaceVector],
) -> tuple[list[LifeSpaceVector], list[tuple[str, str]]]:
    """Drop drivers with under two labeled trips or missing label/scores."""
    kept: list[LifeSpaceVector] = []
    excluded: list[tuple[str, str]] = []
    for vec in vectors:
        if vec.ca_label is None:
            excluded.append((vec.driver_id, MISSING_LABEL))
        elif vec.moca is None or vec.cogstat is None:
            excluded.append((vec.driver_id, MISSING_SCORES))
        elif vec.raw_total() < MIN_TOTAL_TRIPS:
            excluded.append((vec.driver_id, LOW_ACTIVITY))
        else:
            kept.append(vec)
    return kept, excluded
