"""Seeded synthetic cohort generator.

Emits drives.csv / locations.csv / cohort.csv byte streams that are
schema-exact for the ingest module. Per-category trip counts follow a
Poisson process whose per-100-day rates default to the published class
means; effect_scale stretches (or nulls) the class differences around the
cognitively-unimpaired rates.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field, replace
from datetime import date, datetime, time, timedelta
from typing import NamedTuple
from zoneinfo import ZoneInfo

from .geo import GeoPoint, decode_bbox, encode
from .ingest import DEFAULT_TIMEZONE
from .trips import FEATURE_NAMES

import numpy as np

#: Per-100-day trip rates by class and life-space variable (published means).
TABLE_RATES: dict[str, dict[str, float]] = {
    "MCI_AD": {
        "home_wkd": 80.61, "home_wkn": 24.96,
        "work_wkd": 2.29, "work_wkn": 0.59,
        "errand_wkd": 79.61, "errand_wkn": 20.44,
        "medical_wkd": 12.26, "medical_wkn": 2.07,
        "social_wkd": 52.30, "social_wkn": 15.82,
        "unknown_wkd": 27.58, "unknown_wkn": 8.69,
    },
    "CU": {
        "home_wkd": 74.86, "home_wkn": 22.18,
        "work_wkd": 2.13, "work_wkn": 0.58,
        "errand_wkd": 81.02, "errand_wkn": 20.89,
        "medical_wkd": 9.05, "medical_wkn": 0.75,
        "social_wkd": 54.22, "social_wkn": 17.48,
        "unknown_wkd": 28.52, "unknown_wkn": 9.71,
    },
}

#: Surveyed categories the generator places (by feature group).
GROUP_MEMBERS: dict[str, tuple[str, ...]] = {
    "home": ("home",),
    "work": ("work",),
    "errand": ("groceries", "gas", "prescriptions"),
    "medical": ("doctor",),
    "social": ("social", "exercise", "religion"),
}

_PLACED_CATEGORIES = ("home", "work", "doctor", "groceries", "prescriptions",
                      "gas", "social", "exercise", "religion")

#: Driver home areas are drawn from this box, comfortably inside Nebraska.
_AREA = dict(lat_lo=40.5, lat_hi=42.5, lon_lo=-102.5, lon_hi=-96.5)


class SynthFiles(NamedTuple):
    drives: bytes
    locations: bytes
    cohort: bytes


@dataclass
class CohortSpec:
    n_mci: int = 60
    n_cu: int = 90
    days: int = 90
    rates: dict[str, dict[str, float]] = field(
        default_factory=lambda: {cls: dict(r) for cls, r in TABLE_RATES.items()})
    effect_scale: float = 1.0
    seed: int = 0
    precision: int = 7
    timezone: str = DEFAULT_TIMEZONE
    start_date: date = date(2021, 3, 1)
    #: Place the social location in the work cell to force multi-label trips.
    force_collision: bool = False

    def __post_init__(self):
        if self.n_mci < 1 or self.n_cu < 1:
            raise ValueError("class counts must be >= 1")
        if self.days < 1:
            raise ValueError("days must be >= 1")
        if self.effect_scale < 0:
            raise ValueError("effect_scale must be >= 0")
        for cls in ("MCI_AD", "CU"):
            for name in FEATURE_NAMES:
                if self.rates[cls][name] < 0:
                    raise ValueError(f"rate {cls}/{name} must be >= 0")

    def effective_rates(self, cls: str) -> dict[str, float]:
        """CU rates plus effect_scale times the class difference (floor 0)."""
        cu = self.rates["CU"]
        if cls == "CU":
            return dict(cu)
        mci = self.rates["MCI_AD"]
        return {name: max(0.0, cu[name] + self.effect_scale * (mci[name] - cu[name]))
                for name in FEATURE_NAMES}


def null_spec(spec: CohortSpec) -> CohortSpec:
    """The same cohort with all class differences removed."""
    return replace(spec, effect_scale=0.0)


def _point_in_cell(code: str, rng: np.random.Generator) -> GeoPoint:
    """A point strictly inside a geohash cell (10% margins)."""
    box = decode_bbox(code)
    dlat = box.max_lat - box.min_lat
    dlon = box.max_lon - box.min_lon
    return GeoPoint(box.min_lat + dlat * (0.1 + 0.8 * rng.random()),
                    box.min_lon + dlon * (0.1 + 0.8 * rng.random()))


def _place_locations(spec: CohortSpec, rng: np.random.Generator
                     ) -> tuple[dict[str, GeoPoint], set[str]]:
    """Give each surveyed category its own precision-N cell near a random
    home area (unless a work/social collision is forced)."""
    lat0 = _AREA["lat_lo"] + (_AREA["lat_hi"] - _AREA["lat_lo"]) * rng.random()
    lon0 = _AREA["lon_lo"] + (_AREA["lon_hi"] - _AREA["lon_lo"]) * rng.random()
    taken: set[str] = set()
    points: dict[str, GeoPoint] = {}
    for category in _PLACED_CATEGORIES:
        if spec.force_collision and category == "social":
            work_cell = encode(points["work"], spec.precision).code
            points["social"] = _point_in_cell(work_cell, rng)
            continue
        for _ in range(200):
            p = GeoPoint(lat0 + 0.08 * (rng.random() - 0.5),
                         lon0 + 0.08 * (rng.random() - 0.5))
            code = encode(p, spec.precision).code
            if code not in taken:
                taken.add(code)
                points[category] = p
                break
        else:  # vanishingly unlikely with ~0.08 degree scatter
            raise RuntimeError("could not place locations in distinct cells")
    return points, taken


def _random_unknown_point(lat0: float, lon0: float, taken: set[str],
                          spec: CohortSpec, rng: np.random.Generator) -> GeoPoint:
    for _ in range(200):
        p = GeoPoint(lat0 + 0.3 * (rng.random() - 0.5),
                     lon0 + 0.3 * (rng.random() - 0.5))
        if encode(p, spec.precision).code not in taken:
            return p
    raise RuntimeError("could not place an unknown destination")


def _start_near(end: GeoPoint, rng: np.random.Generator) -> GeoPoint:
    """A start point 0.5..3 miles away, so the drive survives the short filter."""
    miles = 0.5 + 2.5 * rng.random()
    bearing = 2.0 * np.pi * rng.random()
    dlat = miles / 69.0 * np.cos(bearing)
    dlon = miles / (69.0 * np.cos(np.radians(end.lat))) * np.sin(bearing)
    return GeoPoint(end.lat + dlat, end.lon + dlon)


def generate(spec: CohortSpec) -> SynthFiles:
    """Generate the three CSV byte streams; identical spec+seed gives
    byte-identical output."""
    rng = np.random.default_rng(spec.seed)
    tz = ZoneInfo(spec.timezone)
    all_dates = [spec.start_date + timedelta(days=i) for i in range(spec.days)]
    weekday_dates = [d for d in all_dates if d.weekday() < 5]
    weekend_dates = [d for d in all_dates if d.weekday() >= 5]

    total_rate = sum(sum(spec.effective_rates(cls).values())
                     for cls in ("MCI_AD", "CU"))
    if total_rate == 0.0:
        warnings.warn("degenerate cohort spec: zero expected trips per driver")

    drives_buf = io.StringIO()
    loc_buf = io.StringIO()
    cohort_buf = io.StringIO()
    drives = csv.writer(drives_buf, lineterminator="\n")
    locations = csv.writer(loc_buf, lineterminator="\n")
    cohort = csv.writer(cohort_buf, lineterminator="\n")
    drives.writerow(["driver_id", "drive_id", "start_time", "end_time",
                     "start_lat", "start_lon", "end_lat", "end_lon",
                     "self_driven", "maintenance"])
    locations.writerow(["driver_id", "category", "lat", "lon"])
    cohort.writerow(["driver_id", "ca_label", "moca", "cogstat", "days_in_study"])

    roster = ([("MCI_AD", f"m{i + 1:03d}") for i in range(spec.n_mci)]
              + [("CU", f"c{i + 1:03d}") for i in range(spec.n_cu)])

    for cls, driver_id in roster:
        points, taken = _place_locations(spec, rng)
        home = points["home"]
        for category in _PLACED_CATEGORIES:
            p = points[category]
            locations.writerow([driver_id, category,
                                f"{p.lat:.6f}", f"{p.lon:.6f}"])

        rates = spec.effective_rates(cls)
        trips: list[tuple[datetime, GeoPoint]] = []
        for group, members in GROUP_MEMBERS.items():
            for suffix, dates in (("wkd", weekday_dates), ("wkn", weekend_dates)):
                lam = rates[f"{group}_{suffix}"] * spec.days / 100.0
                count = int(rng.poisson(lam)) if lam > 0 else 0
                if count and not dates:
                    warnings.warn(f"no {suffix} dates in a {spec.days}-day "
                                  "window; dropping those trips")
                    continue
                share = rng.multinomial(count, [1.0 / len(members)] * len(members))
                for category, k in zip(members, share):
                    cell = encode(points[category], spec.precision).code
                    for _ in range(int(k)):
                        end = _point_in_cell(cell, rng)
                        trips.append((_trip_time(dates, tz, rng), end))
        for suffix, dates in (("wkd", weekday_dates), ("wkn", weekend_dates)):
            lam = rates[f"unknown_{suffix}"] * spec.days / 100.0
            count = int(rng.poisson(lam)) if lam > 0 else 0
            if count and not dates:
                warnings.warn(f"no {suffix} dates in a {spec.days}-day window; "
                              "dropping those trips")
                continue
            for _ in range(count):
                end = _random_unknown_point(home.lat, home.lon, taken, spec, rng)
                trips.append((_trip_time(dates, tz, rng), end))

        trips.sort(key=lambda t: t[0])
        for seq, (end_time, end) in enumerate(trips, start=1):
            start = _start_near(end, rng)
            minutes = int(10 + 30 * rng.random())
            start_time = end_time - timedelta(minutes=minutes)
            drives.writerow([
                driver_id, f"{driver_id}_t{seq:05d}",
                start_time.isoformat(), end_time.isoformat(),
                f"{start.lat:.6f}", f"{start.lon:.6f}",
                f"{end.lat:.6f}", f"{end.lon:.6f}", "1", "0",
            ])

        if cls == "MCI_AD":
            moca = int(np.clip(round(rng.normal(22.0, 3.0)), 0, 30))
            cogstat = round(float(rng.normal(350.0, 40.0)), 1)
        else:
            moca = int(np.clip(round(rng.normal(27.0, 1.5)), 0, 30))
            cogstat = round(float(rng.normal(420.0, 35.0)), 1)
        cohort.writerow([driver_id, cls, moca, cogstat, spec.days])

    return SynthFiles(drives_buf.getvalue().encode(),
                      loc_buf.getvalue().encode(),
                      cohort_buf.getvalue().encode())


def _trip_time(dates: list[date], tz: ZoneInfo,
               rng: np.random.Generator) -> datetime:
    day = dates[int(rng.integers(len(dates)))]
    hour = int(rng.integers(8, 20))
    minute = int(rng.integers(0, 60))
    return datetime.combine(day, time(hour, minute), tzinfo=tz)
