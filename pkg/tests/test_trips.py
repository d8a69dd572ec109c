"""Trip labeling, relabels, counts, features, and the brute-force oracle."""

import io
from datetime import datetime

import pytest

from lifespace.errors import ConfigError, LifeSpaceError
from lifespace.geo import GeoPoint, encode
from lifespace.ingest import parse_drives, preprocess
from lifespace.io import parse_locations
from lifespace.synthcohort import CohortSpec, generate
from lifespace.trips import (CategoryCounts, FEATURE_NAMES, LifeSpaceVector,
                             apply_relabels, build_location_book,
                             compute_life_space, count_categories,
                             exclude_low_activity, label_trip)
from test_ingest import make_drive

HOME = (41.2565, -95.9345)
PRECISION = 7


@pytest.fixture
def book():
    rows = [("d01", "home", *HOME),
            ("d01", "work", 41.30, -96.05),
            ("d01", "groceries", 41.28, -96.02),
            ("d01", "groceries", 41.29, -96.03),
            ("d01", "doctor", 41.27, -96.07)]
    return build_location_book(rows, PRECISION)["d01"]


class TestLocationBook:
    def test_home_entry(self, book):
        expected = encode(GeoPoint(*HOME), PRECISION).code
        assert book.entries["home"] == frozenset({expected})

    def test_two_groceries(self, book):
        assert len(book.entries["groceries"]) == 2

    def test_unknown_category_rejected(self):
        with pytest.raises(LifeSpaceError):
            build_location_book([("d01", "gym", 41.0, -96.0)], PRECISION)

    def test_duplicate_cells_dedup(self):
        rows = [("d01", "gas", 41.2800001, -96.0200001),
                ("d01", "gas", 41.2800002, -96.0200002)]
        books = build_location_book(rows, PRECISION)
        assert len(books["d01"].entries["gas"]) == 1


class TestLabelTrip:
    def test_end_at_surveyed_home(self, book):
        drive = make_drive(end=HOME)
        label = label_trip(drive, book, PRECISION)
        assert label.disposition == "single" and label.category == "home"

    def test_multi_label_excluded(self):
        rows = [("d01", "work", 41.30, -96.05),
                ("d01", "social", 41.30, -96.05)]
        b = build_location_book(rows, PRECISION)["d01"]
        label = label_trip(make_drive(end=(41.30, -96.05)), b, PRECISION)
        assert label.disposition == "multi_label_excluded"
        assert label.matched == frozenset({"work", "social"})

    def test_unmatched_is_unknown(self, book):
        label = label_trip(make_drive(end=(40.5, -99.0)), book, PRECISION)
        assert label.disposition == "unknown" and not label.matched

    def test_same_category_twice_is_single(self):
        rows = [("d01", "gas", 41.30, -96.05), ("d01", "gas", 41.28, -96.02)]
        b = build_location_book(rows, PRECISION)["d01"]
        label = label_trip(make_drive(end=(41.30, -96.05)), b, PRECISION)
        assert label.disposition == "single" and label.category == "gas"

    def test_missing_end_rejected(self, book):
        with pytest.raises(LifeSpaceError):
            label_trip(make_drive(end=None), book, PRECISION)

    def test_no_book_all_unknown(self):
        label = label_trip(make_drive(end=HOME), None, PRECISION)
        assert label.disposition == "unknown"


class TestRelabels:
    def _unknown_label(self, cell="9z7unkn"):
        drive = make_drive(end=(40.5, -99.0))
        code = encode(drive.end, PRECISION).code
        return label_trip(drive, None, PRECISION), code

    def test_unknown_to_doctor(self):
        label, code = self._unknown_label()
        out = apply_relabels([label], [("d01", code, "doctor")])
        assert out[0].disposition == "single" and out[0].category == "doctor"

    def test_other_to_social(self):
        rows = [("d01", "other", 41.31, -96.06)]
        b = build_location_book(rows, PRECISION)["d01"]
        label = label_trip(make_drive(end=(41.31, -96.06)), b, PRECISION)
        assert label.category == "other"
        out = apply_relabels([label], [("d01", label.end_geohash, "social")])
        assert out[0].category == "social"

    def test_home_never_relabeled(self):
        rows = [("d01", "home", *HOME)]
        b = build_location_book(rows, PRECISION)["d01"]
        label = label_trip(make_drive(end=HOME), b, PRECISION)
        out = apply_relabels([label], [("d01", label.end_geohash, "social")])
        assert out[0].category == "home"

    def test_override_to_closed_category_rejected(self):
        label, code = self._unknown_label()
        with pytest.raises(ConfigError):
            apply_relabels([label], [("d01", code, "home")])

    def test_relabel_preserves_trip_count(self):
        label, code = self._unknown_label()
        labels = [label] * 5
        out = apply_relabels(labels, [("d01", code, "gas")])
        assert len(out) == len(labels)

    def test_multi_label_never_reassigned(self):
        rows = [("d01", "work", 41.30, -96.05), ("d01", "social", 41.30, -96.05)]
        b = build_location_book(rows, PRECISION)["d01"]
        label = label_trip(make_drive(end=(41.30, -96.05)), b, PRECISION)
        out = apply_relabels([label], [("d01", label.end_geohash, "gas")])
        assert out[0].disposition == "multi_label_excluded"


class TestCounts:
    def test_weekday_weekend_split(self, book):
        # 2021-03-02 is a Tuesday, 2021-03-06 a Saturday
        tuesday = make_drive(drive="t1", end=HOME,
                             start_time="2021-03-02T08:00:00-06:00",
                             end_time="2021-03-02T09:00:00-06:00")
        saturday = make_drive(drive="t2", end=HOME,
                              start_time="2021-03-06T08:00:00-06:00",
                              end_time="2021-03-06T09:00:00-06:00")
        labels = [label_trip(d, book, PRECISION) for d in (tuesday, saturday)]
        counts = count_categories(labels, [tuesday, saturday])["d01"]
        assert counts.counts["home"] == [1, 1]

    def test_multi_label_contributes_nothing(self):
        rows = [("d01", "work", 41.30, -96.05), ("d01", "social", 41.30, -96.05)]
        b = build_location_book(rows, PRECISION)["d01"]
        drive = make_drive(end=(41.30, -96.05))
        label = label_trip(drive, b, PRECISION)
        counts = count_categories([label], [drive])["d01"]
        assert counts.total() == 0

    def test_leftover_other_folds_into_unknown(self):
        rows = [("d01", "other", 41.31, -96.06)]
        b = build_location_book(rows, PRECISION)["d01"]
        drive = make_drive(end=(41.31, -96.06))
        label = label_trip(drive, b, PRECISION)
        counts = count_categories([label], [drive])["d01"]
        assert sum(counts.counts["unknown"]) == 1

    def test_timezone_changes_daytype(self):
        # Friday 23:30 in Chicago is Saturday 05:30 UTC
        drive = make_drive(end=HOME, start_time="2021-03-05T23:00:00-06:00",
                           end_time="2021-03-05T23:30:00-06:00")
        label = label_trip(drive, None, PRECISION)
        chicago = count_categories([label], [drive], "America/Chicago")["d01"]
        utc = count_categories([label], [drive], "UTC")["d01"]
        assert chicago.counts["unknown"] == [0, 1]  # Friday local: weekday slot
        assert utc.counts["unknown"] == [1, 0]      # Saturday UTC: weekend slot


class TestComputeLifeSpace:
    def test_normalization(self):
        counts = CategoryCounts("d01")
        counts.counts["home"][1] = 2
        vec = compute_life_space(counts, 50)
        assert vec.feature("home_wkd") == 4.0

    def test_errand_grouping(self):
        counts = CategoryCounts("d01")
        counts.counts["groceries"][1] = 1
        counts.counts["gas"][1] = 1
        vec = compute_life_space(counts, 100)
        assert vec.feature("errand_wkd") == 2.0

    def test_all_zero(self):
        vec = compute_life_space(CategoryCounts("d01"), 90)
        assert all(f == 0.0 for f in vec.features)

    def test_normalization_identity(self):
        import numpy as np
        rng = np.random.default_rng(3)
        for _ in range(50):
            counts = CategoryCounts("d01")
            for key in counts.counts:
                counts.counts[key][0] = int(rng.integers(0, 40))
                counts.counts[key][1] = int(rng.integers(0, 40))
            days = int(rng.integers(1, 400))
            vec = compute_life_space(counts, days)
            for value in vec.features:
                raw = value * days / 100.0
                assert abs(raw - round(raw)) < 1e-9
            assert vec.raw_total() == counts.total()


class TestExcludeLowActivity:
    def _vec(self, driver="d01", total=5, ca="CU", moca=28, cogstat=400.0):
        features = [0.0] * 12
        features[0] = 100.0 * total / 90
        return LifeSpaceVector(driver, tuple(features), ca, moca, cogstat, 90)

    def test_single_trip_excluded(self):
        kept, excluded = exclude_low_activity([self._vec(total=1)])
        assert not kept and excluded[0][1] == "low_activity"

    def test_two_trips_kept(self):
        kept, excluded = exclude_low_activity([self._vec(total=2)])
        assert len(kept) == 1 and not excluded

    def test_missing_cogstat_excluded(self):
        kept, excluded = exclude_low_activity([self._vec(cogstat=None)])
        assert not kept and excluded[0][1] == "missing_scores"

    def test_missing_label_excluded(self):
        kept, excluded = exclude_low_activity([self._vec(ca=None)])
        assert not kept and excluded[0][1] == "missing_label"


class TestOracleRecount:
    """End-to-end: generated cohorts recounted by the independent oracle."""

    def _pipeline_counts(self, spec):
        from oracles import oracle_recount
        files = generate(spec)
        records, issues = parse_drives(io.BytesIO(files.drives))
        assert not issues
        kept, _ = preprocess(records)
        rows, issues = parse_locations(io.BytesIO(files.locations))
        assert not issues
        books = build_location_book(rows, spec.precision)
        labels = [label_trip(d, books.get(d.driver_id), spec.precision)
                  for d in kept]
        counts = count_categories(labels, kept, spec.timezone)
        expected, multi = oracle_recount(kept, rows, [], spec.precision,
                                         spec.timezone)
        return kept, labels, counts, expected, multi

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_counts_match_oracle(self, seed):
        spec = CohortSpec(n_mci=3, n_cu=4, days=30, seed=seed,
                          force_collision=(seed == 2))
        kept, labels, counts, expected, multi = self._pipeline_counts(spec)
        for driver, tally in expected.items():
            got = counts.get(driver, CategoryCounts(driver))
            vec = compute_life_space(got, 30)
            for name in FEATURE_NAMES:
                raw = round(vec.feature(name) * 30 / 100.0)
                assert raw == tally[name], (driver, name)

    def test_conservation(self):
        spec = CohortSpec(n_mci=3, n_cu=3, days=30, seed=9,
                          force_collision=True)
        kept, labels, counts, expected, multi = self._pipeline_counts(spec)
        per_driver_kept = {}
        for d in kept:
            per_driver_kept[d.driver_id] = per_driver_kept.get(d.driver_id, 0) + 1
        for driver, n_kept in per_driver_kept.items():
            total = counts[driver].total()
            assert total + multi.get(driver, 0) == n_kept, driver
