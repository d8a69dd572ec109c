"""Drive/cohort parsing and the four preprocessing filters."""

import io
import itertools

import pytest

from lifespace.errors import SchemaError, UndefinedExposureError
from lifespace.ingest import (DriveRecord, DriverProfile, PreprocessConfig,
                              effective_days, parse_cohort, parse_drives,
                              preprocess, REMOVAL_RULES)

HEADER = ("driver_id,drive_id,start_time,end_time,start_lat,start_lon,"
          "end_lat,end_lon,self_driven,maintenance\n")


def drives_csv(rows):
    return io.StringIO(HEADER + "".join(r + "\n" for r in rows))


GOOD = "d01,t01,2021-03-01T09:00:00-06:00,2021-03-01T09:30:00-06:00,41.20,-96.10,41.30,-96.00,1,0"


class TestParseDrives:
    def test_valid_rows(self):
        records, errors = parse_drives(drives_csv([GOOD] * 3))
        assert len(records) == 3 and not errors
        assert records[0].driver_id == "d01"
        assert records[0].end.lat == 41.30

    def test_missing_end_point_is_not_an_error(self):
        row = "d01,t01,2021-03-01T09:00:00-06:00,2021-03-01T09:30:00-06:00,41.20,-96.10,,,1,0"
        records, errors = parse_drives(drives_csv([row]))
        assert len(records) == 1 and not errors
        assert records[0].end is None and records[0].incomplete

    def test_malformed_coordinate_cites_line(self):
        bad = GOOD.replace("41.30", "abc")
        records, errors = parse_drives(drives_csv([GOOD, bad]))
        assert len(records) == 1
        assert len(errors) == 1 and errors[0].line == 3

    def test_missing_header_fatal(self):
        with pytest.raises(SchemaError):
            parse_drives(io.StringIO(GOOD + "\n"))

    def test_end_before_start_rejected(self):
        row = "d01,t01,2021-03-01T10:00:00-06:00,2021-03-01T09:00:00-06:00,41.2,-96.1,41.3,-96.0,1,0"
        records, errors = parse_drives(drives_csv([row]))
        assert not records and len(errors) == 1

    def test_naive_timestamp_rejected(self):
        row = GOOD.replace("2021-03-01T09:00:00-06:00", "2021-03-01T09:00:00")
        records, errors = parse_drives(drives_csv([row]))
        assert not records and len(errors) == 1

    def test_bytes_stream(self):
        records, errors = parse_drives(io.BytesIO(
            (HEADER + GOOD + "\n").encode()))
        assert len(records) == 1 and not errors

    def test_input_order_preserved(self):
        rows = [GOOD.replace("t01", f"t{i:02d}") for i in range(5)]
        records, _ = parse_drives(drives_csv(rows))
        assert [r.drive_id for r in records] == [f"t{i:02d}" for i in range(5)]


class TestParseCohort:
    def test_full_row(self):
        profiles, errors = parse_cohort(io.StringIO(
            "driver_id,ca_label,moca,cogstat,days_in_study\n"
            "d001,MCI_AD,22,310.5,90\n"))
        assert not errors
        p = profiles[0]
        assert (p.ca_label, p.moca, p.cogstat, p.days_in_study) == \
            ("MCI_AD", 22, 310.5, 90)

    def test_missing_cogstat_parses_to_none(self):
        profiles, errors = parse_cohort(io.StringIO(
            "driver_id,ca_label,moca,cogstat,days_in_study\n"
            "d002,CU,28,,90\n"))
        assert not errors and profiles[0].cogstat is None

    def test_unknown_label_is_row_error(self):
        profiles, errors = parse_cohort(io.StringIO(
            "driver_id,ca_label,moca,cogstat,days_in_study\n"
            "d003,UNKNOWN,28,400.0,90\n"))
        assert not profiles and len(errors) == 1


def make_drive(driver="d01", drive="t01", end=(41.3, -96.0), start=(41.2, -96.1),
               self_driven=True, maintenance=False,
               start_time="2021-03-01T09:00:00-06:00",
               end_time="2021-03-01T09:30:00-06:00"):
    from datetime import datetime
    from lifespace.geo import GeoPoint
    return DriveRecord(
        driver_id=driver, drive_id=drive,
        start_time=datetime.fromisoformat(start_time),
        end_time=datetime.fromisoformat(end_time),
        start=None if start is None else GeoPoint(*start),
        end=None if end is None else GeoPoint(*end),
        self_driven=self_driven, maintenance=maintenance)


class TestPreprocess:
    def test_missing_end_counted_incomplete(self):
        kept, report = preprocess([make_drive(end=None)])
        assert not kept and report.counts["incomplete"] == 1

    def test_short_drive(self):
        # ~0.086 miles by hand haversine, under the 0.2 threshold
        drive = make_drive(start=(41.25, -96.00), end=(41.251, -96.001))
        kept, report = preprocess([drive])
        assert not kept and report.counts["short_drive"] == 1

    def test_out_of_state_des_moines(self):
        kept, report = preprocess([make_drive(end=(41.6, -93.6))])
        assert not kept and report.counts["out_of_state"] == 1

    def test_not_self_driven(self):
        kept, report = preprocess([make_drive(self_driven=False)])
        assert report.counts["not_self_or_maintenance"] == 1

    def test_maintenance(self):
        kept, report = preprocess([make_drive(maintenance=True)])
        assert report.counts["not_self_or_maintenance"] == 1

    def test_first_match_attribution(self):
        # incomplete AND maintenance: the first rule in order claims it
        drive = make_drive(end=None, maintenance=True)
        _, report = preprocess([drive])
        assert report.counts["incomplete"] == 1
        assert report.counts["not_self_or_maintenance"] == 0

    def test_conservation_random(self):
        import numpy as np
        rng = np.random.default_rng(5)
        drives = []
        for i in range(300):
            end = None if rng.random() < 0.2 else (
                float(rng.uniform(39.5, 43.5)), float(rng.uniform(-105, -94)))
            start = (float(rng.uniform(40, 43)), float(rng.uniform(-104, -96)))
            if rng.random() < 0.1 and end is not None:
                start = (end[0] + 1e-4, end[1])  # short drive
            drives.append(make_drive(
                driver=f"d{i % 7}", drive=f"t{i}", end=end, start=start,
                self_driven=rng.random() > 0.1,
                maintenance=rng.random() < 0.05))
        kept, report = preprocess(drives)
        assert report.total == 300
        assert sum(report.counts.values()) + report.kept == 300
        assert len(kept) == report.kept
        for driver, row in report.per_driver.items():
            assert sum(row[r] for r in REMOVAL_RULES) + row["kept"] == \
                sum(1 for d in drives if d.driver_id == driver)

    def test_filter_order_invariance_of_kept_set(self):
        from lifespace.geo import haversine_miles
        cfg = PreprocessConfig()
        predicates = {
            "incomplete": lambda d: d.incomplete,
            "not_self_or_maintenance":
                lambda d: not d.incomplete and (not d.self_driven or d.maintenance),
            "short_drive": lambda d: (not d.incomplete and
                                      haversine_miles(d.start, d.end) < 0.2),
            "out_of_state": lambda d: (d.end is not None and
                                       not cfg.state_box.contains(d.end)),
        }
        drives = [make_drive(drive=f"t{i}", end=(41.0 + 0.01 * i, -96.0))
                  for i in range(20)]
        drives += [make_drive(drive="bad1", end=None, maintenance=True),
                   make_drive(drive="bad2", self_driven=False),
                   make_drive(drive="bad3", end=(41.6, -93.6)),
                   make_drive(drive="bad4", start=(41.0, -96.0),
                              end=(41.0001, -96.0))]
        kept, report = preprocess(drives)
        kept_ids = {d.drive_id for d in kept}
        for perm in itertools.permutations(predicates):
            ids, counts = set(), dict.fromkeys(predicates, 0)
            for d in drives:
                for rule in perm:
                    if predicates[rule](d):
                        counts[rule] += 1
                        break
                else:
                    ids.add(d.drive_id)
            assert ids == kept_ids  # the kept set never depends on order
            assert sum(counts.values()) + len(ids) == len(drives)

    def test_idempotence(self):
        drives = [make_drive(drive=f"t{i}") for i in range(10)]
        drives.append(make_drive(drive="bad", end=None))
        kept, _ = preprocess(drives)
        kept2, report2 = preprocess(kept)
        assert [d.drive_id for d in kept2] == [d.drive_id for d in kept]
        assert sum(report2.counts.values()) == 0


class TestEffectiveDays:
    def test_days_in_study_passthrough(self):
        profile = DriverProfile("d01", "CU", 28, 400.0, 90)
        assert effective_days([], profile) == 90

    def test_inclusive_span(self):
        drives = [make_drive(end_time="2020-01-01T10:00:00-06:00",
                             start_time="2020-01-01T09:00:00-06:00"),
                  make_drive(end_time="2020-01-10T10:00:00-06:00",
                             start_time="2020-01-10T09:00:00-06:00")]
        profile = DriverProfile("d01", "CU", 28, 400.0, None)
        assert effective_days(drives, profile) == 10

    def test_no_exposure(self):
        profile = DriverProfile("d01", "CU", 28, 400.0, None)
        with pytest.raises(UndefinedExposureError):
            effective_days([], profile)
