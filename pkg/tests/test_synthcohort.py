"""Synthetic cohort generation: schemas, rates, determinism."""

import io
import warnings

import numpy as np
import pytest

from lifespace.ingest import parse_cohort, parse_drives, preprocess
from lifespace.io import parse_locations
from lifespace.synthcohort import CohortSpec, TABLE_RATES, generate, null_spec
from lifespace.trips import (FEATURE_NAMES, build_location_book,
                             compute_life_space, count_categories, label_trip)


class TestSpec:
    def test_published_rate_defaults(self):
        spec = CohortSpec()
        assert spec.rates["MCI_AD"]["medical_wkd"] == 12.26
        assert spec.rates["CU"]["medical_wkd"] == 9.05

    def test_null_cohort_uses_cu_rates(self):
        spec = null_spec(CohortSpec())
        assert spec.effective_rates("MCI_AD") == spec.effective_rates("CU")
        assert spec.effective_rates("MCI_AD")["home_wkd"] == \
            TABLE_RATES["CU"]["home_wkd"]

    def test_effect_scale_stretches_difference(self):
        spec = CohortSpec(effect_scale=3.0)
        rates = spec.effective_rates("MCI_AD")
        assert rates["medical_wkd"] == pytest.approx(9.05 + 3 * (12.26 - 9.05))

    def test_negative_rates_rejected(self):
        rates = {cls: dict(r) for cls, r in TABLE_RATES.items()}
        rates["CU"]["home_wkd"] = -1.0
        with pytest.raises(ValueError):
            CohortSpec(rates=rates)

    def test_degenerate_spec_warns(self):
        rates = {cls: {k: 0.0 for k in FEATURE_NAMES}
                 for cls in ("MCI_AD", "CU")}
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            generate(CohortSpec(n_mci=1, n_cu=1, days=7, rates=rates))
        assert any("degenerate" in str(w.message) for w in caught)


class TestGenerate:
    def test_schema_exact_for_ingest(self):
        files = generate(CohortSpec(n_mci=2, n_cu=2, days=14, seed=5))
        drives, issues = parse_drives(io.BytesIO(files.drives))
        assert drives and not issues
        cohort, issues = parse_cohort(io.BytesIO(files.cohort))
        assert len(cohort) == 4 and not issues
        rows, issues = parse_locations(io.BytesIO(files.locations))
        assert rows and not issues

    def test_preprocess_keeps_everything(self):
        files = generate(CohortSpec(n_mci=2, n_cu=3, days=14, seed=6))
        drives, _ = parse_drives(io.BytesIO(files.drives))
        kept, report = preprocess(drives)
        assert report.kept == report.total == len(drives)

    def test_byte_identical_given_seed(self):
        spec = CohortSpec(n_mci=2, n_cu=2, days=10, seed=42)
        assert generate(spec) == generate(spec)

    def test_seed_changes_output(self):
        a = generate(CohortSpec(n_mci=2, n_cu=2, days=10, seed=1))
        b = generate(CohortSpec(n_mci=2, n_cu=2, days=10, seed=2))
        assert a.drives != b.drives

    def test_distinct_location_cells(self):
        spec = CohortSpec(n_mci=1, n_cu=1, days=7, seed=7)
        rows, _ = parse_locations(io.BytesIO(generate(spec).locations))
        books = build_location_book(rows, spec.precision)
        for book in books.values():
            cells = [c for cs in book.entries.values() for c in cs]
            assert len(cells) == len(set(cells))

    def test_forced_collision_produces_multilabel(self):
        spec = CohortSpec(n_mci=2, n_cu=2, days=60, seed=8,
                          force_collision=True)
        files = generate(spec)
        drives, _ = parse_drives(io.BytesIO(files.drives))
        kept, _ = preprocess(drives)
        rows, _ = parse_locations(io.BytesIO(files.locations))
        books = build_location_book(rows, spec.precision)
        labels = [label_trip(d, books.get(d.driver_id), spec.precision)
                  for d in kept]
        assert any(lab.disposition == "multi_label_excluded" for lab in labels)

    def test_weekday_home_rate_recovered(self):
        """Generator -> pipeline recount: mean within 3 standard errors."""
        rates = {cls: {k: 0.0 for k in FEATURE_NAMES}
                 for cls in ("MCI_AD", "CU")}
        for cls in ("MCI_AD", "CU"):
            rates[cls]["home_wkd"] = 80.0
        spec = CohortSpec(n_mci=10, n_cu=10, days=100, seed=11, rates=rates)
        files = generate(spec)
        drives, _ = parse_drives(io.BytesIO(files.drives))
        kept, _ = preprocess(drives)
        rows, _ = parse_locations(io.BytesIO(files.locations))
        books = build_location_book(rows, spec.precision)
        labels = [label_trip(d, books.get(d.driver_id), spec.precision)
                  for d in kept]
        counts = count_categories(labels, kept, spec.timezone)
        values = [compute_life_space(c, 100).feature("home_wkd")
                  for c in counts.values()]
        assert len(values) == 20
        mean = np.mean(values)
        stderr = np.sqrt(80.0) / np.sqrt(len(values))  # Poisson sd / sqrt(n)
        assert abs(mean - 80.0) <= 3 * stderr

    def test_cohort_rate_round_trip_table_defaults(self):
        """Cohort means of every feature within 3 SE of configured rates."""
        spec = CohortSpec(n_mci=12, n_cu=12, days=90, seed=13)
        files = generate(spec)
        drives, _ = parse_drives(io.BytesIO(files.drives))
        kept, _ = preprocess(drives)
        rows, _ = parse_locations(io.BytesIO(files.locations))
        books = build_location_book(rows, spec.precision)
        labels = [label_trip(d, books.get(d.driver_id), spec.precision)
                  for d in kept]
        counts = count_categories(labels, kept, spec.timezone)
        for cls, prefix in (("MCI_AD", "m"), ("CU", "c")):
            rates = spec.effective_rates(cls)
            ids = [d for d in counts if d.startswith(prefix)]
            vec = {name: [] for name in FEATURE_NAMES}
            for d in ids:
                v = compute_life_space(counts[d], spec.days)
                for name in FEATURE_NAMES:
                    vec[name].append(v.feature(name))
            for name in FEATURE_NAMES:
                mean = np.mean(vec[name])
                lam = rates[name] * spec.days / 100.0
                se = (np.sqrt(lam) / (spec.days / 100.0)) / np.sqrt(len(ids))
                assert abs(mean - rates[name]) <= max(3 * se, 1e-9), (cls, name)
