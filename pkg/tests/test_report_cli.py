"""Report generation and the CLI subcommands end to end."""

import io
import json

import pytest

from lifespace.cli import main
from lifespace.io import read_features, write_features
from lifespace.report import class_summary, radial_svg
from lifespace.trips import LifeSpaceVector


def vec(driver, ca="CU", home_wkd=5.0, moca=27, cogstat=410.0):
    feats = [0.0] * 12
    feats[0] = home_wkd
    feats[4] = 30.0
    return LifeSpaceVector(driver, tuple(feats), ca, moca, cogstat, 90)


class TestClassSummary:
    def test_mean_and_sd(self):
        rows = class_summary([vec("a", home_wkd=4.0), vec("b", home_wkd=6.0)])
        home = next(r for r in rows if r[1] == "home_wkd")
        assert home[2] == pytest.approx(5.0)
        assert home[3] == pytest.approx(1.4142135623730951, abs=1e-9)

    def test_single_driver_sd_zero(self):
        rows = class_summary([vec("a", ca="MCI_AD")])
        assert all(r[3] == 0.0 for r in rows)
        assert all(r[4] == 1 for r in rows)

    def test_class_ordering(self):
        rows = class_summary([vec("a", ca="CU"), vec("b", ca="MCI_AD")])
        assert rows[0][0] == "MCI_AD" and rows[-1][0] == "CU"


class TestRadialSvg:
    def test_deterministic_and_wellformed(self):
        vectors = [vec("a", ca="MCI_AD", home_wkd=8.0), vec("b", home_wkd=4.0)]
        svg1 = radial_svg(vectors)
        svg2 = radial_svg(vectors)
        assert svg1 == svg2
        assert svg1.startswith("<svg") and svg1.rstrip().endswith("</svg>")
        assert svg1.count("<polygon") >= 2

    def test_axis_labels_present(self):
        svg = radial_svg([vec("a", ca="MCI_AD")])
        assert "MT-WKD" in svg and "UT-WKN" in svg


class TestFeaturesRoundTrip:
    def test_write_read(self):
        vectors = [vec("a", ca="MCI_AD", home_wkd=1.25),
                   vec("b", home_wkd=3.5)]
        buf = io.StringIO()
        write_features(vectors, buf)
        buf.seek(0)
        back, issues = read_features(buf)
        assert not issues
        assert [v.driver_id for v in back] == ["a", "b"]
        assert back[0].features[0] == 1.25
        assert back[0].ca_label == "MCI_AD"


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    code = main(["synth", "--n-mci", "8", "--n-cu", "10", "--days", "45",
                 "--effect-scale", "3", "--seed", "7",
                 "--out-dir", str(out)])
    assert code == 0
    return out


class TestCliSynthAndPreprocess:
    def test_synth_outputs(self, synth_dir):
        for name in ("drives.csv", "locations.csv", "cohort.csv"):
            assert (synth_dir / name).exists()

    def test_preprocess(self, synth_dir, tmp_path):
        code = main(["preprocess", "--drives", str(synth_dir / "drives.csv"),
                     "--out-dir", str(tmp_path)])
        assert code == 0
        removals = json.loads((tmp_path / "removals.json").read_text())
        assert removals["kept"] == removals["total"]
        assert set(removals["counts"]) == {"incomplete",
                                           "not_self_or_maintenance",
                                           "short_drive", "out_of_state"}
        assert (tmp_path / "clean_drives.csv").exists()

    def test_preprocess_missing_header_exit_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,2,3\n")
        assert main(["preprocess", "--drives", str(bad),
                     "--out-dir", str(tmp_path)]) == 2

    def test_missing_input_exit_2(self, tmp_path):
        assert main(["preprocess", "--drives", str(tmp_path / "nope.csv"),
                     "--out-dir", str(tmp_path)]) == 2


class TestCliFeatures:
    def test_features_and_exclusions(self, synth_dir, tmp_path):
        code = main(["features",
                     "--drives", str(synth_dir / "drives.csv"),
                     "--cohort", str(synth_dir / "cohort.csv"),
                     "--locations", str(synth_dir / "locations.csv"),
                     "--out-dir", str(tmp_path)])
        assert code == 0
        with open(tmp_path / "features.csv") as fh:
            vectors, issues = read_features(fh)
        assert not issues and 0 < len(vectors) <= 18
        log = json.loads((tmp_path / "exclusions.json").read_text())
        assert "excluded" in log and "orphans" in log

    def test_byte_identical_rerun(self, synth_dir, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        args = ["features", "--drives", str(synth_dir / "drives.csv"),
                "--cohort", str(synth_dir / "cohort.csv"),
                "--locations", str(synth_dir / "locations.csv")]
        assert main(args + ["--out-dir", str(out1)]) == 0
        assert main(args + ["--out-dir", str(out2)]) == 0
        assert (out1 / "features.csv").read_bytes() == \
            (out2 / "features.csv").read_bytes()

    def test_orphan_driver_reported(self, synth_dir, tmp_path):
        cohort = (synth_dir / "cohort.csv").read_text().splitlines()
        trimmed = tmp_path / "cohort_minus_one.csv"
        trimmed.write_text("\n".join(cohort[:-1]) + "\n")
        code = main(["features", "--drives", str(synth_dir / "drives.csv"),
                     "--cohort", str(trimmed),
                     "--locations", str(synth_dir / "locations.csv"),
                     "--out-dir", str(tmp_path)])
        assert code == 0
        log = json.loads((tmp_path / "exclusions.json").read_text())
        assert len(log["orphans"]) == 1


@pytest.fixture(scope="module")
def features_file(synth_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("features")
    assert main(["features", "--drives", str(synth_dir / "drives.csv"),
                 "--cohort", str(synth_dir / "cohort.csv"),
                 "--locations", str(synth_dir / "locations.csv"),
                 "--out-dir", str(out)]) == 0
    return out / "features.csv"


class TestCliEvaluate:
    def test_outputs_and_schema(self, features_file, tmp_path):
        code = main(["evaluate", "--features", str(features_file),
                     "--splits", "4", "--seed", "3", "--out-dir",
                     str(tmp_path)])
        assert code == 0
        header = (tmp_path / "metrics.csv").read_text().splitlines()[0]
        assert header == "split_id,model,accuracy,tp,fp,fn,tn"
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert set(summary["models"]) == {"svm", "rf", "c50"}
        assert "best_model" in summary
        assert "importance" in summary["best_model"]
        scatter = (tmp_path / "scatter.csv").read_text().splitlines()
        assert scatter[0] == "driver_id,moca,cogstat,misclass_pct,ca_label"
        assert len(scatter) > 1

    def test_seed_changes_metrics_not_schema(self, features_file, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        base = ["evaluate", "--features", str(features_file), "--splits", "3",
                "--models", "c50"]
        assert main(base + ["--seed", "1", "--out-dir", str(a)]) == 0
        assert main(base + ["--seed", "2", "--out-dir", str(b)]) == 0
        ma = (a / "metrics.csv").read_text()
        mb = (b / "metrics.csv").read_text()
        assert ma.splitlines()[0] == mb.splitlines()[0]
        assert ma != mb

    def test_single_class_exit_3(self, features_file, tmp_path):
        with open(features_file) as fh:
            vectors, _ = read_features(fh)
        one_class = [v for v in vectors if v.ca_label == "CU"]
        path = tmp_path / "single.csv"
        with open(path, "w") as fh:
            write_features(one_class, fh)
        assert main(["evaluate", "--features", str(path),
                     "--out-dir", str(tmp_path)]) == 3

    def test_tiny_cohort_exit_3(self, features_file, tmp_path):
        with open(features_file) as fh:
            vectors, _ = read_features(fh)
        pos = next(v for v in vectors if v.ca_label == "MCI_AD")
        neg = next(v for v in vectors if v.ca_label == "CU")
        path = tmp_path / "tiny.csv"
        with open(path, "w") as fh:
            write_features([pos, neg], fh)
        assert main(["evaluate", "--features", str(path),
                     "--out-dir", str(tmp_path)]) == 3


class TestCliReport:
    def test_report_outputs(self, features_file, tmp_path):
        code = main(["report", "--features", str(features_file),
                     "--out-dir", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "class_summary.csv").read_text().splitlines()
        assert lines[0] == "ca_label,variable,mean,sd,n"
        assert len(lines) == 1 + 24  # two classes x twelve variables
        assert (tmp_path / "radial.svg").exists()

    def test_report_byte_identical(self, features_file, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["report", "--features", str(features_file),
                         "--out-dir", str(out)]) == 0
        assert (a / "radial.svg").read_bytes() == (b / "radial.svg").read_bytes()
        assert (a / "class_summary.csv").read_bytes() == \
            (b / "class_summary.csv").read_bytes()

    def test_empty_features_exit_2(self, tmp_path):
        path = tmp_path / "empty.csv"
        with open(path, "w") as fh:
            write_features([], fh)
        assert main(["report", "--features", str(path),
                     "--out-dir", str(tmp_path)]) == 2


class TestConfigLayering:
    def test_config_file_plus_flag_override(self, synth_dir, tmp_path):
        cfg = {"drives": str(synth_dir / "drives.csv"),
               "out_dir": str(tmp_path / "from_config")}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        override = tmp_path / "from_flag"
        assert main(["preprocess", "--config", str(cfg_path),
                     "--out-dir", str(override)]) == 0
        assert (override / "removals.json").exists()
        assert not (tmp_path / "from_config").exists()

    def test_unknown_config_key_exit_2(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"bogus": 1}))
        assert main(["preprocess", "--config", str(cfg_path),
                     "--out-dir", str(tmp_path)]) == 2


class TestEmptyDrives:
    def test_preprocess_empty_file_with_header(self, tmp_path):
        drives = tmp_path / "drives.csv"
        drives.write_text(
            "driver_id,drive_id,start_time,end_time,start_lat,start_lon,"
            "end_lat,end_lon,self_driven,maintenance\n")
        assert main(["preprocess", "--drives", str(drives),
                     "--out-dir", str(tmp_path)]) == 0
        removals = json.loads((tmp_path / "removals.json").read_text())
        assert removals["kept"] == 0 and removals["total"] == 0
        assert all(v == 0 for v in removals["counts"].values())


class TestCliErrorPaths:
    def test_bad_config_json_exit_2(self, tmp_path):
        cfg = tmp_path / "broken.json"
        cfg.write_text("{not json")
        assert main(["preprocess", "--config", str(cfg),
                     "--out-dir", str(tmp_path)]) == 2

    def test_unknown_model_exit_2(self, tmp_path):
        feats = tmp_path / "f.csv"
        with open(feats, "w") as fh:
            write_features([vec(f"d{i}", ca="MCI_AD" if i % 2 else "CU")
                            for i in range(8)], fh)
        assert main(["evaluate", "--features", str(feats),
                     "--models", "c50,xgboost",
                     "--out-dir", str(tmp_path)]) == 2
