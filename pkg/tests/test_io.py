"""CSV ingestion/emission: formats, diagnostics, lossless curve round trips."""

import numpy as np
import pytest

from wfadjust import InputDataError, StepCurve, WaterfallCurve
from wfadjust.io import (load_cohort, read_waterfall_curve, write_cohort,
                         write_survival_curve, write_waterfall_curve)


class TestLoadCohort:
    def test_round_trip(self, tmp_path, toy_cohort):
        write_cohort(toy_cohort, tmp_path / "p.csv", tmp_path / "s.csv")
        loaded = load_cohort(tmp_path / "p.csv", tmp_path / "s.csv")
        assert loaded == sorted(toy_cohort, key=lambda c: c.patient_id)

    def test_lf_line_endings(self, tmp_path, toy_cohort):
        write_cohort(toy_cohort, tmp_path / "p.csv", tmp_path / "s.csv")
        raw = (tmp_path / "p.csv").read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")

    def test_missing_file(self, tmp_path):
        (tmp_path / "p.csv").write_text(
            "patient_id,start_day,discontinuation_day\n")
        with pytest.raises(InputDataError, match="not found"):
            load_cohort(tmp_path / "p.csv", tmp_path / "absent.csv")

    def test_bad_header(self, tmp_path):
        (tmp_path / "p.csv").write_text("id,start\n")
        (tmp_path / "s.csv").write_text("patient_id,offset_day,change_pct\n")
        with pytest.raises(InputDataError, match="p.csv:1"):
            load_cohort(tmp_path / "p.csv", tmp_path / "s.csv")

    def test_row_and_column_diagnostics(self, tmp_path):
        (tmp_path / "p.csv").write_text(
            "patient_id,start_day,discontinuation_day\na,0,\n")
        (tmp_path / "s.csv").write_text(
            "patient_id,offset_day,change_pct\na,30,-20\na,60,oops\n")
        with pytest.raises(InputDataError, match=r"s\.csv:3.*change_pct.*oops"):
            load_cohort(tmp_path / "p.csv", tmp_path / "s.csv")

    def test_duplicate_patient(self, tmp_path):
        (tmp_path / "p.csv").write_text(
            "patient_id,start_day,discontinuation_day\na,0,\na,5,\n")
        (tmp_path / "s.csv").write_text("patient_id,offset_day,change_pct\n")
        with pytest.raises(InputDataError, match="duplicate"):
            load_cohort(tmp_path / "p.csv", tmp_path / "s.csv")

    def test_unknown_patient_in_scans(self, tmp_path):
        (tmp_path / "p.csv").write_text(
            "patient_id,start_day,discontinuation_day\na,0,\n")
        (tmp_path / "s.csv").write_text(
            "patient_id,offset_day,change_pct\nzz,30,-20\n")
        with pytest.raises(InputDataError, match="unknown patient_id"):
            load_cohort(tmp_path / "p.csv", tmp_path / "s.csv")

    def test_unsorted_scan_rows_are_ordered(self, tmp_path):
        (tmp_path / "p.csv").write_text(
            "patient_id,start_day,discontinuation_day\na,0,\n")
        (tmp_path / "s.csv").write_text(
            "patient_id,offset_day,change_pct\na,60,-30\na,30,-20\n")
        cohort = load_cohort(tmp_path / "p.csv", tmp_path / "s.csv")
        assert cohort[0].scans == ((30, -20.0), (60, -30.0))


class TestCurveFiles:
    def test_survival_csv_shape(self, tmp_path):
        curve = StepCurve([0.0, 40.0], [0.5, 0.0], lower=[0.2, 0.0],
                          upper=[0.8, 1.0])
        write_survival_curve(curve, tmp_path / "c.csv")
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines[0] == "z,survival,lower,upper"
        assert lines[1] == "0.0,0.5,0.2,0.8"

    def test_waterfall_round_trip_bitwise(self, tmp_path):
        rng = np.random.default_rng(50)
        for i in range(20):
            n = int(rng.integers(1, 9))
            ends = np.sort(rng.random(n - 1)) if n > 1 else np.array([])
            wf = WaterfallCurve(
                np.concatenate((ends, [1.0])),
                np.sort(rng.uniform(-100, 60, size=n))[::-1],
            )
            path = tmp_path / f"wf{i}.csv"
            write_waterfall_curve(wf, path)
            back = read_waterfall_curve(path)
            assert np.array_equal(back.fraction_end, wf.fraction_end)
            assert np.array_equal(back.value, wf.value)
            assert back.lower is None

    def test_waterfall_round_trip_with_bands(self, tmp_path):
        wf = WaterfallCurve([0.5, 1.0], [10.0, -60.0],
                            lower=[-5.0, -100.0], upper=[25.0, -20.0])
        write_waterfall_curve(wf, tmp_path / "wf.csv")
        back = read_waterfall_curve(tmp_path / "wf.csv")
        assert np.array_equal(back.lower, wf.lower)
        assert np.array_equal(back.upper, wf.upper)

    def test_partial_bands_rejected(self, tmp_path):
        (tmp_path / "wf.csv").write_text(
            "fraction_start,fraction_end,value,lower,upper\n"
            "0.0,0.5,10.0,,\n0.5,1.0,-60.0,-70.0,-50.0\n")
        with pytest.raises(InputDataError, match="all rows or none"):
            read_waterfall_curve(tmp_path / "wf.csv")

    def test_invalid_curve_reported_with_path(self, tmp_path):
        (tmp_path / "wf.csv").write_text(
            "fraction_start,fraction_end,value,lower,upper\n0.0,0.9,10.0,,\n")
        with pytest.raises(InputDataError, match="wf.csv"):
            read_waterfall_curve(tmp_path / "wf.csv")
