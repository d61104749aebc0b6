"""CSV ingestion and emission.

Input contract: ``patients.csv`` with header
``patient_id,start_day,discontinuation_day`` (last field may be empty) and
``scans.csv`` with header ``patient_id,offset_day,change_pct`` in long
format. Days are integers, comma-separated, UTF-8, LF line endings.
Parse failures raise :class:`InputDataError` with row/column diagnostics.

Output files carry floats in shortest round-trip form so that identical
runs are byte-identical and curves can be re-read losslessly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import InputDataError
from .interim import InterimDataset, PatientCourse
from .survival import StepCurve
from .waterfall import WaterfallCurve


def _fmt(x) -> str:
    return repr(float(x))


def _open_reader(path):
    path = Path(path)
    if not path.exists():
        raise InputDataError(f"{path}: file not found")
    return path.open(newline="", encoding="utf-8")


def _parse_int(row_no, path, column, text):
    try:
        return int(text)
    except ValueError:
        raise InputDataError(
            f"{path}:{row_no}: column {column!r}: expected integer, got {text!r}"
        ) from None


def _parse_float(row_no, path, column, text):
    try:
        return float(text)
    except ValueError:
        raise InputDataError(
            f"{path}:{row_no}: column {column!r}: expected number, got {text!r}"
        ) from None


def _check_header(path, header, expected):
    if header != expected:
        raise InputDataError(
            f"{path}:1: expected header {','.join(expected)!r}, "
            f"got {','.join(header or [])!r}"
        )


def load_cohort(patients_path, scans_path) -> list[PatientCourse]:
    """Read the two input CSVs into a validated cohort, sorted by id."""
    patients: dict[str, tuple[int, int | None]] = {}
    with _open_reader(patients_path) as fh:
        reader = csv.reader(fh)
        _check_header(patients_path, next(reader, None),
                      ["patient_id", "start_day", "discontinuation_day"])
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise InputDataError(
                    f"{patients_path}:{row_no}: expected 3 fields, got {len(row)}"
                )
            pid, start, disc = row
            if pid in patients:
                raise InputDataError(
                    f"{patients_path}:{row_no}: duplicate patient_id {pid!r}"
                )
            patients[pid] = (
                _parse_int(row_no, patients_path, "start_day", start),
                None if disc == "" else
                _parse_int(row_no, patients_path, "discontinuation_day", disc),
            )

    scans: dict[str, list[tuple[int, float]]] = {pid: [] for pid in patients}
    with _open_reader(scans_path) as fh:
        reader = csv.reader(fh)
        _check_header(scans_path, next(reader, None),
                      ["patient_id", "offset_day", "change_pct"])
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise InputDataError(
                    f"{scans_path}:{row_no}: expected 3 fields, got {len(row)}"
                )
            pid, offset, change = row
            if pid not in scans:
                raise InputDataError(
                    f"{scans_path}:{row_no}: unknown patient_id {pid!r}"
                )
            scans[pid].append((
                _parse_int(row_no, scans_path, "offset_day", offset),
                _parse_float(row_no, scans_path, "change_pct", change),
            ))

    cohort = []
    for pid in sorted(patients):
        start, disc = patients[pid]
        cohort.append(PatientCourse(
            patient_id=pid,
            start_day=start,
            scans=tuple(sorted(scans[pid])),
            discontinuation_day=disc,
        ))
    return cohort


def _writer(path):
    return csv.writer(path, lineterminator="\n")


def write_cohort(cohort, patients_path, scans_path) -> None:
    with Path(patients_path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["patient_id", "start_day", "discontinuation_day"])
        for c in cohort:
            disc = "" if c.discontinuation_day is None else c.discontinuation_day
            w.writerow([c.patient_id, c.start_day, disc])
    with Path(scans_path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["patient_id", "offset_day", "change_pct"])
        for c in cohort:
            for offset, change in c.scans:
                w.writerow([c.patient_id, offset, f"{change:.6f}".rstrip("0").rstrip(".")])


def write_interim(dataset: InterimDataset, event_probs, path) -> None:
    """Per-patient interim summary: z, best-scan category, candidate set."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["patient_id", "z", "u", "candidate_set",
                    "ongoing", "filter_pass", "p_event"])
        for rec in dataset.records:
            w.writerow([
                rec.patient_id, _fmt(rec.z), rec.u,
                ";".join(str(c) for c in sorted(rec.candidate_set)),
                int(rec.ongoing), int(rec.filter_pass),
                _fmt(event_probs[rec.patient_id]),
            ])


def write_theta(mean, variance, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["category", "mean", "variance"])
        for k, (m, v) in enumerate(zip(mean, variance), start=1):
            w.writerow([k, _fmt(m), _fmt(v)])


def write_theta_mle(theta, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["category", "mle"])
        for k, t in enumerate(theta, start=1):
            w.writerow([k, _fmt(t)])


def write_event_probs(event_probs, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["patient_id", "p_event", "q_censor"])
        for pid in sorted(event_probs):
            p = event_probs[pid]
            w.writerow([pid, _fmt(p), _fmt(1.0 - p)])


def write_survival_curve(curve: StepCurve, path) -> None:
    """`z,survival,lower,upper`, one row per breakpoint, ascending z."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["z", "survival", "lower", "upper"])
        for i in range(curve.z.size):
            lo = _fmt(curve.lower[i]) if curve.has_bands else ""
            up = _fmt(curve.upper[i]) if curve.has_bands else ""
            w.writerow([_fmt(curve.z[i]), _fmt(curve.survival[i]), lo, up])


def write_waterfall_curve(wf: WaterfallCurve, path) -> None:
    """`fraction_start,fraction_end,value,lower,upper`, one row per segment."""
    starts = np.concatenate(([0.0], wf.fraction_end[:-1]))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["fraction_start", "fraction_end", "value", "lower", "upper"])
        for i in range(wf.fraction_end.size):
            lo = _fmt(wf.lower[i]) if wf.has_bands else ""
            up = _fmt(wf.upper[i]) if wf.has_bands else ""
            w.writerow([_fmt(starts[i]), _fmt(wf.fraction_end[i]),
                        _fmt(wf.value[i]), lo, up])


def read_waterfall_curve(path) -> WaterfallCurve:
    fraction_end, values, lowers, uppers = [], [], [], []
    with _open_reader(path) as fh:
        reader = csv.reader(fh)
        _check_header(path, next(reader, None),
                      ["fraction_start", "fraction_end", "value", "lower", "upper"])
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise InputDataError(
                    f"{path}:{row_no}: expected 5 fields, got {len(row)}"
                )
            fraction_end.append(_parse_float(row_no, path, "fraction_end", row[1]))
            values.append(_parse_float(row_no, path, "value", row[2]))
            lowers.append(None if row[3] == "" else
                          _parse_float(row_no, path, "lower", row[3]))
            uppers.append(None if row[4] == "" else
                          _parse_float(row_no, path, "upper", row[4]))
    if not fraction_end:
        raise InputDataError(f"{path}: no curve segments")
    has_bands = all(x is not None for x in lowers)
    if not has_bands and any(x is not None for x in lowers + uppers):
        raise InputDataError(f"{path}: bands must be given on all rows or none")
    try:
        return WaterfallCurve(
            np.array(fraction_end), np.array(values),
            lower=np.array(lowers, dtype=float) if has_bands else None,
            upper=np.array(uppers, dtype=float) if has_bands else None,
        )
    except ValueError as exc:
        raise InputDataError(f"{path}: {exc}") from None
