"""Shared fixtures: the six-patient worked example and dataset builders.

The toy cohort reproduces the canonical six-patient interim snapshot:
current bests (z) of -30, -10, 0, 25, 35, 90 at scans 1, 3, 2, 3, 3, 4,
with patients p2 and p4 still ongoing after three strictly improving
scans. A cut at day 135 observes every listed scan.
"""

import numpy as np
import pytest

from wfadjust import InterimDataset, InterimRecord, PatientCourse, apply_cut

TOY_CUT_DAY = 135


def toy_courses():
    return [
        PatientCourse("p1", 0, ((30, 30.0), (60, 35.0)), 65),
        PatientCourse("p2", 40, ((30, 30.0), (60, 20.0), (90, 10.0)), None),
        PatientCourse("p3", 10, ((30, 5.0), (60, 0.0), (90, 5.0)), 105),
        PatientCourse("p4", 40, ((30, 0.0), (60, -10.0), (90, -25.0)), None),
        PatientCourse("p5", 20, ((30, 10.0), (60, 0.0), (90, -35.0)), 115),
        PatientCourse("p6", 0, ((30, 0.0), (60, -40.0), (90, -60.0), (120, -90.0)), 125),
    ]


@pytest.fixture
def toy_cohort():
    return toy_courses()


@pytest.fixture
def toy_dataset(toy_cohort):
    return apply_cut(toy_cohort, TOY_CUT_DAY)


@pytest.fixture
def toy_csv_dir(tmp_path, toy_cohort):
    """The toy cohort written out as patients.csv / scans.csv."""
    from wfadjust.io import write_cohort

    write_cohort(toy_cohort, tmp_path / "patients.csv", tmp_path / "scans.csv")
    return tmp_path


def dataset_from_sets(sets, us=None, zs=None, k=None):
    """Build an InterimDataset directly from candidate sets.

    ``sets`` is a list of iterables of category indices; ``us`` the anchor
    category per record (defaults to the smallest). Records with more than
    one candidate are marked ongoing and filter-passing.
    """
    sets = [frozenset(s) for s in sets]
    if us is None:
        us = [min(s) for s in sets]
    if zs is None:
        zs = [10.0 * (i + 1) for i in range(len(sets))]
    if k is None:
        k = max(max(s) for s in sets)
    records = []
    for i, (cats, u, z) in enumerate(zip(sets, us, zs)):
        multi = len(cats) > 1
        records.append(InterimRecord(
            patient_id=f"r{i + 1:03d}",
            observed_changes=(-z,),
            z=float(z),
            u=u,
            ongoing=multi,
            filter_pass=multi,
            candidate_set=cats,
        ))
    return InterimDataset(cut_day=0, records=tuple(records), k=k)


def random_cohort(rng, n_max=8):
    """Small random cohort for cut/property tests. Always >= 1 scan/patient."""
    n = int(rng.integers(1, n_max + 1))
    cohort = []
    for i in range(n):
        start = int(rng.integers(0, 120))
        n_scans = int(rng.integers(1, 7))
        offsets = np.cumsum(rng.integers(10, 40, size=n_scans))
        changes = np.round(rng.uniform(-95.0, 60.0, size=n_scans), 3)
        disc = None
        if rng.random() < 0.6:
            disc = start + int(offsets[-1]) + int(rng.integers(0, 30))
        cohort.append(PatientCourse(
            patient_id=f"pt{i:03d}",
            start_day=start,
            scans=tuple((int(o), float(c)) for o, c in zip(offsets, changes)),
            discontinuation_day=disc,
        ))
    return cohort
