"""Longitudinal scan data and the interim data cut.

A cohort is a list of :class:`PatientCourse` records (calendar enrollment,
scan offsets, percent tumor-size changes, optional discontinuation day).
``apply_cut`` snapshots the cohort at a calendar day and derives, per
patient, the interim quantities the downstream estimators consume:

* ``z``      negative current-best tumor size change (so deeper reduction
  means larger ``z``),
* ``u``      1-based index of the scan where the current best occurred
  (earliest scan on ties), clamped into the merged category range,
* ``candidate_set``  scan categories where the final best may still occur,
* ``ongoing`` / ``filter_pass``  whether the patient can still improve.

Scans are indexed ordinally per patient (1st, 2nd, ...); calendar days
matter only for deciding what the cut can see.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputDataError, NoEvaluablePatientsError


@dataclass(frozen=True)
class PatientCourse:
    """One patient's full longitudinal record.

    ``scans`` is an ordered tuple of ``(offset_day, change_pct)`` pairs,
    offsets counted from ``start_day``. ``discontinuation_day`` is a
    calendar day; ``None`` means the patient never discontinued.
    """

    patient_id: str
    start_day: int
    scans: tuple[tuple[int, float], ...]
    discontinuation_day: int | None = None

    def __post_init__(self):
        prev = 0
        for offset, change in self.scans:
            if offset <= prev:
                raise InputDataError(
                    f"patient {self.patient_id!r}: scan offsets must be "
                    f"strictly increasing and positive (got {offset} after {prev})"
                )
            if change < -100.0:
                raise InputDataError(
                    f"patient {self.patient_id!r}: change_pct {change} < -100 "
                    "is physically impossible"
                )
            prev = offset
        if self.discontinuation_day is not None and self.scans:
            last_day = self.start_day + self.scans[-1][0]
            if self.discontinuation_day < last_day:
                raise InputDataError(
                    f"patient {self.patient_id!r}: discontinuation_day "
                    f"{self.discontinuation_day} precedes last scan day {last_day}"
                )

    @property
    def changes(self) -> tuple[float, ...]:
        return tuple(c for _, c in self.scans)


@dataclass(frozen=True)
class InterimRecord:
    """Per-patient view at the data cut.

    ``u`` is the best-scan category (scan index clamped to the merged
    category count K); ``candidate_set`` always contains it. Patients that
    are discontinued or fail the improvement filter get a singleton
    candidate set, which forces an event probability of exactly 1.
    """

    patient_id: str
    observed_changes: tuple[float, ...]
    z: float
    u: int
    ongoing: bool
    filter_pass: bool
    candidate_set: frozenset[int] = field(default_factory=frozenset)

    @property
    def n_observed(self) -> int:
        return len(self.observed_changes)

    @property
    def eligible(self) -> bool:
        """Whether the model treats this patient as able to improve."""
        return self.ongoing and self.filter_pass


@dataclass(frozen=True)
class InterimDataset:
    cut_day: int
    records: tuple[InterimRecord, ...]
    k: int

    def __post_init__(self):
        for rec in self.records:
            if rec.u not in rec.candidate_set:
                raise ValueError(
                    f"patient {rec.patient_id!r}: u={rec.u} not in candidate set"
                )

    @property
    def n(self) -> int:
        return len(self.records)


def best_change(observed_changes) -> tuple[float, int]:
    """Return ``(z, u)``: z = -min(changes), u = earliest 1-based argmin."""
    if len(observed_changes) == 0:
        raise ValueError("best_change needs at least one observed scan")
    best = min(observed_changes)
    u = 1 + list(observed_changes).index(best)
    return -best + 0.0, u  # +0.0 normalizes -0.0


def filter_pass(observed_changes) -> bool:
    """Improvement filter for ongoing patients.

    Fails (returns False) if the last two scans are equal, or if any scan
    is strictly higher than the one before it. A patient that fails is
    deemed unable to reach a deeper response, so downstream the event
    probability is forced to 1.
    """
    if len(observed_changes) == 0:
        raise ValueError("filter_pass needs at least one observed scan")
    seq = list(observed_changes)
    if len(seq) >= 2 and seq[-1] == seq[-2]:
        return False
    for prev, cur in zip(seq, seq[1:]):
        if cur > prev:
            return False
    return True


def candidate_scans(u: int, n_observed: int, k: int,
                    ongoing: bool, passed_filter: bool) -> frozenset[int]:
    """Scan categories where the final best change may occur.

    Discontinued or filtered-out patients get the singleton ``{min(u, k)}``.
    Eligible patients additionally get every category from the first
    not-yet-seen scan onward; all indices are clamped into ``1..k``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    anchor = min(u, k)
    if not (ongoing and passed_filter):
        return frozenset({anchor})
    future_start = min(n_observed + 1, k)
    return frozenset({anchor}) | frozenset(range(future_start, k + 1))


def apply_cut(cohort, cut_day: int, filter_enabled: bool = True) -> InterimDataset:
    """Snapshot a cohort at ``cut_day`` and derive all interim quantities.

    Includes exactly the patients enrolled by the cut with at least one
    scan on or before it. ``ongoing`` is True when no discontinuation is
    recorded by the cut. With ``filter_enabled=False`` every ongoing
    patient is treated as filter-passing; discontinued records always
    carry the computed filter verdict (it never affects them downstream).

    K is set to one past the latest best-scan index among eligible
    (ongoing and filter-passing) patients, merging that scan and all later
    ones into a single category; with no eligible patient it is the
    largest best-scan index overall.
    """
    seen: set[str] = set()
    for course in cohort:
        if course.patient_id in seen:
            raise InputDataError(f"duplicate patient_id {course.patient_id!r}")
        seen.add(course.patient_id)

    prelim = []
    for course in sorted(cohort, key=lambda c: c.patient_id):
        if course.start_day > cut_day:
            continue
        observed = tuple(
            change for offset, change in course.scans
            if course.start_day + offset <= cut_day
        )
        if not observed:
            continue
        z, u_raw = best_change(observed)
        ongoing = (course.discontinuation_day is None
                   or course.discontinuation_day > cut_day)
        passed = filter_pass(observed)
        if ongoing and not filter_enabled:
            passed = True
        prelim.append((course.patient_id, observed, z, u_raw, ongoing, passed))

    if not prelim:
        raise NoEvaluablePatientsError(
            f"no evaluable patients at cut day {cut_day}"
        )

    eligible_u = [u for _, _, _, u, ongoing, passed in prelim if ongoing and passed]
    if eligible_u:
        k = 1 + max(eligible_u)
    else:
        k = max(u for _, _, _, u, _, _ in prelim)

    records = tuple(
        InterimRecord(
            patient_id=pid,
            observed_changes=observed,
            z=z,
            u=min(u_raw, k),
            ongoing=ongoing,
            filter_pass=passed,
            candidate_set=candidate_scans(u_raw, len(observed), k, ongoing, passed),
        )
        for pid, observed, z, u_raw, ongoing, passed in prelim
    )
    return InterimDataset(cut_day=cut_day, records=records, k=k)
