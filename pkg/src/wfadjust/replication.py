"""Desk-scale validation by enrollment-date shuffling.

Given a cohort with complete follow-up, each replicate permutes the
treatment start dates among patients (scan offsets, change values and the
discontinuation offset ride along unchanged), re-applies the same data
cut, and runs the adjusted and unadjusted pipelines. Comparing both curve
families against the full-follow-up ground truth shows whether the
adjustment removes the shallow bias of interim waterfalls.

Also houses a deterministic cohort synthesizer (monotone geometric
improvement toward a random depth, then a short plateau before
discontinuation) used for testing; no real dataset ships with the package.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NoEvaluablePatientsError
from .interim import PatientCourse, best_change
from .multinomial import GibbsConfig
from .pipeline import run_adjustment
from .waterfall import WaterfallCurve

logger = logging.getLogger(__name__)

GROUND_TRUTH_CHOICES = ("all", "enrolled")


@dataclass(frozen=True)
class ReplicationConfig:
    n_replicates: int
    base_seed: int
    cut_day: int
    gibbs: GibbsConfig = field(default_factory=GibbsConfig)
    filter_enabled: bool = True
    ground_truth: str = "all"        # deviations vs. everyone, or only
    ci_level: float | None = None    # patients enrolled in each replicate
    n_grid: int = 101

    def __post_init__(self):
        if self.n_replicates < 1:
            raise ValueError("n_replicates must be >= 1")
        if self.ground_truth not in GROUND_TRUTH_CHOICES:
            raise ValueError(f"ground_truth must be one of {GROUND_TRUTH_CHOICES}")
        if self.n_grid < 2:
            raise ValueError("n_grid must be >= 2")


@dataclass(frozen=True)
class Replicate:
    index: int
    seed: int
    skipped: bool
    adjusted: WaterfallCurve | None = None
    unadjusted: WaterfallCurve | None = None
    truth: WaterfallCurve | None = None
    n_evaluable: int = 0


@dataclass(frozen=True)
class ReplicationResult:
    replicates: tuple[Replicate, ...]
    truth: WaterfallCurve | None      # fixed curve when ground_truth="all"
    fractions: np.ndarray
    mean_adjusted_dev: np.ndarray     # mean of (replicate - truth) per fraction
    mean_unadjusted_dev: np.ndarray
    n_effective: int

    @property
    def skipped_seeds(self) -> tuple[int, ...]:
        return tuple(r.seed for r in self.replicates if r.skipped)


def shuffle_starts(cohort, seed: int) -> list[PatientCourse]:
    """Permute start days among patients, keeping each course's shape.

    Scan offsets, change values, and the discontinuation offset relative
    to the start stay with their patient; only the calendar anchor moves.
    Deterministic given the seed.
    """
    if not cohort:
        raise ValueError("cohort is empty")
    ordered = sorted(cohort, key=lambda c: c.patient_id)
    starts = [c.start_day for c in ordered]
    perm = np.random.default_rng(seed).permutation(len(ordered))
    shuffled = []
    for course, new_start in zip(ordered, (starts[j] for j in perm)):
        disc = course.discontinuation_day
        if disc is not None:
            disc = new_start + (disc - course.start_day)
        shuffled.append(replace(course, start_day=int(new_start),
                                discontinuation_day=disc))
    return shuffled


def ground_truth_curve(cohort, patient_ids=None) -> WaterfallCurve:
    """Waterfall of final best changes over patients with complete follow-up."""
    if patient_ids is None:
        subset = list(cohort)
    else:
        wanted = set(patient_ids)
        subset = [c for c in cohort if c.patient_id in wanted]
    if not subset:
        raise ValueError("ground-truth subset is empty")
    finals = []
    for course in subset:
        if course.discontinuation_day is None:
            raise ValueError(
                f"patient {course.patient_id!r} lacks complete follow-up "
                "(no discontinuation day)"
            )
        z, _ = best_change(course.changes)
        finals.append((-z, course.patient_id))
    finals.sort(key=lambda t: (-t[0], t[1]))
    n = len(finals)
    fraction_end = np.arange(1, n + 1) / n
    fraction_end[-1] = 1.0
    return WaterfallCurve(fraction_end, np.array([v for v, _ in finals]))


def run_replications(cohort, config: ReplicationConfig) -> ReplicationResult:
    """Shuffle, re-cut, re-adjust ``n_replicates`` times and summarize bias.

    Replicate r uses shuffle seed ``base_seed + r`` and chain seed
    ``gibbs.seed + r``. Replicates whose cut leaves no evaluable patient
    are recorded as skipped and excluded from the deviation means.
    """
    fixed_truth = ground_truth_curve(cohort) if config.ground_truth == "all" else None
    fractions = np.linspace(0.0, 1.0, config.n_grid)

    replicates = []
    adj_devs, unadj_devs = [], []
    for r in range(1, config.n_replicates + 1):
        seed = config.base_seed + r
        shuffled = shuffle_starts(cohort, seed)
        gibbs = replace(config.gibbs, seed=config.gibbs.seed + r)
        try:
            result = run_adjustment(
                shuffled, config.cut_day, gibbs,
                ci_level=config.ci_level, filter_enabled=config.filter_enabled,
            )
        except NoEvaluablePatientsError:
            logger.warning("replicate %d (seed %d): no evaluable patients; skipped",
                           r, seed)
            replicates.append(Replicate(index=r, seed=seed, skipped=True))
            continue
        if fixed_truth is not None:
            truth = fixed_truth
        else:
            truth = ground_truth_curve(
                cohort, [rec.patient_id for rec in result.dataset.records]
            )
        truth_vals = truth.value_at(fractions)
        adj_devs.append(result.adjusted.value_at(fractions) - truth_vals)
        unadj_devs.append(result.unadjusted.value_at(fractions) - truth_vals)
        replicates.append(Replicate(
            index=r, seed=seed, skipped=False,
            adjusted=result.adjusted, unadjusted=result.unadjusted,
            truth=None if fixed_truth is not None else truth,
            n_evaluable=result.dataset.n,
        ))

    n_effective = len(adj_devs)
    if n_effective:
        mean_adj = np.mean(adj_devs, axis=0)
        mean_unadj = np.mean(unadj_devs, axis=0)
    else:
        mean_adj = np.full(fractions.size, np.nan)
        mean_unadj = np.full(fractions.size, np.nan)
    return ReplicationResult(
        replicates=tuple(replicates),
        truth=fixed_truth,
        fractions=fractions,
        mean_adjusted_dev=mean_adj,
        mean_unadjusted_dev=mean_unadj,
        n_effective=n_effective,
    )


def geometric_trajectory(depth: float, decay: float, n_scans: int,
                         noise_sd: float = 0.0, rng=None) -> list[float]:
    """Tumor-change sequence closing the gap to ``depth`` by ``decay`` per scan.

    With no noise the t-th value is depth * (1 - decay**t); noise is added
    and the sequence is then forced strictly decreasing.
    """
    if not 0.0 < decay < 1.0:
        raise ValueError("decay must lie in (0, 1)")
    values = []
    prev = 0.0
    for t in range(1, n_scans + 1):
        raw = depth * (1.0 - decay ** t)
        if noise_sd > 0.0:
            raw += rng.normal(0.0, noise_sd)
        value = round(min(raw, prev - 0.01), 6)
        value = max(value, -100.0)
        values.append(value)
        prev = value
    return values


def synthesize_cohort(n_patients: int, scan_interval_days: int = 42,
                      max_scans: int = 8, improvement_decay: float = 0.5,
                      seed: int = 0, *, noise_sd: float = 4.0,
                      depth_range: tuple[float, float] = (-85.0, -25.0),
                      enrollment_span_days: int = 420,
                      plateau_threshold: float = 8.0) -> list[PatientCourse]:
    """Deterministic synthetic cohort of improve-then-plateau courses.

    Each patient draws a final depth and approaches it geometrically at
    rate ``improvement_decay``; improvement stops once the remaining gap
    falls below ``plateau_threshold`` (slower decay means later best
    scans). The best value is then repeated for 1-3 plateau scans and the
    patient discontinues shortly after, so every course has complete
    follow-up.

    The defaults produce interim cuts mixing completed deep responders
    with mid-course ongoing patients; worlds where nearly every deep
    responder is still ongoing at the cut push the projection past the
    truth (all leftover mass lands on the -100% floor).
    """
    if n_patients < 1:
        raise ValueError("n_patients must be >= 1")
    if not 0.0 < improvement_decay < 1.0:
        raise ValueError("improvement_decay must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    width = len(str(n_patients))
    cohort = []
    for i in range(n_patients):
        start = int(rng.integers(0, enrollment_span_days + 1))
        depth = float(rng.uniform(*depth_range))
        plateau = int(rng.integers(1, 4))
        gap_scans = math.ceil(
            math.log(plateau_threshold / abs(depth)) / math.log(improvement_decay)
        )
        n_improving = int(np.clip(gap_scans, 1, max(1, max_scans - plateau)))
        improving = geometric_trajectory(depth, improvement_decay, n_improving,
                                         noise_sd=noise_sd, rng=rng)
        changes = improving + [improving[-1]] * plateau
        scans = tuple(
            (scan_interval_days * (t + 1), change)
            for t, change in enumerate(changes)
        )
        disc = start + scans[-1][0] + scan_interval_days // 2
        cohort.append(PatientCourse(
            patient_id=f"pt{i + 1:0{width}d}",
            start_day=start,
            scans=scans,
            discontinuation_day=disc,
        ))
    return cohort
