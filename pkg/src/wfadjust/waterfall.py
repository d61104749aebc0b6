"""Waterfall curves and their correspondence with survival step curves.

A waterfall curve is the outline of a waterfall bar chart: bars sorted by
descending percent change, rescaled so the x axis is the patient fraction
in (0, 1]. Rotating a survival curve of z = -(best change) a quarter turn
counterclockwise and reflecting it across the horizontal axis yields
exactly this outline: every survival jump of size s at z becomes a segment
of width s at height -z. The inverse transformation is used for round-trip
checks. Quantile form: W(f) = -inf{z : S(z) <= 1 - f}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interim import InterimDataset
from .survival import StepCurve, enforce_floor

MIN_CHANGE = -100.0


@dataclass(frozen=True, eq=False)
class WaterfallCurve:
    """Piecewise-constant bar outline over patient fractions.

    ``value[i]`` (percent change) holds on ``(fraction_end[i-1],
    fraction_end[i]]``; ``fraction_end`` is strictly increasing and ends at
    exactly 1. Values are non-increasing for curves derived from a valid
    survival curve, but band curves may wiggle, so that is not enforced.
    """

    fraction_end: np.ndarray
    value: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "fraction_end",
                           np.asarray(self.fraction_end, dtype=float))
        object.__setattr__(self, "value", np.asarray(self.value, dtype=float))
        f, v = self.fraction_end, self.value
        if f.shape != v.shape or f.ndim != 1 or not f.size:
            raise ValueError("fraction_end and value must be equal-length 1-d arrays")
        if np.any(np.diff(f) <= 0) or f[0] <= 0:
            raise ValueError("fraction_end must be strictly increasing in (0, 1]")
        if f[-1] != 1.0:
            raise ValueError("last fraction_end must be exactly 1")
        if np.any(v < MIN_CHANGE):
            raise ValueError("values below -100% are impossible")
        if (self.lower is None) != (self.upper is None):
            raise ValueError("bands need both lower and upper")
        if self.lower is not None:
            object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
            object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
            if self.lower.shape != f.shape or self.upper.shape != f.shape:
                raise ValueError("bands must match segments in length")
            if np.any(self.lower > v) or np.any(self.upper < v):
                raise ValueError("bands must bracket the segment values")

    @property
    def has_bands(self) -> bool:
        return self.lower is not None

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.fraction_end, prepend=0.0)

    def value_at(self, f) -> np.ndarray | float:
        """Segment value at fraction ``f`` in [0, 1] (f=0 maps to the first)."""
        idx = np.minimum(
            np.searchsorted(self.fraction_end, f, side="left"),
            self.fraction_end.size - 1,
        )
        return self.value[idx]


def survival_to_waterfall(curve: StepCurve) -> WaterfallCurve:
    """Rotate-and-reverse a floored survival curve into a waterfall curve.

    Every jump of size s at breakpoint z (ascending z) becomes a segment of
    width s at value -z; zero-size jumps produce no segment. The widths
    partition (0, 1], which is why the curve must already reach 0.
    """
    if curve.survival[-1] != 0.0:
        raise ValueError(
            "survival curve does not reach 0; apply enforce_floor first"
        )
    jumps = np.diff(curve.survival, prepend=1.0) * -1.0
    keep = jumps > 0.0
    fraction_end = np.cumsum(jumps[keep])
    fraction_end[-1] = 1.0
    return WaterfallCurve(fraction_end, -curve.z[keep])


def waterfall_to_survival(wf: WaterfallCurve) -> StepCurve:
    """Exact inverse of ``survival_to_waterfall``.

    Requires non-increasing values; adjacent segments with equal value
    collapse into one jump. A segment ending at fraction f becomes the
    breakpoint (z=-value, survival=1-f).
    """
    if np.any(np.diff(wf.value) > 0):
        raise ValueError("waterfall values must be non-increasing in fraction")
    # last index of each run of equal values
    last = np.append(np.flatnonzero(np.diff(wf.value) != 0), wf.value.size - 1)
    survival = 1.0 - wf.fraction_end[last]
    survival[-1] = 0.0
    return StepCurve(-wf.value[last], survival)


def unadjusted_waterfall(dataset: InterimDataset) -> WaterfallCurve:
    """Plain interim waterfall: current best changes as equal-width bars.

    Bars are sorted by descending change (growth leftmost); ties are broken
    by patient_id so the output is stable.
    """
    ordered = sorted(dataset.records, key=lambda r: (r.z, r.patient_id))
    n = len(ordered)
    fraction_end = np.arange(1, n + 1) / n
    fraction_end[-1] = 1.0
    return WaterfallCurve(fraction_end, np.array([-r.z for r in ordered]))


def _first_crossing(z: np.ndarray, values: np.ndarray, target: float,
                    strict: bool) -> float:
    """Smallest breakpoint z where the step function is <= (or <) target."""
    hit = values < target if strict else values <= target
    idx = np.flatnonzero(hit)
    return z[idx[0]] if idx.size else z[-1]


def transform_bands(curve: StepCurve) -> WaterfallCurve:
    """Carry survival confidence bands into waterfall space.

    Both band step functions are floored at z=100 and inverted by first
    crossing. The rotate-and-reverse flips their roles: the survival lower
    band becomes the waterfall upper band and vice versa. Per point-curve
    segment the upper band takes its supremum over the segment and the
    lower band its infimum, so the pair brackets the point curve at every
    fraction.
    """
    if not curve.has_bands:
        raise ValueError("curve has no bands to transform")
    floored = enforce_floor(curve)
    point = survival_to_waterfall(StepCurve(floored.z, floored.survival))

    # The upper band need not be monotone (the variance can outgrow the
    # survival drop); a running minimum leaves every first crossing, and
    # hence the inversion, unchanged while restoring monotonicity.
    lo_vals = np.minimum.accumulate(np.clip(curve.lower, 0.0, 1.0))
    up_vals = np.minimum.accumulate(np.clip(curve.upper, 0.0, 1.0))
    lo = enforce_floor(StepCurve(curve.z, lo_vals))
    up = enforce_floor(StepCurve(curve.z, up_vals))

    starts = np.concatenate(([0.0], point.fraction_end[:-1]))
    wf_upper = np.array([
        -_first_crossing(lo.z, lo.survival, 1.0 - f_start, strict=True)
        for f_start in starts
    ])
    wf_lower = np.array([
        -_first_crossing(up.z, up.survival, 1.0 - f_end, strict=False)
        for f_end in point.fraction_end
    ])
    return WaterfallCurve(point.fraction_end, point.value,
                          lower=wf_lower, upper=wf_upper)
