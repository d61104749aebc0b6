"""Weighted Kaplan-Meier estimation on the tumor-change axis.

The variable is z = negative best tumor size change (percent), not time.
Each patient contributes event mass ``p_event`` and censoring mass
``1 - p_event`` at the same z, equivalent to splitting the patient into an
event pseudo-observation weighted p and a censored one weighted 1 - p.
The product-limit estimator then takes a factor

    1 - (sum of event weights at z) / (count at risk at z)

at every distinct z, where the risk set counts all observations with
z_i >= z (censored pseudo-mass at z stays at risk through z). With every
weight equal to 1 this is the ordinary product-limit estimator.

``scenario_average_oracle`` computes the same curve the slow way: it
enumerates every event/censoring assignment of the fractional-weight
observations, builds the conventional estimator per scenario, and averages
the curves under the scenario probabilities. The two agree to float
precision because the risk sets do not depend on the assignments and the
factors at distinct z involve disjoint assignments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

FLOOR_Z = 100.0  # a tumor cannot shrink below -100%, so z never exceeds 100


@dataclass(frozen=True)
class WeightedObservation:
    """A (z, event weight) pair; z = -(current best change in percent)."""

    z: float
    p_event: float

    def __post_init__(self):
        if not np.isfinite(self.z):
            raise ValueError("z must be finite")
        if not 0.0 <= self.p_event <= 1.0:
            raise ValueError(f"p_event must lie in [0, 1], got {self.p_event}")


@dataclass(frozen=True, eq=False)
class StepCurve:
    """Right-continuous non-increasing step function from 1 down to 0.

    ``survival[i]`` is the value on ``[z[i], z[i+1])``; the value is 1
    before ``z[0]``. ``lower``/``upper`` are optional pointwise bands.
    """

    z: np.ndarray
    survival: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float))
        object.__setattr__(self, "survival", np.asarray(self.survival, dtype=float))
        if self.z.shape != self.survival.shape or self.z.ndim != 1 or not self.z.size:
            raise ValueError("z and survival must be equal-length 1-d arrays")
        if np.any(np.diff(self.z) <= 0):
            raise ValueError("breakpoints must be strictly increasing in z")
        values = np.concatenate(([1.0], self.survival))
        if np.any(np.diff(values) > 0):
            raise ValueError("survival values must be non-increasing from 1")
        if self.survival[-1] < 0 or self.survival[0] > 1:
            raise ValueError("survival values must lie in [0, 1]")
        if (self.lower is None) != (self.upper is None):
            raise ValueError("bands need both lower and upper")
        if self.lower is not None:
            object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
            object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
            if self.lower.shape != self.z.shape or self.upper.shape != self.z.shape:
                raise ValueError("bands must match breakpoints in length")
            if np.any(self.lower > self.survival) or np.any(self.upper < self.survival):
                raise ValueError("bands must bracket the survival values")

    @property
    def has_bands(self) -> bool:
        return self.lower is not None

    def value_at(self, z) -> np.ndarray | float:
        """Evaluate the step function (1 to the left of the first breakpoint)."""
        idx = np.searchsorted(self.z, z, side="right") - 1
        padded = np.concatenate(([1.0], self.survival))
        return padded[idx + 1]


@dataclass(frozen=True)
class KaplanMeierSteps:
    """Counting-process internals of the weighted estimator, per distinct z."""

    z: np.ndarray
    weighted_events: np.ndarray
    at_risk: np.ndarray
    survival: np.ndarray


def km_internals(observations) -> KaplanMeierSteps:
    """Distinct-z event masses, risk-set sizes and the survival products."""
    if not observations:
        raise ValueError("need at least one observation")
    z = np.array([o.z for o in observations], dtype=float)
    p = np.array([o.p_event for o in observations], dtype=float)
    uniq, inverse = np.unique(z, return_inverse=True)
    weighted_events = np.bincount(inverse, weights=p, minlength=uniq.size)
    counts = np.bincount(inverse, minlength=uniq.size)
    at_risk = z.size - (np.cumsum(counts) - counts)
    survival = np.cumprod(1.0 - weighted_events / at_risk)
    return KaplanMeierSteps(uniq, weighted_events, at_risk.astype(float), survival)


def weighted_km(observations, ci_level: float | None = None) -> StepCurve:
    """Weighted product-limit curve; optional Greenwood bands at ``ci_level``."""
    steps = km_internals(observations)
    if ci_level is None:
        return StepCurve(steps.z, steps.survival)
    lower, upper = greenwood_bands(steps, ci_level)
    return StepCurve(steps.z, steps.survival, lower=lower, upper=upper)


def greenwood_bands(steps: KaplanMeierSteps, level: float = 0.95):
    """Pointwise bands from the Greenwood variance with weighted event counts.

    The variance of log-survival is accumulated as
    sum d_w / (R (R - d_w)) over the steps, the interval is formed on the
    log scale and exponentiated, then clamped into [0, 1]. Steps at or past
    risk-set exhaustion (non-finite accumulated variance) fall back to the
    conventional (0, 1) band.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must lie in (0, 1)")
    d, r = steps.weighted_events, steps.at_risk
    denom = r * (r - d)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(denom > 0, d / denom, np.inf)
        var = np.cumsum(terms)
        sd = np.sqrt(var)
        q = norm.ppf(0.5 * (1.0 + level))
        lower = np.clip(steps.survival * np.exp(-q * sd), 0.0, 1.0)
        upper = np.clip(steps.survival * np.exp(q * sd), 0.0, 1.0)
    degenerate = ~np.isfinite(var) | (steps.survival <= 0.0)
    lower[degenerate] = 0.0
    upper[degenerate] = 1.0
    return lower, upper


def scenario_average_oracle(observations, max_fractional: int = 20) -> StepCurve:
    """Average of the conventional estimator over all event/censor scenarios.

    Observations with fractional weight (0 < p < 1) are assigned event or
    censoring status in every combination; each scenario's conventional
    product-limit curve is weighted by prod(p or 1-p). Exponential in the
    number of fractional observations, hence the hard cap.
    """
    if not observations:
        raise ValueError("need at least one observation")
    z = np.array([o.z for o in observations], dtype=float)
    p = np.array([o.p_event for o in observations], dtype=float)
    fractional = np.flatnonzero((p > 0.0) & (p < 1.0))
    m = fractional.size
    if m > max_fractional:
        raise ValueError(
            f"{m} fractional-weight observations would need 2^{m} scenarios; "
            f"refusing above {max_fractional}"
        )

    uniq, inverse = np.unique(z, return_inverse=True)
    counts = np.bincount(inverse, minlength=uniq.size)
    at_risk = z.size - (np.cumsum(counts) - counts)
    # events certain regardless of scenario
    base_events = np.bincount(
        inverse, weights=(p == 1.0).astype(float), minlength=uniq.size
    )

    average = np.zeros(uniq.size)
    total_prob = 0.0
    scenarios = np.arange(2**m)
    for start in range(0, scenarios.size, 4096):
        block = scenarios[start:start + 4096]
        bits = (block[:, None] >> np.arange(m)) & 1  # 1 = event
        probs = np.prod(
            np.where(bits == 1, p[fractional], 1.0 - p[fractional]), axis=1
        )
        events = np.tile(base_events, (block.size, 1))
        for j, obs_idx in enumerate(fractional):
            events[:, inverse[obs_idx]] += bits[:, j]
        curves = np.cumprod(1.0 - events / at_risk, axis=1)
        average += probs @ curves
        total_prob += probs.sum()
    # the scenario probabilities sum to 1 only in exact arithmetic, and the
    # column sums are not bit-monotone; renormalize and guard by an ulp
    average = np.minimum.accumulate(np.clip(average / total_prob, 0.0, 1.0))
    return StepCurve(uniq, average)


def enforce_floor(curve: StepCurve) -> StepCurve:
    """Force the curve to reach 0 by z = 100 (-fBTSC cannot exceed 100).

    If the terminal value is positive, a breakpoint (100, 0) is appended
    (bands forced to (0, 0) there); curves already at 0 pass through
    unchanged. Idempotent, and never alters values at z < 100.
    """
    if curve.survival[-1] <= 0.0:
        return curve
    if curve.z[-1] >= FLOOR_Z:
        z = curve.z
        survival = np.concatenate((curve.survival[:-1], [0.0]))
        keep = slice(None, -1)
    else:
        z = np.concatenate((curve.z, [FLOOR_Z]))
        survival = np.concatenate((curve.survival, [0.0]))
        keep = slice(None)
    if not curve.has_bands:
        return StepCurve(z, survival)
    lower = np.concatenate((curve.lower[keep], [0.0]))
    upper = np.concatenate((curve.upper[keep], [0.0]))
    return StepCurve(z, survival, lower=lower, upper=upper)
