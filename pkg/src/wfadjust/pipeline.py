"""End-to-end adjustment: cut -> event probabilities -> projected waterfall."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interim import InterimDataset, apply_cut
from .multinomial import CategoryPosterior, GibbsConfig, gibbs_sample
from .survival import StepCurve, WeightedObservation, enforce_floor, weighted_km
from .waterfall import (WaterfallCurve, survival_to_waterfall, transform_bands,
                        unadjusted_waterfall)


@dataclass(frozen=True)
class AdjustmentResult:
    dataset: InterimDataset
    posterior: CategoryPosterior
    observations: tuple[WeightedObservation, ...]
    survival: StepCurve            # floored, with bands when ci_level given
    adjusted: WaterfallCurve
    unadjusted: WaterfallCurve


def make_observations(dataset: InterimDataset, event_probs) -> tuple[WeightedObservation, ...]:
    """Pair each patient's z with its event probability, in patient-id order."""
    return tuple(
        WeightedObservation(z=rec.z, p_event=event_probs[rec.patient_id])
        for rec in sorted(dataset.records, key=lambda r: r.patient_id)
    )


def run_adjustment(cohort, cut_day: int, gibbs: GibbsConfig, *,
                   ci_level: float | None = 0.95,
                   filter_enabled: bool = True) -> AdjustmentResult:
    """Full pipeline from a cohort snapshot to adjusted/unadjusted curves."""
    dataset = apply_cut(cohort, cut_day, filter_enabled=filter_enabled)
    posterior = gibbs_sample(dataset, gibbs)
    observations = make_observations(dataset, posterior.event_probs)
    raw = weighted_km(observations, ci_level=ci_level)
    floored = enforce_floor(raw)
    if ci_level is None:
        adjusted = survival_to_waterfall(floored)
    else:
        adjusted = transform_bands(raw)
    return AdjustmentResult(
        dataset=dataset,
        posterior=posterior,
        observations=observations,
        survival=floored,
        adjusted=adjusted,
        unadjusted=unadjusted_waterfall(dataset),
    )
