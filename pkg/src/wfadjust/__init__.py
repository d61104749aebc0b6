"""Follow-up adjustment for oncology waterfall plots.

Interim waterfall plots understate the response of patients who are still
on treatment. This package estimates each ongoing patient's probability of
further improvement with an incomplete multinomial model (EM maximum
likelihood and a conjugate Gibbs sampler), feeds those probabilities into
a weighted Kaplan-Meier estimator of the negative best tumor size change,
and rotates the resulting curve into the projected long-follow-up
waterfall plot.
"""

from .errors import InputDataError, NoEvaluablePatientsError
from .interim import (InterimDataset, InterimRecord, PatientCourse, apply_cut,
                      best_change, candidate_scans, filter_pass)
from .multinomial import (CategoryPosterior, GibbsConfig, em_mle,
                          event_probability, gibbs_sample, log_likelihood)
from .pipeline import AdjustmentResult, make_observations, run_adjustment
from .plotting import render_waterfall
from .replication import (Replicate, ReplicationConfig, ReplicationResult,
                          geometric_trajectory, ground_truth_curve,
                          run_replications, shuffle_starts, synthesize_cohort)
from .survival import (KaplanMeierSteps, StepCurve, WeightedObservation,
                       enforce_floor, greenwood_bands, km_internals,
                       scenario_average_oracle, weighted_km)
from .waterfall import (WaterfallCurve, survival_to_waterfall, transform_bands,
                        unadjusted_waterfall, waterfall_to_survival)

__version__ = "0.1.0"

__all__ = [
    "AdjustmentResult",
    "CategoryPosterior",
    "GibbsConfig",
    "InputDataError",
    "InterimDataset",
    "InterimRecord",
    "KaplanMeierSteps",
    "NoEvaluablePatientsError",
    "PatientCourse",
    "Replicate",
    "ReplicationConfig",
    "ReplicationResult",
    "StepCurve",
    "WaterfallCurve",
    "WeightedObservation",
    "apply_cut",
    "best_change",
    "candidate_scans",
    "em_mle",
    "enforce_floor",
    "event_probability",
    "filter_pass",
    "geometric_trajectory",
    "gibbs_sample",
    "greenwood_bands",
    "ground_truth_curve",
    "km_internals",
    "log_likelihood",
    "make_observations",
    "render_waterfall",
    "run_adjustment",
    "run_replications",
    "scenario_average_oracle",
    "shuffle_starts",
    "survival_to_waterfall",
    "synthesize_cohort",
    "transform_bands",
    "unadjusted_waterfall",
    "waterfall_to_survival",
    "weighted_km",
]
