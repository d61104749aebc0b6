"""Incomplete multinomial model for the final best-scan category.

Each patient reveals only a set S of categories containing the scan at
which the final best change will occur; the likelihood for the category
probabilities theta is the product over patients of the candidate-set
masses sum_{k in S_i} theta_k. Two estimators are provided:

* ``em_mle``       deterministic fixed-point (EM) maximum likelihood,
* ``gibbs_sample`` Bayesian posterior with a conjugate Dirichlet prior:
  alternately impute each eligible patient's latent category from its
  candidate set (proportional to theta) and redraw theta from the
  Dirichlet updated with the completed counts.

From either theta estimate, ``event_probability`` gives the chance that a
patient's current best is already final: theta_u / sum_{k in S} theta_k.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .interim import InterimDataset, InterimRecord

logger = logging.getLogger(__name__)

SHORT_CHAIN = 1000  # retained draws below this trigger a warning


@dataclass(frozen=True)
class GibbsConfig:
    """Sampler budget and reproducibility knobs.

    ``prior_alpha=None`` means a flat Dirichlet(1, ..., 1) prior. The chain
    is fully determined by ``seed``.
    """

    iterations: int = 50_000
    burn_in: int = 5_000
    seed: int = 0
    prior_alpha: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.iterations <= 0:
            raise ValueError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must satisfy 0 <= burn_in < iterations")
        if self.iterations - self.burn_in < 100:
            raise ValueError("need at least 100 post-burn-in iterations")
        if self.prior_alpha is not None and any(a <= 0 for a in self.prior_alpha):
            raise ValueError("prior_alpha entries must be positive")


@dataclass(frozen=True)
class CategoryPosterior:
    """Posterior summary over the K scan categories.

    ``event_probs`` maps patient_id to the posterior mean of
    theta_u / sum_{k in S} theta_k (averaged per retained draw); the
    censoring probability is its complement. Singleton candidate sets give
    exactly 1.
    """

    mean_theta: np.ndarray
    theta_variance: np.ndarray
    event_probs: dict[str, float]
    n_retained: int


def _candidate_matrix(dataset: InterimDataset) -> np.ndarray:
    """(n, K) boolean membership matrix of the candidate sets."""
    m = np.zeros((dataset.n, dataset.k), dtype=bool)
    for i, rec in enumerate(dataset.records):
        for cat in rec.candidate_set:
            m[i, cat - 1] = True
    return m


def log_likelihood(theta, dataset: InterimDataset) -> float:
    """Log of prod_i sum_{k in S_i} theta_k; -inf on zero candidate mass."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (dataset.k,):
        raise ValueError(
            f"theta has {theta.shape[0] if theta.ndim == 1 else theta.shape} "
            f"entries, dataset has K={dataset.k} categories"
        )
    masses = _candidate_matrix(dataset) @ theta
    if np.any(masses <= 0.0):
        return float("-inf")
    return float(np.log(masses).sum())


def em_mle(dataset: InterimDataset, tol: float = 1e-12,
           max_iter: int = 100_000) -> np.ndarray:
    """Maximum-likelihood category probabilities by EM fixed-point iteration.

    Update: theta_k <- (1/n) sum_i theta_k 1{k in S_i} / sum_{l in S_i} theta_l.
    The likelihood is concave in theta, so the fixed point is the global
    maximum. Stops when no coordinate moves by more than ``tol``.
    """
    member = _candidate_matrix(dataset)
    absent = ~member.any(axis=0)
    if absent.any():
        cats = [i + 1 for i in np.flatnonzero(absent)]
        logger.warning(
            "categories %s appear in no candidate set; their MLE is 0", cats
        )
    theta = np.full(dataset.k, 1.0 / dataset.k)
    for _ in range(max_iter):
        weights = member * theta
        weights /= weights.sum(axis=1, keepdims=True)
        new_theta = weights.mean(axis=0)
        delta = np.abs(new_theta - theta).max()
        theta = new_theta
        if delta < tol:
            break
    return theta


def event_probability(theta, record: InterimRecord) -> float:
    """P(current best is final) = theta_u / sum_{k in S} theta_k."""
    theta = np.asarray(theta, dtype=float)
    cats = sorted(record.candidate_set)
    if record.u not in record.candidate_set:
        raise ValueError(
            f"patient {record.patient_id!r}: u={record.u} not in candidate set"
        )
    if max(cats) > theta.shape[0]:
        raise ValueError("candidate set references a category beyond theta")
    mass = theta[[c - 1 for c in cats]].sum()
    if mass <= 0.0:
        raise ValueError(
            f"patient {record.patient_id!r}: zero probability mass on "
            f"candidate set {sorted(record.candidate_set)}"
        )
    return float(theta[record.u - 1] / mass)


def gibbs_sample(dataset: InterimDataset, config: GibbsConfig) -> CategoryPosterior:
    """Posterior for theta via data augmentation with a Dirichlet prior.

    Per iteration the latent final-best category of every eligible patient
    is drawn from its candidate set with probability proportional to the
    current theta (patients sharing a candidate set are drawn together as
    one multinomial, which is distributionally identical); discontinued or
    filtered patients stay fixed at their observed best scan. theta is then
    redrawn from Dirichlet(prior + completed counts). Runs are bit-identical
    for identical inputs and seed.
    """
    k = dataset.k
    if config.prior_alpha is None:
        alpha = np.ones(k)
    else:
        alpha = np.asarray(config.prior_alpha, dtype=float)
        if alpha.shape != (k,):
            raise ValueError(
                f"prior_alpha has {alpha.shape[0]} entries, need K={k}"
            )

    fixed = np.zeros(k)
    groups: dict[tuple[int, ...], int] = {}
    for rec in dataset.records:
        if rec.eligible and len(rec.candidate_set) > 1:
            key = tuple(sorted(rec.candidate_set))
            groups[key] = groups.get(key, 0) + 1
        else:
            fixed[rec.u - 1] += 1
    group_list = [(np.array(cats) - 1, count)
                  for cats, count in sorted(groups.items())]

    n_retained = config.iterations - config.burn_in
    if n_retained < SHORT_CHAIN:
        logger.warning(
            "short chain: only %d retained draws; estimates will be noisy",
            n_retained,
        )

    rng = np.random.default_rng(config.seed)
    theta = np.full(k, 1.0 / k)
    draws = np.empty((n_retained, k))
    for ite in range(config.iterations):
        counts = fixed.copy()
        for idx, m in group_list:
            probs = theta[idx]
            counts[idx] += rng.multinomial(m, probs / probs.sum())
        theta = rng.dirichlet(alpha + counts)
        if ite >= config.burn_in:
            draws[ite - config.burn_in] = theta

    event_probs = {}
    for rec in dataset.records:
        if len(rec.candidate_set) == 1:
            event_probs[rec.patient_id] = 1.0
        else:
            idx = np.array(sorted(rec.candidate_set)) - 1
            ratios = draws[:, rec.u - 1] / draws[:, idx].sum(axis=1)
            event_probs[rec.patient_id] = float(ratios.mean())

    return CategoryPosterior(
        mean_theta=draws.mean(axis=0),
        theta_variance=draws.var(axis=0, ddof=1),
        event_probs=event_probs,
        n_retained=n_retained,
    )
