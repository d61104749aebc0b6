"""Acceptance gate: the binding exit criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Each check uses the tolerance stated with it; derived expectations
come from independent oracles (exact rational evaluation, enumeration,
closed-form Dirichlet mixtures) rather than from the code under test.
"""

import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from wfadjust import (GibbsConfig, ReplicationConfig, StepCurve,
                      WeightedObservation, em_mle, enforce_floor,
                      event_probability, gibbs_sample, run_replications,
                      scenario_average_oracle, survival_to_waterfall,
                      synthesize_cohort, waterfall_to_survival, weighted_km)
from wfadjust.cli import main

from conftest import TOY_CUT_DAY, toy_courses
from test_multinomial import exact_posterior
from test_survival import TOY_OBSERVATIONS, conventional_km_oracle, \
    random_observations
from test_waterfall import random_dyadic_curve, toy_exact_segments
from wfadjust import apply_cut


def report(number, name, ok):
    print(f"criterion {number} [{'PASS' if ok else 'FAIL'}] {name}", flush=True)
    assert ok, f"criterion {number} failed: {name}"


def test_criterion_1_toy_mle_and_event_probability():
    dataset = apply_cut(toy_courses(), TOY_CUT_DAY)
    start = time.perf_counter()
    theta = em_mle(dataset)
    elapsed = time.perf_counter() - start
    by_id = {r.patient_id: r for r in dataset.records}
    ok = (
        np.abs(theta - np.array([1 / 6, 1 / 6, 1 / 3, 1 / 3])).max() < 1e-9
        and abs(event_probability(theta, by_id["p2"]) - 0.5) < 1e-9
        and abs(event_probability(theta, by_id["p4"]) - 0.5) < 1e-9
        and elapsed < 1.0
    )
    report(1, f"toy MLE (1/6,1/6,1/3,1/3) and p=1/2 in {elapsed:.3f}s", ok)


def test_criterion_2_gibbs_posterior():
    dataset = apply_cut(toy_courses(), TOY_CUT_DAY)
    config = GibbsConfig(iterations=50_000, burn_in=5_000, seed=7)
    start = time.perf_counter()
    post = gibbs_sample(dataset, config)
    elapsed = time.perf_counter() - start
    mean_exact, ratio_exact = exact_posterior(dataset)
    oracle_ok = (
        np.abs(mean_exact - np.array([0.2, 0.2, 0.3, 0.3])).max() < 1e-12
        and abs(ratio_exact(3, {3, 4}) - 0.5) < 1e-12
    )
    ok = (
        oracle_ok
        and np.abs(post.mean_theta - np.array([0.2, 0.2, 0.3, 0.3])).max() <= 0.01
        and abs(post.event_probs["p2"] - 0.5) <= 0.01
        and abs(post.event_probs["p4"] - 0.5) <= 0.01
        and elapsed < 10.0
    )
    report(2, f"Gibbs mean theta ~(0.2,0.2,0.3,0.3), p~0.5 in {elapsed:.2f}s", ok)


def test_criterion_3_weighted_km_exactness():
    curve = weighted_km(TOY_OBSERVATIONS)
    exact = []
    running = Fraction(1)
    for f in (Fraction(5, 6), Fraction(9, 10), Fraction(3, 4),
              Fraction(5, 6), Fraction(1, 2), Fraction(0)):
        running *= f
        exact.append(float(running))
    oracle = scenario_average_oracle(TOY_OBSERVATIONS)
    ok = (
        np.abs(curve.survival - np.array(exact)).max() <= 1e-12
        and np.array_equal(curve.z, oracle.z)
        and np.abs(curve.survival - oracle.survival).max() <= 1e-12
    )
    report(3, "toy weighted KM equals hand products and 4-scenario average", ok)


def test_criterion_4_scenario_average_equivalence():
    rng = np.random.default_rng(104)
    tie_grid = np.arange(-80.0, 81.0, 10.0)
    start = time.perf_counter()
    worst = 0.0
    for trial in range(500):
        obs = random_observations(rng, tie_grid=tie_grid if trial % 2 else None)
        km = weighted_km(obs)
        oracle = scenario_average_oracle(obs)
        worst = max(worst, float(np.abs(km.survival - oracle.survival).max()))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 60.0
    report(4, f"500 random instances agree to {worst:.2e} in {elapsed:.1f}s", ok)


def test_criterion_5_conventional_km_reduction():
    rng = np.random.default_rng(105)
    ok = True
    for _ in range(1000):
        n = int(rng.integers(1, 12))
        z = np.round(rng.uniform(-90, 90, size=n), 1)
        curve = weighted_km([WeightedObservation(float(v), 1.0) for v in z])
        oz, os_ = conventional_km_oracle(list(z), [True] * n)
        ok = ok and np.array_equal(curve.z, oz) and \
            np.array_equal(curve.survival, os_)
    report(5, "all-event curves equal an independent product-limit, exactly", ok)


def test_criterion_6_transformation_round_trip():
    rng = np.random.default_rng(106)
    ok = True
    for _ in range(1000):
        curve = random_dyadic_curve(rng)
        back = waterfall_to_survival(survival_to_waterfall(curve))
        ok = ok and np.array_equal(back.z, curve.z) and \
            np.array_equal(back.survival, curve.survival)

    wf = survival_to_waterfall(enforce_floor(weighted_km(TOY_OBSERVATIONS)))
    widths_exact, values_exact = toy_exact_segments()
    ok = (
        ok
        and np.abs(wf.widths - widths_exact).max() <= 1e-12
        and np.array_equal(wf.value, values_exact)
        and abs(wf.widths.sum() - 1.0) <= 1e-12
    )
    report(6, "1000 exact round trips; toy segments match derived values", ok)


def test_criterion_7_bias_reduction():
    cohort = synthesize_cohort(40, seed=11)
    config = ReplicationConfig(
        n_replicates=100, base_seed=1000, cut_day=390,
        gibbs=GibbsConfig(iterations=2_000, burn_in=500, seed=17),
    )
    start = time.perf_counter()
    result = run_replications(cohort, config)
    elapsed = time.perf_counter() - start
    tail = result.fractions >= 0.75
    unadj = float(result.mean_unadjusted_dev[tail].mean())
    adj = float(result.mean_adjusted_dev[tail].mean())
    ok = (
        result.n_effective == 100
        and unadj > 0.0
        and abs(adj) < abs(unadj)
        and elapsed < 300.0
    )
    report(7, f"tail bias: unadjusted {unadj:+.2f} vs adjusted {adj:+.2f} "
              f"({elapsed:.0f}s)", ok)


def test_criterion_8_floor_rule():
    rng = np.random.default_rng(108)
    ok = True
    for _ in range(100):
        obs = random_observations(rng)
        deepest = max(range(len(obs)), key=lambda i: obs[i].z)
        obs[deepest] = WeightedObservation(obs[deepest].z,
                                           float(rng.uniform(0.0, 0.99)))
        floored = enforce_floor(weighted_km(obs))
        ok = (
            ok
            and floored.z[-1] == 100.0
            and floored.survival[-1] == 0.0
            and np.array_equal(enforce_floor(floored).survival, floored.survival)
        )
    report(8, "curves with censored deepest patient end at (100, 0)", ok)


def test_criterion_9_byte_identical_runs(tmp_path):
    from wfadjust.io import write_cohort

    def tree(root):
        return {p.relative_to(root).as_posix(): p.read_bytes()
                for p in sorted(Path(root).rglob("*")) if p.is_file()}

    write_cohort(toy_courses(), tmp_path / "patients.csv", tmp_path / "scans.csv")
    adjust_args = [
        "adjust", "--patients", str(tmp_path / "patients.csv"),
        "--scans", str(tmp_path / "scans.csv"), "--cut-day", str(TOY_CUT_DAY),
        "--seed", "7", "--iterations", "5000", "--burn-in", "500", "--svg",
    ]
    assert main(adjust_args + ["--out", str(tmp_path / "adj_a")]) == 0
    assert main(adjust_args + ["--out", str(tmp_path / "adj_b")]) == 0

    sim = tmp_path / "sim"
    assert main(["simulate", "--n-patients", "15", "--seed", "2",
                 "--out", str(sim)]) == 0
    replicate_args = [
        "replicate", "--patients", str(sim / "patients.csv"),
        "--scans", str(sim / "scans.csv"), "--cut-day", "380",
        "--seed", "5", "--iterations", "500", "--burn-in", "150",
        "--replicates", "5", "--svg",
    ]
    assert main(replicate_args + ["--out", str(tmp_path / "rep_a")]) == 0
    assert main(replicate_args + ["--out", str(tmp_path / "rep_b")]) == 0

    ok = (
        tree(tmp_path / "adj_a") == tree(tmp_path / "adj_b")
        and tree(tmp_path / "rep_a") == tree(tmp_path / "rep_b")
    )
    report(9, "adjust and replicate reruns are byte-identical", ok)
