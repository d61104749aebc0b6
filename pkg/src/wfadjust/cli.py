"""Command-line interface.

Subcommands: adjust, estimate, km, replicate, simulate, plot. All
randomness flows from the single --seed flag; identical invocations
produce byte-identical output trees. Exit codes: 0 success, 2 bad input
or configuration, 3 no evaluable patients at the cut.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .errors import InputDataError, NoEvaluablePatientsError
from .interim import apply_cut
from .multinomial import GibbsConfig, em_mle, gibbs_sample
from .pipeline import run_adjustment
from .plotting import render_waterfall
from .replication import (GROUND_TRUTH_CHOICES, ReplicationConfig,
                          run_replications, synthesize_cohort)

logger = logging.getLogger(__name__)


def _add_input_options(sub, with_gibbs=True):
    sub.add_argument("--patients", required=True, help="patients.csv path")
    sub.add_argument("--scans", required=True, help="scans.csv path")
    sub.add_argument("--cut-day", type=int, required=True,
                     help="calendar day of the interim data cut")
    sub.add_argument("--no-filter", action="store_true",
                     help="treat every ongoing patient as able to improve")
    if with_gibbs:
        sub.add_argument("--seed", type=int, default=0)
        sub.add_argument("--iterations", type=int, default=50_000)
        sub.add_argument("--burn-in", type=int, default=5_000)


def _add_axis_options(sub):
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--fractions", action="store_true", default=True,
                       help="x axis as patient fraction (default)")
    group.add_argument("--counts", action="store_true",
                       help="x axis as patient counts")


def _gibbs_config(args) -> GibbsConfig:
    return GibbsConfig(iterations=args.iterations, burn_in=args.burn_in,
                       seed=args.seed)


def _check_ci(level):
    if level is not None and not 0.0 < level < 1.0:
        raise ValueError(f"--ci-level must lie in (0, 1), got {level}")
    return level


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_adjust(args) -> int:
    cohort = io.load_cohort(args.patients, args.scans)
    result = run_adjustment(
        cohort, args.cut_day, _gibbs_config(args),
        ci_level=_check_ci(args.ci_level),
        filter_enabled=not args.no_filter,
    )
    out = _outdir(args)
    io.write_interim(result.dataset, result.posterior.event_probs,
                     out / "interim.csv")
    io.write_theta(result.posterior.mean_theta, result.posterior.theta_variance,
                   out / "theta.csv")
    io.write_event_probs(result.posterior.event_probs, out / "event_probs.csv")
    io.write_survival_curve(result.survival, out / "survival.csv")
    io.write_waterfall_curve(result.adjusted, out / "waterfall_adjusted.csv")
    io.write_waterfall_curve(result.unadjusted, out / "waterfall_unadjusted.csv")
    if args.svg:
        svg = render_waterfall(
            [result.adjusted, result.unadjusted],
            ["adjusted", "unadjusted"],
            n_patients=result.dataset.n if args.counts else None,
        )
        (out / "waterfall.svg").write_text(svg, encoding="utf-8")
    print(f"adjust: {result.dataset.n} patients, K={result.dataset.k}, "
          f"outputs in {out}")
    return 0


def _cmd_estimate(args) -> int:
    cohort = io.load_cohort(args.patients, args.scans)
    dataset = apply_cut(cohort, args.cut_day, filter_enabled=not args.no_filter)
    posterior = gibbs_sample(dataset, _gibbs_config(args))
    mle = em_mle(dataset)
    out = _outdir(args)
    io.write_theta(posterior.mean_theta, posterior.theta_variance,
                   out / "theta.csv")
    io.write_theta_mle(mle, out / "theta_mle.csv")
    io.write_event_probs(posterior.event_probs, out / "event_probs.csv")
    print(f"estimate: {dataset.n} patients, K={dataset.k}, outputs in {out}")
    return 0


def _cmd_km(args) -> int:
    cohort = io.load_cohort(args.patients, args.scans)
    result = run_adjustment(
        cohort, args.cut_day, _gibbs_config(args),
        ci_level=_check_ci(args.ci_level),
        filter_enabled=not args.no_filter,
    )
    out = _outdir(args)
    io.write_survival_curve(result.survival, out / "survival.csv")
    print(f"km: {result.dataset.n} patients, outputs in {out}")
    return 0


def _cmd_replicate(args) -> int:
    cohort = io.load_cohort(args.patients, args.scans)
    config = ReplicationConfig(
        n_replicates=args.replicates,
        base_seed=args.seed,
        cut_day=args.cut_day,
        gibbs=_gibbs_config(args),
        filter_enabled=not args.no_filter,
        ground_truth=args.truth,
        ci_level=_check_ci(args.ci_level),
    )
    result = run_replications(cohort, config)
    out = _outdir(args)

    with (out / "summary.csv").open("w", encoding="utf-8") as fh:
        fh.write("fraction,mean_adj_dev,mean_unadj_dev,n_effective\n")
        for i, f in enumerate(result.fractions):
            fh.write(f"{float(f)!r},{float(result.mean_adjusted_dev[i])!r},"
                     f"{float(result.mean_unadjusted_dev[i])!r},"
                     f"{result.n_effective}\n")
    with (out / "skipped.csv").open("w", encoding="utf-8") as fh:
        fh.write("replicate,seed\n")
        for rep in result.replicates:
            if rep.skipped:
                fh.write(f"{rep.index},{rep.seed}\n")
    if result.truth is not None:
        io.write_waterfall_curve(result.truth, out / "ground_truth.csv")
    width = len(str(config.n_replicates))
    for rep in result.replicates:
        if rep.skipped:
            continue
        stem = f"replicate_{rep.index:0{width}d}"
        io.write_waterfall_curve(rep.adjusted, out / f"{stem}_adjusted.csv")
        io.write_waterfall_curve(rep.unadjusted, out / f"{stem}_unadjusted.csv")
        if rep.truth is not None:
            io.write_waterfall_curve(rep.truth, out / f"{stem}_truth.csv")

    if args.svg:
        for kind in ("adjusted", "unadjusted"):
            curves = [getattr(r, kind) for r in result.replicates if not r.skipped]
            labels = [f"{kind} replicates"] + [""] * (len(curves) - 1)
            emphasize = None
            if result.truth is not None:
                curves = curves + [result.truth]
                labels = labels[:len(curves) - 1] + ["ground truth"]
                emphasize = len(curves) - 1
            svg = render_waterfall(curves, labels, emphasize=emphasize,
                                   title=f"{kind} waterfall curves")
            (out / f"replicates_{kind}.svg").write_text(svg, encoding="utf-8")
    print(f"replicate: {result.n_effective}/{config.n_replicates} effective, "
          f"outputs in {out}")
    return 0


def _cmd_simulate(args) -> int:
    cohort = synthesize_cohort(
        args.n_patients,
        scan_interval_days=args.scan_interval,
        max_scans=args.max_scans,
        improvement_decay=args.decay,
        seed=args.seed,
        noise_sd=args.noise_sd,
    )
    out = _outdir(args)
    io.write_cohort(cohort, out / "patients.csv", out / "scans.csv")
    print(f"simulate: {len(cohort)} patients, outputs in {out}")
    return 0


def _cmd_plot(args) -> int:
    curves = [io.read_waterfall_curve(path) for path in args.curves]
    labels = args.labels.split(",") if args.labels else None
    n_patients = args.n_patients if args.counts else None
    if args.counts and n_patients is None:
        raise ValueError("--counts needs --n-patients when plotting from CSV")
    svg = render_waterfall(curves, labels, n_patients=n_patients,
                           emphasize=args.emphasize)
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"plot: wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfadjust",
        description="Project interim oncology waterfall plots to long "
                    "follow-up via weighted Kaplan-Meier adjustment.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("adjust", help="full adjustment pipeline")
    _add_input_options(p)
    p.add_argument("--ci-level", type=float, default=0.95)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true", help="also render waterfall.svg")
    _add_axis_options(p)
    p.set_defaults(func=_cmd_adjust)

    p = sub.add_parser("estimate", help="category probabilities and event probabilities")
    _add_input_options(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("km", help="weighted Kaplan-Meier curve only")
    _add_input_options(p)
    p.add_argument("--ci-level", type=float, default=0.95)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_km)

    p = sub.add_parser("replicate", help="shuffled-enrollment validation runs")
    _add_input_options(p)
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--truth", choices=GROUND_TRUTH_CHOICES, default="all",
                   help="ground-truth subset: all patients or enrolled-at-cut")
    p.add_argument("--ci-level", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true",
                   help="render replicate overlay figures")
    p.set_defaults(func=_cmd_replicate)

    p = sub.add_parser("simulate", help="write a synthetic cohort")
    p.add_argument("--n-patients", type=int, required=True)
    p.add_argument("--scan-interval", type=int, default=42)
    p.add_argument("--max-scans", type=int, default=8)
    p.add_argument("--decay", type=float, default=0.5)
    p.add_argument("--noise-sd", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("plot", help="render waterfall curve CSVs to SVG")
    p.add_argument("curves", nargs="+", help="waterfall curve CSV files")
    p.add_argument("--labels", help="comma-separated curve labels")
    p.add_argument("--emphasize", type=int, default=None,
                   help="index of a curve to draw bold (e.g. ground truth)")
    p.add_argument("--n-patients", type=int, default=None)
    p.add_argument("--out", required=True, help="output SVG path")
    _add_axis_options(p)
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputDataError as exc:
        logger.error("input error: %s", exc)
        return 2
    except NoEvaluablePatientsError as exc:
        logger.error("%s", exc)
        return 3
    except ValueError as exc:
        logger.error("configuration error: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
