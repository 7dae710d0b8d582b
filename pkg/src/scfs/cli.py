"""Command-line harness.

Subcommands: ``cluster`` runs the pipeline on a CSV matrix, ``synth``
writes a synthetic data set, ``eval`` scores predicted against true
labels, ``experiment`` executes a Monte Carlo grid from a JSON config.

Exit codes: 0 ok, 2 I/O or parse failure, 3 invalid generator settings,
4 evaluation mismatch, 5 config error, 6 numerical failure.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import experiments
from .errors import (
    ConfigError,
    CsvFormatError,
    DimensionError,
    DomainError,
    GenerationError,
    NumericalError,
    ScfsError,
)
from .matrix_core import read_matrix_csv, write_matrix_csv
from .feature_select import scores_to_csv
from .pipeline import (
    PipelineConfig,
    read_labels_csv,
    report_to_text,
    run_scfs,
    write_labels_csv,
)
from .metrics import evaluate
from .synthgen import SynthSpec, generate_data, samples_for_log_ratio

EXIT_OK = 0
EXIT_IO = 2
EXIT_SPEC = 3
EXIT_EVAL = 4
EXIT_CONFIG = 5
EXIT_NUMERICAL = 6


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_cluster(args) -> int:
    try:
        data = read_matrix_csv(args.input)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read {args.input}: {exc}")
    except CsvFormatError as exc:
        return _fail(EXIT_IO, str(exc))

    k = "auto" if args.k == "auto" else None
    if k is None:
        try:
            k = int(args.k)
        except ValueError:
            return _fail(EXIT_CONFIG, f'--k must be an integer or "auto", got {args.k!r}')
    cfg = PipelineConfig(
        k=k,
        tau=args.tau,
        iterations=args.iterations,
        restarts=args.restarts,
        max_iter=args.max_iter,
        seed=args.seed,
        variant=args.variant,
        fallback_top_m=args.fallback_top_m,
    )
    try:
        cfg.validate()
    except DomainError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    try:
        report = run_scfs(data, cfg)
    except NumericalError as exc:
        return _fail(EXIT_NUMERICAL, str(exc))
    except ScfsError as exc:
        return _fail(EXIT_CONFIG, str(exc))

    try:
        if args.out_labels:
            write_labels_csv(args.out_labels, report.labels)
        if args.out_scores:
            scores_to_csv(report.scores, args.out_scores)
        if args.out_report:
            with open(args.out_report, "w", encoding="utf-8") as fh:
                fh.write(f"variant = {cfg.variant}\n")
                fh.write(f"tau = {cfg.tau!r}\n")
                fh.write(report_to_text(report))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write output: {exc}")

    fallback = " (fallback selection)" if report.diagnostics.get("fallback_engaged") else ""
    print(
        f"clustered n={data.rows} p={data.cols} into k={report.k_used} "
        f"[{cfg.variant}] with {report.selected.size} features{fallback}"
    )
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        if args.n is not None:
            n = args.n
        elif args.n_over_logp is not None:
            n = samples_for_log_ratio(args.n_over_logp, args.p)
        else:
            return _fail(EXIT_SPEC, "one of --n or --n-over-logp is required")
        spec = SynthSpec(
            k=args.k, n=n, p=args.p, s=args.s, sigma_k=args.sigma_k,
            noise=args.noise, seed=args.seed, assignment=args.assignment,
        )
        data, labels, support = generate_data(spec)
    except (DomainError, DimensionError, GenerationError) as exc:
        return _fail(EXIT_SPEC, str(exc))

    try:
        if args.out_data:
            write_matrix_csv(args.out_data, data.values)
        if args.out_labels:
            write_labels_csv(args.out_labels, labels)
        if args.out_support:
            write_labels_csv(args.out_support, support)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write output: {exc}")
    print(f"generated n={spec.n} p={spec.p} s={spec.s} k={spec.k} noise={spec.noise}")
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        truth = read_labels_csv(args.truth)
        pred = read_labels_csv(args.pred)
        true_support = read_labels_csv(args.truth_support) if args.truth_support else None
        est_support = read_labels_csv(args.pred_support) if args.pred_support else None
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read labels: {exc}")
    except (DomainError, CsvFormatError) as exc:
        return _fail(EXIT_IO, str(exc))
    try:
        report = evaluate(truth, pred, true_support, est_support)
    except ScfsError as exc:
        return _fail(EXIT_EVAL, str(exc))
    sys.stdout.write(report.to_text())
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(report.to_csv())
        except OSError as exc:
            return _fail(EXIT_IO, f"cannot write output: {exc}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read {args.config}: {exc}")
    except json.JSONDecodeError as exc:
        return _fail(EXIT_CONFIG, f"{args.config}: invalid JSON: {exc}")
    try:
        rows, columns = experiments.run_experiment(cfg, jobs=args.jobs)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    except NumericalError as exc:
        return _fail(EXIT_NUMERICAL, str(exc))
    except ScfsError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    try:
        experiments.rows_to_csv(rows, columns, args.out)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {args.out}: {exc}")
    print(f"wrote {len(rows)} result rows to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scfs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cluster", help="run the pipeline on a CSV matrix")
    c.add_argument("--input", required=True, help="numeric CSV, one sample per row")
    c.add_argument("--k", default="auto", help='cluster count or "auto"')
    c.add_argument("--variant", choices=("scfs1", "scfs2"), default="scfs2")
    c.add_argument("--tau", type=float, default=0.9, help="selection threshold")
    c.add_argument("--iterations", type=int, default=None,
                   help="refinement iterations (default ceil(4 ln n))")
    c.add_argument("--restarts", type=int, default=10)
    c.add_argument("--max-iter", type=int, default=100)
    c.add_argument("--fallback-top-m", type=int, default=None,
                   help="features kept when the threshold selects none (default 5%% of p)")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out-labels", default=None)
    c.add_argument("--out-scores", default=None)
    c.add_argument("--out-report", default=None)
    c.set_defaults(func=cmd_cluster)

    g = sub.add_parser("synth", help="generate a synthetic data set")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--n-over-logp", type=float, default=None,
                   help="derive n as ceil(ratio * ln p)")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--s", type=int, required=True)
    g.add_argument("--sigma-k", type=float, required=True)
    g.add_argument("--noise", choices=("gaussian", "t2", "none"), default="gaussian")
    g.add_argument("--assignment", choices=("uniform", "balanced"), default="uniform")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-data", default=None)
    g.add_argument("--out-labels", default=None)
    g.add_argument("--out-support", default=None)
    g.set_defaults(func=cmd_synth)

    e = sub.add_parser("eval", help="evaluate predicted labels against the truth")
    e.add_argument("--truth", required=True)
    e.add_argument("--pred", required=True)
    e.add_argument("--truth-support", default=None)
    e.add_argument("--pred-support", default=None)
    e.add_argument("--out", default=None, help="also write the report as CSV")
    e.set_defaults(func=cmd_eval)

    x = sub.add_parser("experiment", help="run a Monte Carlo grid from a JSON config")
    x.add_argument("--config", required=True)
    x.add_argument("--out", required=True, help="result CSV path")
    x.add_argument("--jobs", type=int, default=None,
                   help="parallel workers (default: SCFS_JOBS or CPU count)")
    x.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
