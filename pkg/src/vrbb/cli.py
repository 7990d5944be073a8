"""Command-line front end.

Exit codes: 0 all runs finished, 2 some runs diverged, 1 configuration
or usage error.
"""

import argparse
import sys
from pathlib import Path

from . import harness
from .data import load_libsvm, ParseError, UnsupportedLabelsError


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="vrbb",
        description="Variance-reduced optimizers with hedged BB step sizes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a suite and write trace CSVs")
    run.add_argument("config")
    run.add_argument("--out", default="traces", help="output directory")
    run.add_argument("--seed", type=int, action="append",
                     help="override suite seeds (repeatable)")
    run.add_argument("--exclude-stepsize-passes", action="store_true",
                     help="do not count curvature batches as effective passes")
    run.add_argument("--jobs", type=int, default=1,
                     help="run (config, seed) pairs in parallel")
    run.add_argument("--emit-plot-data", action="store_true",
                     help="also write two-column plot data files")

    theory = sub.add_parser("theory", help="print the feasibility report")
    theory.add_argument("config")
    theory.add_argument("--eps", type=float, help="target squared-gradient accuracy")
    theory.add_argument("--sigma0", type=float,
                        help="estimate of the initial objective gap")
    theory.add_argument("--zeta", type=float,
                        help="estimate of the initial squared gradient norm")
    theory.add_argument("--csv", help="also write the CSV rows to this path")

    summ = sub.add_parser("summarize", help="rank trace CSVs in a directory")
    summ.add_argument("dir")
    summ.add_argument("--tol", type=float, required=True,
                      help="gradient-norm tolerance")

    check = sub.add_parser("parse-check", help="parse a LIBSVM file and print stats")
    check.add_argument("dataset")
    check.add_argument("--dim", type=int, help="feature dimension override")

    return parser


def _cmd_run(args):
    overrides = {}
    if args.seed:
        overrides["seeds"] = args.seed
    if args.exclude_stepsize_passes:
        overrides["include_stepsize_passes"] = False
    suite = harness.load_config(args.config, overrides=overrides)
    result = harness.run_suite(suite, args.out, jobs=args.jobs)
    if args.emit_plot_data:
        harness.emit_plot_data(result.traces, Path(args.out) / "plot-data")
    for path in result.files:
        print(path)
    if result.n_diverged:
        print(f"{result.n_diverged} run(s) diverged", file=sys.stderr)
        return 2
    return 0


def _cmd_theory(args):
    suite = harness.load_config(args.config)
    text, csv_lines = harness.theory_report(
        suite, eps=args.eps, sigma0=args.sigma0, zeta=args.zeta
    )
    print(text)
    print()
    print("\n".join(csv_lines))
    if args.csv:
        Path(args.csv).write_text("\n".join(csv_lines) + "\n")
    return 0


def _cmd_summarize(args):
    paths = sorted(Path(args.dir).glob("*.csv"))
    if not paths:
        print(f"no trace CSVs found in {args.dir}", file=sys.stderr)
        return 1
    traces = [harness.read_trace_csv(p) for p in paths]
    print(harness.summarize(traces, args.tol).render_text())
    return 0


def _cmd_parse_check(args):
    path = harness.resolve_dataset_path(args.dataset)
    dataset = load_libsvm(path, dim=args.dim)
    nnz = dataset.row_nnz_counts()
    inf_norms = dataset.row_inf_norms()
    pos = int((dataset.z > 0).sum())
    print(f"{path}: n={dataset.n} d={dataset.d}")
    print(f"labels: +1 x {pos}, -1 x {dataset.n - pos}")
    print(f"nnz/row: min={nnz.min()} mean={nnz.mean():.2f} max={nnz.max()}")
    print(
        "inf-norm/row: "
        f"min={inf_norms.min():.6g} mean={inf_norms.mean():.6g} "
        f"max={inf_norms.max():.6g}"
    )
    print(f"empty rows: {int((nnz == 0).sum())}")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "theory": _cmd_theory,
        "summarize": _cmd_summarize,
        "parse-check": _cmd_parse_check,
    }[args.command]
    try:
        return handler(args)
    except (harness.ConfigError, ParseError, UnsupportedLabelsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
