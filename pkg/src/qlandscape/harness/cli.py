"""Command-line interface for running sweeps and verification suites.

Exit codes: 0 success, 1 an acceptance-style check failed, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .fits import filter_rows, fit_rows
from .sweep import read_rows, run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlandscape",
        description="Variational-circuit landscape statistics: sweeps, fits, and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sweep config and write its CSV")
    run.add_argument("config", help="TOML experiment config")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--samples", type=int, help="override n_samples")
    run.add_argument("--out", help="override the output CSV path")
    run.add_argument("--progress", action="store_true", help="print per-cell progress")

    fit = sub.add_parser("fit", help="fit ln(variance) = intercept - rate * n on a CSV curve")
    fit.add_argument("csv", help="sweep CSV file")
    fit.add_argument("--curve", default="", help="filter, e.g. cost=global,scheme=independent,depth=150")
    fit.add_argument("--x", default="n", help="x column (default n)")

    ids = sub.add_parser("verify-identities", help="Monte-Carlo check of the Haar moment identities")
    ids.add_argument("--dim", type=int, default=4, help="unitary dimension (default 4)")
    ids.add_argument("--samples", type=int, default=100_000)
    ids.add_argument("--seed", type=int, default=7)
    ids.add_argument("--tuples", type=int, default=1, help="number of operator tuples")
    ids.add_argument(
        "--operators", choices=("ginibre", "positive"), default="positive",
        help="operator ensemble; 'positive' keeps relative tolerances meaningful",
    )
    ids.add_argument("--max-z", type=float, default=5.0)
    ids.add_argument("--max-rel", type=float, default=0.01)

    bounds = sub.add_parser("verify-bounds", help="check the three variance bounds on a grid")
    bounds.add_argument("config", help="TOML config with kind = 'bound-verification'")
    bounds.add_argument("--seed", type=int, help="override the config seed")
    bounds.add_argument("--samples", type=int, help="override n_samples")
    bounds.add_argument("--stderr-k", type=float, default=3.0, help="slack tolerance in combined stderr")

    report = sub.add_parser("report", help="print a text summary of a sweep CSV")
    report.add_argument("csv", help="sweep CSV file")
    return parser


def _load_config(args) -> ExperimentConfig:
    path = Path(args.config)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    config = ExperimentConfig.from_toml(path)
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "samples", None) is not None:
        config.n_samples = args.samples
    if getattr(args, "out", None):
        config.output = Path(args.out)
    return config


def _cmd_run(args) -> int:
    config = _load_config(args)
    rows = run_experiment(config, progress=args.progress)
    print(f"{len(rows)} rows in {config.output}")
    return 0


def _cmd_fit(args) -> int:
    path = Path(args.csv)
    if not path.exists():
        raise FileNotFoundError(f"CSV file not found: {path}")
    rows = read_rows(path)
    if args.curve:
        rows = filter_rows(rows, args.curve)
    if not rows:
        print("no rows match the curve filter", file=sys.stderr)
        return 2
    fit = fit_rows(rows, x_column=args.x)
    print(f"rate={fit.rate:.6f} per {args.x}  intercept={fit.intercept:.6f}  "
          f"r_squared={fit.r_squared:.6f}  points={fit.n_points}")
    return 0


def _cmd_verify_identities(args) -> int:
    from ..expressibility import verify_haar_identities

    all_pass = True
    for t in range(args.tuples):
        checks = verify_haar_identities(
            args.dim, args.samples, (args.seed, "tuple", t), operator_kind=args.operators
        )
        for check in checks:
            ok = check.passed(args.max_z, args.max_rel)
            all_pass &= ok
            label = "PASS" if ok else "FAIL"
            prefix = f"tuple {t} " if args.tuples > 1 else ""
            print(
                f"{label} {prefix}{check.name}: analytic={check.analytic:.6g} "
                f"mc={check.estimate:.6g} |z|={check.z_score:.2f} rel={check.rel_error:.2e}"
            )
    return 0 if all_pass else 1


def _cmd_verify_bounds(args) -> int:
    from .sweep import evaluate_bound_cell

    config = _load_config(args)
    if config.kind != "bound-verification":
        print("config kind must be 'bound-verification'", file=sys.stderr)
        return 2
    all_hold = True
    print("n depth cost      variance     bound_r      bound_l      bound_rl     "
          "slack_r      slack_l      slack_rl")
    for cell in config.cells():
        row, report = evaluate_bound_cell(config, cell)
        holds = report.all_hold(args.stderr_k)
        all_hold &= holds
        flag = "" if holds else "  VIOLATED"
        print(
            f"{cell.n} {cell.depth:5d} {row.cost:8s} {row.variance:.6e} "
            f"{row.bound_r:.6e} {row.bound_l:.6e} {row.bound_rl:.6e} "
            f"{row.slack_r:+.6e} {row.slack_l:+.6e} {row.slack_rl:+.6e}{flag}"
        )
    print("all bounds hold" if all_hold else "bound violation beyond noise")
    return 0 if all_hold else 1


def _cmd_report(args) -> int:
    path = Path(args.csv)
    if not path.exists():
        raise FileNotFoundError(f"CSV file not found: {path}")
    rows = read_rows(path)
    if not rows:
        print("empty CSV", file=sys.stderr)
        return 2
    print(f"{'n':>3} {'depth':>5} {'scheme':>18} {'axes':>4} {'r':>6} {'cost':>8} "
          f"{'mean':>12} {'variance':>12} {'var_stderr':>12}")
    for row in rows:
        mean = f"{row.mean:.4e}" if row.mean is not None else "-"
        var = f"{row.variance:.4e}" if row.variance is not None else "-"
        vs = f"{row.variance_stderr:.4e}" if row.variance_stderr is not None else "-"
        print(f"{row.n:>3} {row.depth:>5} {row.scheme:>18} {row.axes:>4} {row.r:>6.3f} "
              f"{row.cost:>8} {mean:>12} {var:>12} {vs:>12}")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    handlers = {
        "run": _cmd_run,
        "fit": _cmd_fit,
        "verify-identities": _cmd_verify_identities,
        "verify-bounds": _cmd_verify_bounds,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
