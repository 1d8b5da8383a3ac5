"""Command-line driver.

    cmqop <experiment> [--config FILE] [--N INT] [--lambda REAL] [--u CSV]
          [--xi REAL] [--xi2 REAL] [--panels INT] [--order INT] [--tol REAL]
          [--json PATH] [--csv PATH] [--threads INT] [--seed INT]
    cmqop sweep --experiment NAME --axis AXIS --values CSV [--csv PATH] [...]

Exit codes: 0 pass, 1 check-fail, 2 config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, NumericsError
from .experiments import run
from .reports import (
    EXPERIMENT_NAMES,
    SWEEP_AXES,
    ExperimentConfig,
    read_config_file,
    sweep_rows,
    write_sweep_csv,
)

EXIT_PASS = 0
EXIT_CHECK_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmqop",
        description="Verification experiments for the hyperbolic Calogero-Moser Q-operator.",
    )
    parser.add_argument(
        "experiment",
        choices=list(EXPERIMENT_NAMES) + ["sweep"],
        help="experiment to run, or 'sweep' for a parameter sweep",
    )
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--N", dest="n", type=int, help="particle number")
    parser.add_argument("--lambda", dest="lam", type=float, help="coupling lambda = g/hbar")
    parser.add_argument("--u", help="comma-separated momenta, e.g. 0.8,-0.8")
    parser.add_argument("--xi", type=float, help="kernel parameter xi = z/(hbar mu)")
    parser.add_argument("--xi2", type=float, help="second kernel parameter (commutator)")
    parser.add_argument("--panels", type=int, help="quadrature panels per dimension")
    parser.add_argument("--order", type=int, help="Gauss-Legendre order per panel (4..16)")
    parser.add_argument("--radius", type=float, help="override the truncation half-width R")
    parser.add_argument("--tol", type=float, help="target tolerance")
    parser.add_argument("--wall-guard", dest="wall_guard", type=float, help="chamber wall guard")
    parser.add_argument("--h", type=float, help="finite-difference step")
    parser.add_argument("--max-degree", dest="max_degree", type=int, help="series degree cap")
    parser.add_argument("--json", dest="json_path", help="write the report as JSON here")
    parser.add_argument("--csv", dest="csv_path", help="write sweep rows as CSV here")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default 1)")
    parser.add_argument("--seed", type=int, default=None, help="seed for random draws")
    parser.add_argument("--axis", choices=SWEEP_AXES, help="sweep axis")
    parser.add_argument("--values", help="comma-separated sweep values")
    parser.add_argument("--experiment", dest="sweep_experiment",
                        help="experiment to sweep (with 'sweep')")
    return parser


_CONFIG_FIELDS = (
    "n", "lam", "xi", "xi2", "panels", "order", "radius", "tol",
    "wall_guard", "h", "max_degree", "threads", "seed",
)


def _assemble_config(args, experiment_name) -> ExperimentConfig:
    values = {"experiment": experiment_name}
    if args.config:
        values.update(read_config_file(args.config))
        values["experiment"] = values.get("experiment", experiment_name)
        if experiment_name != "sweep":
            values["experiment"] = experiment_name
    for name in _CONFIG_FIELDS:
        got = getattr(args, name)
        if got is not None:
            values[name] = got
    if args.u is not None:
        values["u"] = [float(tok) for tok in args.u.split(",")]
    values.setdefault("seed", 0)
    values.setdefault("threads", 1)
    try:
        return ExperimentConfig(**values).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.experiment == "sweep":
            return _run_sweep(args)
        cfg = _assemble_config(args, args.experiment)
        report = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericsError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(report.render_table())
    if args.json_path:
        report.to_json(args.json_path)
        print(f"report written to {args.json_path}")
    return EXIT_PASS if report.passed else EXIT_CHECK_FAIL


def _run_sweep(args) -> int:
    if not args.sweep_experiment or args.sweep_experiment not in EXPERIMENT_NAMES:
        raise ConfigError(
            f"sweep needs --experiment from {', '.join(EXPERIMENT_NAMES)}"
        )
    if not args.axis or not args.values:
        raise ConfigError("sweep needs --axis and --values")
    values = [float(tok) for tok in args.values.split(",")]
    base = _assemble_config(args, args.sweep_experiment)
    rows = sweep_rows(base, args.axis, values, run)
    for row in rows:
        status = row["error"] or ("pass" if row["pass"] else "FAIL")
        print(f"{args.axis}={row['value']:<10} max_residual={row['max_residual'] or 'n/a':<16} {status}")
    if args.csv_path:
        write_sweep_csv(rows, args.csv_path)
        print(f"sweep written to {args.csv_path}")
    failed = [r for r in rows if r["error"] or r["pass"] is not True]
    return EXIT_PASS if not failed else EXIT_CHECK_FAIL


if __name__ == "__main__":
    sys.exit(main())
