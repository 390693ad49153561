"""Command-line entry point.

::

    mirrorstrat solve --config c.toml --out trace.csv
    mirrorstrat certificate --config c.toml
    mirrorstrat experiment hist|path|transition --config c.toml --out-dir results/
    mirrorstrat demo projection --p0 2,1 --radius 0.2 --samples 1000

``--seed``, ``--trials``, ``--solver`` and ``--workers`` override the
corresponding config keys. Without ``--config`` the sparse (N, P) = (100, 50)
defaults are used.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .certificates import CertificateError, min_norm_certificate, uniqueness_check
from .experiments import (
    ConfigError,
    ExperimentConfig,
    gen_instance,
    projection_demo,
    run_histogram,
    run_iteration_path,
    run_phase_transition,
    solver_params,
    trial_seed,
    write_outputs,
)
from .linalg import NumericalBreakdownError
from .solvers import dr_solve, fb_solve, objective

__all__ = ["cli_main", "main"]


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--trials", type=int, help="number of trials (overrides config)")
    p.add_argument("--solver", choices=["fb", "dr"], help="iterative solver (overrides config)")
    p.add_argument("--workers", type=int, help="worker processes for trials (overrides config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mirrorstrat", description="Stratum identification experiments: solvers, certificates and Monte Carlo runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one random instance and write its trace")
    _common(p)
    p.add_argument("--out", required=True, help="trace CSV path")
    p.add_argument("--trial", type=int, default=0, help="trial index of the instance (default 0)")

    p = sub.add_parser("certificate", help="print the minimum-norm certificate of one instance")
    _common(p)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--include-q", action="store_true", help="include q_bar in the record")

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    p.add_argument("which", choices=["hist", "path", "transition"])
    _common(p)
    p.add_argument("--out-dir", required=True, help="directory for CSV, SVG and meta.json")
    p.add_argument("--iters", type=int, help="iterations per path (path experiment)")
    p.add_argument("--r0-grid", type=_int_list, help="complexities, e.g. 1,5,10 (transition)")
    p.add_argument("--delta-grid", type=_int_list, help="excess values, e.g. 0,1,2 (transition)")

    p = sub.add_parser("demo", help="small illustrations")
    p.add_argument("which", choices=["projection"])
    p.add_argument("--p0", type=_float_list, default=[2.0, 1.0], help="center point, e.g. 2,1")
    p.add_argument("--radius", type=float, default=0.2)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="optional JSON report path")
    return parser


def _load_config(args) -> ExperimentConfig:
    try:
        config = ExperimentConfig.from_toml(args.config) if args.config else ExperimentConfig()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.solver is not None:
        overrides["solver"] = args.solver
    if args.workers is not None:
        overrides["workers"] = args.workers
    return config.replace(**overrides) if overrides else config


def _cmd_solve(args) -> int:
    config = _load_config(args)
    inst = gen_instance(config, trial_seed(config.master_seed, args.trial))
    params = solver_params(config, inst, config.max_iters, config.stop_tol)
    solve = fb_solve if config.solver == "fb" else dr_solve
    trace = solve(inst, params, tol=config.tolerances)
    trace.to_csv(args.out)
    summary = {
        "solver": config.solver,
        "iterations": trace.iterations,
        "converged": trace.converged,
        "residual": trace.residual,
        "objective": objective(inst, trace.x),
        "lam": inst.lam,
        "r0_final": int(trace.r0_path[-1]),
        "r0_x0": inst.regularizer.complexity_index(inst.x0, config.tolerances),
    }
    print(json.dumps(summary, indent=2))
    return 0


def _cmd_certificate(args) -> int:
    config = _load_config(args)
    inst = gen_instance(config, trial_seed(config.master_seed, args.trial), noiseless=True)
    cert = min_norm_certificate(
        inst.phi, inst.x0, inst.regularizer, config.cert_max_iters, config.cert_tol, config.tolerances
    )
    unique = uniqueness_check(inst.phi, inst.x0, cert, inst.regularizer)
    print(json.dumps(cert.to_record(unique=unique, include_q=args.include_q), indent=2))
    return 0


def _cmd_experiment(args) -> int:
    config = _load_config(args)
    if args.which == "hist":
        result = run_histogram(config)
    elif args.which == "path":
        result = run_iteration_path(config, args.iters)
    else:
        result = run_phase_transition(config, args.r0_grid, args.delta_grid)
    files = write_outputs(result, args.out_dir)
    print(f"wrote {', '.join(files)} to {args.out_dir}")
    return 0


def _cmd_demo(args) -> int:
    report = projection_demo(np.array(args.p0), args.radius, args.samples, args.seed)
    text = json.dumps(report.to_record(), indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


COMMANDS = {"solve": _cmd_solve, "certificate": _cmd_certificate, "experiment": _cmd_experiment, "demo": _cmd_demo}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI; returns the process exit code instead of exiting."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the usage error
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"mirrorstrat: config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"mirrorstrat: invalid argument: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"mirrorstrat: cannot write output: {exc}", file=sys.stderr)
        return 1
    except (NumericalBreakdownError, CertificateError) as exc:
        print(f"mirrorstrat: computation failed: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
