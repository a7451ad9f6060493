"""Command line entry point: ``kdv-hermite run|table|verify|sweep``."""

import argparse
import logging
import sys
from dataclasses import replace

from .config import EXPERIMENTS, ConfigError, default_config, load_config
from .output import OutputError, emit_outputs, read_table
from .runners import run_experiment

log = logging.getLogger("kdv_hermite")


def _execute(cfg, strict_cfl):
    if strict_cfl:
        cfg = replace(cfg, strict_cfl=True)
    arts = run_experiment(cfg)
    paths = emit_outputs(arts, cfg)
    _print_table([{"M": r.M_nodes, "E": r.E_percent, "rate": r.rate_vs_previous} for r in arts.table])
    for run in arts.failed:
        print(f"M={run.M} failed: {run.message}", file=sys.stderr)
    print(f"wrote {len(paths)} files to {cfg.output_dir}")
    return 1 if arts.failed else 0


def _fmt(v):
    if v in (None, ""):
        return ""
    try:
        return f"{float(v):.3g}"
    except ValueError:
        return str(v)


def _print_table(rows):
    print(f"{'M':>8} {'E':>10} {'rate':>8}")
    for r in rows:
        print(f"{r['M']:>8} {_fmt(r['E']):>10} {_fmt(r['rate']):>8}")


def cmd_run(args):
    return _execute(load_config(args.config), args.strict_cfl)


def cmd_sweep(args):
    try:
        overrides = {"M_list": [int(m) for m in args.m.replace(",", " ").split()]}
    except ValueError as exc:
        raise ConfigError(f"--m: {exc}") from exc
    if args.output_dir:
        overrides["output_dir"] = args.output_dir
    if args.dt_mode:
        overrides["dt_mode"] = args.dt_mode
    if args.dt_c is not None:
        overrides["dt_c"] = args.dt_c
    if args.experiment == "rough_l2" and args.oracle_m is not None:
        overrides["oracle_M"] = args.oracle_m
    elif args.experiment == "rough_l2":
        overrides["oracle_M"] = 4 * max(overrides["M_list"])
    return _execute(default_config(args.experiment, **overrides), args.strict_cfl)


def cmd_table(args):
    _print_table(read_table(args.output_dir))
    return 0


def cmd_verify(args):
    from .verify import run_verification
    return 0 if run_verification(seed=args.seed) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="kdv-hermite", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment from a key = value config file")
    r.add_argument("config")
    r.add_argument("--strict-cfl", action="store_true", help="treat CFL violations as errors")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("table", help="print table.csv from an output directory")
    t.add_argument("output_dir")
    t.set_defaults(func=cmd_table)

    v = sub.add_parser("verify", help="run the operator and identity self-tests")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="run a built-in experiment over a list of resolutions")
    s.add_argument("--experiment", required=True, choices=[e for e in EXPERIMENTS if e != "custom"])
    s.add_argument("--m", required=True, help="comma separated cell counts")
    s.add_argument("--output-dir")
    s.add_argument("--dt-mode", choices=["cfl_three_halves", "dx_squared", "dx_linear"])
    s.add_argument("--dt-c", type=float)
    s.add_argument("--oracle-m", type=int)
    s.add_argument("--strict-cfl", action="store_true")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OutputError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
