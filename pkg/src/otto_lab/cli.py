"""Command-line front end: ``otto-lab run | list | plot``.

Exit codes: 0 all checks pass, 1 numerical failure, 2 configuration or
curvature refusal, 3 I/O error.
"""

import argparse
import sys
from pathlib import Path

from .config import parse_config
from .errors import OttoLabError
from .plotting import emit_plot_data
from .runner import OUT_ENV, run_scenario
from .scenarios import BUILTINS, builtin_config, list_scenarios

EXIT_IO = 3


def _load_config(target):
    path = Path(target)
    if path.is_file():
        return parse_config(path)
    if target in BUILTINS:
        return builtin_config(target)
    raise FileNotFoundError(f"no config file or built-in scenario named {target!r}")


def _print_run(run, verbose, out):
    for rep in run.reports:
        flag = "PASS" if rep["pass"] else "FAIL"
        if not rep["gating"]:
            flag += " (info)"
        out.write(f"{flag:<11} {rep['name']:<34} lhs={rep['lhs']:.6e} rhs={rep['rhs']:.6e} slack={rep['slack']:.3e}\n")
    for d in run.diagnostics:
        flag = "PASS" if d.passed else "FAIL"
        rel = ">=" if d.kind == "min" else "<="
        out.write(f"{flag:<11} {d.name:<34} {d.value:.3e} {rel} {d.limit:.1e}\n")
    if run.error:
        out.write(f"{run.status.upper()}: {run.error}\n")
    if verbose:
        for suite, seconds in run.timings.items():
            out.write(f"time {suite}: {seconds:.3f} s\n")
    out.write(f"{run.scenario}: {run.status} (exit {run.exit_status}), outputs in {run.outdir}\n")


def cmd_run(args):
    cfg = _load_config(args.config)
    run = run_scenario(cfg, root=args.out)
    _print_run(run, args.verbose, sys.stdout)
    return run.exit_status


def cmd_list(args):
    sys.stdout.write(list_scenarios())
    return 0


def cmd_plot(args):
    dat, png = emit_plot_data(args.report, args.series)
    print(dat)
    print(png)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="otto-lab",
        description="Numerical checks of local log-Sobolev inequalities, toy F-interpolations and Schrodinger bridges.",
        epilog=f"The environment variable {OUT_ENV} overrides the output root.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a config file or a built-in scenario id")
    p.add_argument("config", help="path to a config file, or a built-in scenario id")
    p.add_argument("--out", help="output root (default: config 'output' key, else ./otto-lab-out)")
    p.add_argument("-v", "--verbose", action="store_true", help="print per-suite timings")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("list", help="list built-in scenarios")
    p.set_defaults(func=cmd_list)
    p = sub.add_parser("plot", help="write plot data and a PNG for one series of a run report")
    p.add_argument("report", help="report.json or its run directory")
    p.add_argument("--series", required=True, help="series name, e.g. lambda, energy, delta-gap")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OttoLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
