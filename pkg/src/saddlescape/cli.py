"""Command-line entry point.

Subcommands::

    saddlescape run --spec exp.cfg --out runs/ [--workers N] [--master-seed S]
    saddlescape summarize --dir runs/
    saddlescape plot --summary runs/summary.csv --out curve.svg
    saddlescape certify --problem prob.cfg --point point.csv --epsilon 0.05

Exit codes: 0 success, 1 validation/configuration error, 2 numerical failure.
The ``SADDLESCAPE_OUT`` environment variable overrides the output directory
(and nothing else).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness
from .diagnostics import certify
from .errors import ConfigurationError, EvaluationError, NumericalError
from .problems import problem_from_config


def _cmd_run(args) -> int:
    spec = harness.experiment_from_config(args.spec)
    rows = harness.run_experiment(
        spec, out_dir=args.out, workers=args.workers, master_seed=args.master_seed
    )
    for row in rows:
        print(
            f"{row.algorithm}-{row.mode}-{'sgc' if row.sgc_arm else 'nosgc'} "
            f"eps={row.epsilon:g} median_calls={row.median_calls_to_first_certified} "
            f"sosp_fraction={row.sosp_fraction:.3f} success={row.success_rate:.2f}"
        )
    return 0


def _cmd_summarize(args) -> int:
    directory = Path(args.dir)
    groups: dict[tuple, list] = {}
    for path in sorted(directory.glob("*.csv")):
        if path.name == "summary.csv":
            continue
        trace = harness.read_trace(path)
        meta = dict(
            line.split(" = ", 1)
            for line in trace.config_echo.splitlines()
            if " = " in line
        )
        if "algorithm" not in meta or "epsilon" not in meta:
            continue
        key = (
            meta["algorithm"],
            meta.get("mode", ""),
            meta.get("sgc_arm", "True") == "True",
            float(meta["epsilon"]),
        )
        groups.setdefault(key, []).append(trace)
    if not groups:
        print(f"no trace files found under {directory}", file=sys.stderr)
        return 1

    class _Arm:
        def __init__(self, algorithm, mode, sgc_arm):
            self.algorithm, self.mode, self.sgc_arm = algorithm, mode, sgc_arm

    rows = []
    for (algorithm, mode, sgc_arm, eps), traces in sorted(groups.items()):
        rows.append(
            harness.summarize_traces(traces, _Arm(algorithm, mode, sgc_arm), eps, burn_in=0.2)
        )
    rows.sort(key=lambda r: (r.algorithm, r.mode, not r.sgc_arm, -r.epsilon))
    harness.write_summary(rows, directory / "summary.csv")
    for row in rows:
        print(
            f"{row.algorithm}-{row.mode}-{'sgc' if row.sgc_arm else 'nosgc'} "
            f"eps={row.epsilon:g} median_calls={row.median_calls_to_first_certified} "
            f"sosp_fraction={row.sosp_fraction:.3f} success={row.success_rate:.2f}"
        )
    return 0


def _cmd_plot(args) -> int:
    rows = harness.read_summary(args.summary)
    harness.emit_plot(rows, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_certify(args) -> int:
    problem = problem_from_config(args.problem)
    points = np.loadtxt(args.point, delimiter=",", ndmin=2)
    for i, x in enumerate(points):
        cert = certify(problem, x, args.epsilon)
        print(
            f"point {i}: certified={int(cert.certified)} score={cert.score!r} "
            f"grad_norm={cert.grad_norm!r} lambda_min={cert.lambda_min!r} "
            f"epsilon={cert.epsilon!r}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="saddlescape")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment spec")
    p_run.add_argument("--spec", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--master-seed", type=int, default=0)
    p_run.set_defaults(func=_cmd_run)

    p_sum = sub.add_parser("summarize", help="rebuild summary.csv from trace files")
    p_sum.add_argument("--dir", required=True)
    p_sum.set_defaults(func=_cmd_summarize)

    p_plot = sub.add_parser("plot", help="render a log-log complexity chart")
    p_plot.add_argument("--summary", required=True)
    p_plot.add_argument("--out", required=True)
    p_plot.set_defaults(func=_cmd_plot)

    p_cert = sub.add_parser("certify", help="certify points against a problem")
    p_cert.add_argument("--problem", required=True)
    p_cert.add_argument("--point", required=True)
    p_cert.add_argument("--epsilon", type=float, required=True)
    p_cert.set_defaults(func=_cmd_certify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, EvaluationError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except NumericalError as err:
        where = f" at iterate {err.iterate}" if err.iterate is not None else ""
        print(f"numerical failure{where}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
