"""Command-line entry point: ``wkaczmarz run`` and ``wkaczmarz bounds``.

Exit codes: 0 success, 2 bad arguments, 3 I/O failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import BadMatrixFile, FloorViolated, GeneratorError, SingularOrIllConditioned
from .harness import MATRIX_KINDS, ExperimentSpec, report_bounds, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


def _csv_list(text):
    return [t for t in (s.strip() for s in text.split(",")) if t]


def _floats(text):
    try:
        return [float(t) for t in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_matrix_args(p):
    g = p.add_argument_group("matrix")
    g.add_argument("--matrix", choices=MATRIX_KINDS, default="gaussian-shifted")
    g.add_argument("--m", type=int, default=None, help="rows for --matrix gaussian (default: n)")
    g.add_argument("--n", type=int, default=200)
    g.add_argument("--shift", type=float, default=100.0)
    g.add_argument("--path", help="matrix file for --matrix file")
    g.add_argument("--rhs", help="right-hand side file (default: zero vector)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wkaczmarz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run solver trials and write CSV traces")
    _add_matrix_args(run)
    run.add_argument("--rules", type=_csv_list, default=["uniform", "p:1", "p:2", "p:20"],
                     help="comma list of uniform, cyclic, norm, max, p:<value>")
    run.add_argument("--p-values", type=_floats, default=[], help="extra weighted rules")
    run.add_argument("--iters", type=int, default=2000)
    run.add_argument("--trials", type=int, default=20)
    run.add_argument("--trace-every", type=int, default=10)
    run.add_argument("--strategy", choices=("gram", "direct"), default="gram")
    run.add_argument("--track-sv", action="store_true", help="record alignment with v_min")
    run.add_argument("--record-time", action="store_true",
                     help="fill the wall_ms summary column (output no longer reproducible)")

    bounds = sub.add_parser("bounds", help="write convergence-rate bounds for the matrix")
    _add_matrix_args(bounds)
    bounds.add_argument("--p-values", type=_floats, default=[1.0, 2.0, 20.0])
    bounds.add_argument("--restarts", type=int, default=4)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    common = dict(matrix=args.matrix, m=args.m, n=args.n, shift=args.shift, path=args.path,
                  rhs=args.rhs, seed=args.seed, outputs=args.out)
    try:
        if args.command == "run":
            spec = ExperimentSpec(rules=args.rules, p_values=args.p_values, iters=args.iters,
                                  trials=args.trials, trace_every=args.trace_every,
                                  strategy=args.strategy, track_sv=args.track_sv,
                                  record_time=args.record_time, **common)
        else:
            spec = ExperimentSpec(p_values=args.p_values, restarts=args.restarts, **common)
    except ValueError as exc:
        parser.error(str(exc))

    try:
        if args.command == "run":
            result = run_experiment(spec)
            print(result.summary_file.read_text(), end="")
        else:
            _, path = report_bounds(spec)
            print(path.read_text(), end="")
    except GeneratorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BadMatrixFile, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FloorViolated, SingularOrIllConditioned) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
