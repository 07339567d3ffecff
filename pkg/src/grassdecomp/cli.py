"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 shape error,
3 numerical degeneracy (partition, rank deficiency, repeated spectrum).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fileio
from .decompose import DecomposeOptions, grassmann_decompose
from .errors import DimensionError, GrassmannError
from .testbench import (
    add_noise,
    backward_error,
    forward_error,
    match_components,
    random_decomposition,
    rows_to_csv,
    run_sweep,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_generate(args) -> int:
    if args.d < 1 or args.r < 1 or args.d * args.r > args.m:
        raise UsageError(f"need d >= 1, r >= 1 and d*r <= m (got d={args.d}, m={args.m}, r={args.r})")
    truth, T = random_decomposition(args.d, args.m, args.r, args.field, args.seed)
    # noise gets its own stream so sigma=0 and sigma>0 share the noiseless part
    T = add_noise(T, args.sigma, [args.seed, 1])
    fileio.write_tensor(args.out, T)
    if args.truth:
        fileio.write_decomposition(args.truth, truth)
    return 0


def cmd_decompose(args) -> int:
    T = fileio.read_tensor(args.inp)
    opts = DecomposeOptions(rank=args.rank, p=args.p, omega=args.omega, seed=args.seed)
    D = grassmann_decompose(T, opts)
    if args.out:
        fileio.write_decomposition(args.out, D)
    info = D.info
    report = {
        "backward_error": backward_error(T, D),
        "path": info["path"],
        "rank1_fast_path": info["path"] == "rank1",
        "seed": args.seed,
        "options": {"rank": args.rank, "p": args.p, "omega": args.omega},
        "kernel": info.get("kernel"),
        "kernel_warnings": info.get("kernel_warnings", []),
        "sketch_dimension": info.get("sketch_dimension"),
        "resampled": info.get("resampled", False),
        "timings": None if args.no_timings else info["timings"],
        "total_seconds": None if args.no_timings else info["total_seconds"],
    }
    text = _dump(report)
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_evaluate(args) -> int:
    T = fileio.read_tensor(args.inp)
    truth = fileio.read_decomposition(args.truth)
    comp = fileio.read_decomposition(args.computed)
    if (truth.d, truth.m, truth.r) != (comp.d, comp.m, comp.r) or (T.d, T.n) != (comp.d, comp.m):
        raise UsageError("tensor, truth and computed files disagree in shape")
    matching = match_components(truth, comp)
    result = {
        "backward_error": backward_error(T, comp),
        "forward_error": forward_error(truth, comp, matching),
        "matching": matching,
    }
    text = _dump(result)
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    params = {}
    for key in ("d", "m", "r", "field", "trials"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    timings = args.suite == "timing" and not args.no_timings
    rows = run_sweep(args.suite, params, args.seed, timings=timings)
    text = rows_to_csv(rows, timings=timings)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="grassdecomp", description="Grassmann decomposition of skew-symmetric tensors")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random low-rank tensor and its ground truth")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--field", choices=("real", "complex"), default="real")
    g.add_argument("--sigma", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="tensor file")
    g.add_argument("--truth", help="ground-truth decomposition file")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("decompose", help="decompose a tensor file")
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--rank", "--r", dest="rank", type=int, required=True)
    c.add_argument("--p", type=int, default=10)
    c.add_argument("--omega", type=float, default=2.0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", help="decomposition file")
    c.add_argument("--report", help="JSON report path (default: stdout)")
    c.add_argument("--no-timings", action="store_true", help="omit wall-clock fields")
    c.set_defaults(func=cmd_decompose)

    e = sub.add_parser("evaluate", help="compare a computed decomposition with the truth")
    e.add_argument("--in", dest="inp", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--computed", required=True)
    e.add_argument("--report")
    e.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("bench", help="run an experiment sweep and emit CSV")
    b.add_argument("--suite", choices=("refine", "noise", "grid", "timing"), required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--d", type=int)
    b.add_argument("--m", type=int)
    b.add_argument("--r", type=int)
    b.add_argument("--field", choices=("real", "complex"))
    b.add_argument("--trials", type=int)
    b.add_argument("--out")
    b.add_argument("--no-timings", action="store_true")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DimensionError as exc:
        print(f"shape error: {exc}", file=sys.stderr)
        return exc.exit_code
    except GrassmannError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
