"""Command-line front end: sample from a problem file, generate problems,
run the benchmark harness.

Exit codes: 0 success (benchmark DNF cells are still success), 2 for
validation or configuration problems, 3 for sampler failures at runtime.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .bench import (
    CELL_STREAM,
    GEN_STREAM,
    build_case,
    default_start,
    gen_compound_symmetric,
    gen_lkj,
    gibbs_sample,
    positive_orthant_case,
    run_benchmark,
    write_cell_jsons,
    write_summary_csv,
    _method_name,
)
from .harmonic import HarmonicOptions, harmonic_sample
from .diagnostics import metrics_dict
from .model import LinearConstraints, load_problem, save_problem
from .zigzag import ZigzagConfig, zigzag_sample

logger = logging.getLogger("trunc_gauss.cli")

METHODS = ("harmonic", "zigzag", "zigzag-nuts", "gibbs-oracle")


def _setup_logging() -> None:
    level_name = os.environ.get("TRUNC_GAUSS_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trunc-gauss",
        description="Exact-trajectory HMC sampling from truncated multivariate normals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="sample from a problem JSON file")
    p_sample.add_argument("--problem", required=True, help="problem JSON path")
    p_sample.add_argument("--method", default="zigzag", choices=METHODS)
    p_sample.add_argument("--n", type=int, default=1000, help="number of draws")
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument(
        "--burn-in", type=float, default=0.0, dest="burn_in",
        help="fraction of draws discarded from the front (default 0)",
    )
    p_sample.add_argument("--out-samples", default="samples.csv")
    p_sample.add_argument("--out-metrics", default="metrics.json")
    p_sample.add_argument(
        "--time", type=float, default=None,
        help="override trajectory duration (harmonic: fixed integration time; zigzag: T)",
    )
    p_sample.add_argument("--tbase", type=float, default=None, help="zigzag-nuts segment duration")
    p_sample.add_argument("--max-depth", type=int, default=10, dest="max_depth")
    p_sample.set_defaults(func=cmd_sample)

    p_bench = sub.add_parser("bench", help="run benchmark cells to a target ESS")
    p_bench.add_argument(
        "--cases", required=True, action="append",
        help="comma-separated case specs, e.g. lkj:d=100,compound:d=400:rho=0.9,identity:d=10",
    )
    p_bench.add_argument("--methods", default="harmonic,zigzag", help="comma-separated methods")
    p_bench.add_argument("--target-ess", type=int, default=100, dest="target_ess")
    p_bench.add_argument("--budget-s", type=float, default=3600.0, dest="budget_s")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--workers", type=int, default=1)
    p_bench.add_argument("--out-summary", default="bench_summary.csv")
    p_bench.add_argument("--out-cells", default="bench_cells")
    p_bench.set_defaults(func=cmd_bench)

    p_gen = sub.add_parser("gen", help="write a generated problem JSON")
    p_gen.add_argument("kind", choices=("lkj", "compound", "identity"))
    p_gen.add_argument("--d", type=int, required=True)
    p_gen.add_argument("--rho", type=float, default=None, help="compound off-diagonal")
    p_gen.add_argument("--eta", type=float, default=1.0, help="LKJ concentration")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", default="problem.json")
    p_gen.set_defaults(func=cmd_gen)

    return parser


def cmd_sample(args) -> int:
    if args.n < 1:
        print("error: --n must be at least 1", file=sys.stderr)
        return 2
    if not 0.0 <= args.burn_in < 1.0:
        print("error: --burn-in must lie in [0, 1)", file=sys.stderr)
        return 2
    problem, init = load_problem(args.problem)
    if isinstance(problem.constraints, LinearConstraints) and args.method != "harmonic":
        if args.method.startswith("zigzag"):
            print("error: zigzag supports box constraints only", file=sys.stderr)
        else:
            print(f"error: {args.method} supports box constraints only", file=sys.stderr)
        return 2
    x0 = init if init is not None else default_start(problem)
    rng = np.random.default_rng([args.seed, CELL_STREAM])

    if args.method == "harmonic":
        opts = HarmonicOptions(fixed_time=args.time, burn_in_frac=args.burn_in)
        result = harmonic_sample(problem, x0, args.n, rng, opts)
    elif args.method in ("zigzag", "zigzag-nuts"):
        config = ZigzagConfig(
            T=args.time,
            t_base=args.tbase,
            use_nuts=args.method == "zigzag-nuts",
            max_tree_depth=args.max_depth,
            burn_in_frac=args.burn_in,
        )
        result = zigzag_sample(problem, x0, args.n, rng, config)
    else:
        result = gibbs_sample(problem, x0, args.n, rng, burn_in_frac=args.burn_in)

    header = ",".join(f"x{i + 1}" for i in range(problem.dim))
    np.savetxt(args.out_samples, result.samples, delimiter=",", header=header,
               comments="", fmt="%.17g")
    with open(args.out_metrics, "w") as fh:
        json.dump(metrics_dict(result), fh, indent=2)
        fh.write("\n")
    print(
        f"{args.method}: {result.samples.shape[0]} rows -> {args.out_samples}; "
        f"ESS_min {result.ess_min:.1f}; metrics -> {args.out_metrics}"
    )
    return 0


def cmd_bench(args) -> int:
    if args.target_ess < 1:
        print("error: --target-ess must be at least 1", file=sys.stderr)
        return 2
    if args.budget_s <= 0:
        print("error: --budget-s must be positive", file=sys.stderr)
        return 2
    specs = [s.strip() for chunk in args.cases for s in chunk.split(",") if s.strip()]
    if not specs:
        print("error: no cases given", file=sys.stderr)
        return 2
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    methods = [_method_name(m) for m in methods]
    cases = [build_case(spec, i, args.seed) for i, spec in enumerate(specs)]
    cells = run_benchmark(
        cases, methods,
        target_ess=args.target_ess,
        time_budget_s=args.budget_s,
        seed=args.seed,
        workers=args.workers,
    )
    write_summary_csv(args.out_summary, cells)
    paths = write_cell_jsons(args.out_cells, cells)
    for cell in cells:
        if cell.result is not None:
            print(f"{cell.case} [{cell.method}] {cell.status}: "
                  f"t1={cell.result.t1:.3g}s t100={cell.result.t100:.3g}s "
                  f"(n={cell.n_total}, ESS_min={cell.result.ess_min:.1f})")
        else:
            print(f"{cell.case} [{cell.method}] {cell.status}: {cell.error}")
    print(f"summary -> {args.out_summary}; {len(paths)} cell files -> {args.out_cells}/")
    return 0


def cmd_gen(args) -> int:
    if args.d < 1:
        print("error: --d must be at least 1", file=sys.stderr)
        return 2
    rng = np.random.default_rng([args.seed, GEN_STREAM])
    if args.kind == "lkj":
        cov = gen_lkj(args.d, args.eta, rng)
    elif args.kind == "compound":
        if args.rho is None:
            print("error: compound needs --rho", file=sys.stderr)
            return 2
        cov = gen_compound_symmetric(args.d, args.rho)
    else:
        cov = np.eye(args.d)
    problem = positive_orthant_case(cov, np.zeros(args.d))
    save_problem(problem, args.out)
    print(f"{args.kind} d={args.d} -> {args.out}")
    return 0


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"sampler error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
