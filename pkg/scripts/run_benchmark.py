#!/usr/bin/env python3
"""Head-to-head benchmark: time-to-100-effective-samples per (case, method).

Each cell keeps doubling its chain until the minimum ESS across dimensions
reaches the target or the wall budget runs out, then reports the timing
decomposition t1 = t_pre + t_iter and t100 = t_pre + 100 t_iter.
"""

import argparse
import sys

from trunc_gauss.bench import (
    build_case,
    run_benchmark,
    write_cell_jsons,
    write_summary_csv,
)

DEFAULT_CASES = [
    "lkj:d=25",
    "lkj:d=100",
    "compound:d=100:rho=0.9",
    "compound:d=400:rho=0.9",
]
DEFAULT_METHODS = ["harmonic", "zigzag", "zigzag-nuts"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cases", nargs="*", default=DEFAULT_CASES,
                        help="case specs, e.g. lkj:d=100 compound:d=400:rho=0.9")
    parser.add_argument("--methods", nargs="*", default=DEFAULT_METHODS)
    parser.add_argument("--target-ess", type=int, default=100)
    parser.add_argument("--budget-s", type=float, default=3600.0,
                        help="wall budget per cell before it is marked DNF")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out-summary", default="bench_summary.csv")
    parser.add_argument("--out-cells", default="bench_cells")
    args = parser.parse_args(argv)

    cases = [build_case(spec, i, args.seed) for i, spec in enumerate(args.cases)]
    cells = run_benchmark(
        cases, args.methods,
        target_ess=args.target_ess,
        time_budget_s=args.budget_s,
        seed=args.seed,
        workers=args.workers,
    )

    header = f"{'case':<28} {'d':>5} {'method':<12} {'t_pre[s]':>10} {'t1[s]':>10} {'t100[s]':>10} {'n':>8} status"
    print(header)
    print("-" * len(header))
    for cell in cells:
        r = cell.result
        if r is None:
            print(f"{cell.case:<28} {cell.d:>5} {cell.method:<12} {'-':>10} {'-':>10} {'-':>10} "
                  f"{cell.n_total:>8} {cell.status}: {cell.error}")
        else:
            print(f"{cell.case:<28} {cell.d:>5} {cell.method:<12} {r.t_pre:>10.3g} "
                  f"{r.t1:>10.3g} {r.t100:>10.3g} {cell.n_total:>8} {cell.status}")

    write_summary_csv(args.out_summary, cells)
    paths = write_cell_jsons(args.out_cells, cells)
    print(f"\nsummary -> {args.out_summary}; {len(paths)} cell files -> {args.out_cells}/")
    return 0 if all(c.status != "error" for c in cells) else 1


if __name__ == "__main__":
    sys.exit(main())
