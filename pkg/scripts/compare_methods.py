#!/usr/bin/env python3
"""Cross-check every sampler's marginal means on one random 3-d problem.

Generates an LKJ-correlated Gaussian with a random mean, truncates it to the
positive orthant, runs all four samplers, and prints each marginal mean with
its ESS-based standard error plus the worst z-score against the Gibbs oracle,
which draws each conditional exactly and thus anchors the comparison.
"""

import argparse
import sys

import numpy as np

from trunc_gauss.bench import gen_lkj, gibbs_sample, positive_orthant_case
from trunc_gauss.harmonic import harmonic_sample
from trunc_gauss.zigzag import ZigzagConfig, zigzag_sample


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=20_000, help="draws per method")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    cov = gen_lkj(3, rng=rng)
    mean = rng.uniform(-1.0, 1.0, 3)
    problem = positive_orthant_case(cov, mean)
    x0 = np.ones(3)
    print(f"mean {np.array2string(mean, precision=3)}, correlations "
          f"{cov[0, 1]:.3f} {cov[0, 2]:.3f} {cov[1, 2]:.3f}, truncated to x >= 0")

    runs = {
        "gibbs-oracle": lambda r: gibbs_sample(problem, x0, args.n, r),
        "harmonic": lambda r: harmonic_sample(problem, x0, args.n, r),
        "zigzag": lambda r: zigzag_sample(problem, x0, args.n, r),
        "zigzag-nuts": lambda r: zigzag_sample(
            problem, x0, args.n, r, ZigzagConfig(use_nuts=True)
        ),
    }
    results = {}
    for i, (name, run) in enumerate(runs.items()):
        results[name] = run(np.random.default_rng([args.seed, 7, i]))

    ref = results["gibbs-oracle"]
    ref_mean = ref.samples.mean(axis=0)
    ref_se2 = ref.samples.var(axis=0, ddof=1) / ref.ess

    print(f"\n{'method':<14}" + "".join(f"{f'x{j + 1}':>20}" for j in range(3))
          + f"{'max |z|':>10}")
    for name, res in results.items():
        m = res.samples.mean(axis=0)
        se = np.sqrt(res.samples.var(axis=0, ddof=1) / res.ess)
        cells = "".join(f"{m[j]:>12.4f} +-{se[j]:.4f}" for j in range(3))
        if name == "gibbs-oracle":
            print(f"{name:<14}{cells}{'-':>10}")
        else:
            z = np.max(np.abs(m - ref_mean) / np.sqrt(se**2 + ref_se2))
            print(f"{name:<14}{cells}{z:>10.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
