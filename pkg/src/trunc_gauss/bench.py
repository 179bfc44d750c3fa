"""Benchmark problems and the head-to-head efficiency harness.

Provides the covariance generators (LKJ correlation matrices via the onion
construction, compound-symmetric matrices), positive-orthant problem
builders, a low-dimensional Gibbs oracle for validating the HMC samplers,
and a harness that runs (case x method) cells until each reaches a target
effective sample size or its wall-clock budget.
"""

from __future__ import annotations

import copy
import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri, ndtri_exp

from .diagnostics import ChainResult, Timings, metrics_dict, summarize
from .errors import NotPositiveDefinite, UnsupportedConstraints
from .harmonic import HarmonicOptions, harmonic_chain, kept_slice
from .model import (
    BoxConstraints,
    GaussianSpec,
    MatrixKind,
    MtnProblem,
    Need,
    load_problem,
    prepare,
    validate_initial,
)
from .zigzag import ZigzagConfig, zigzag_chain

GIBBS_MAX_DIM = 10
DEFAULT_TARGET_ESS = 100
DEFAULT_TIME_BUDGET_S = 3600.0
# First benchmark batch; totals double from here until target or budget.
MIN_FIRST_BATCH = 256

# Named RNG streams under one master seed: problem generation draws and
# sampler draws never share a stream.
GEN_STREAM = 0
CELL_STREAM = 1


# Problem generators.


def gen_lkj(d: int, eta: float = 1.0, rng: np.random.Generator | None = None) -> np.ndarray:
    """Random correlation matrix, LKJ(eta); eta=1 is uniform over the space.

    Onion construction: grow the matrix one dimension at a time, drawing the
    squared radius of each new row of the Cholesky factor from a Beta whose
    shape keeps the joint density proportional to det(R)^(eta-1). The factor
    is extended in place so a draw costs one O(d^2) pass plus the final
    product.
    """
    if d < 2:
        raise ValueError("LKJ needs d >= 2")
    if eta <= 0:
        raise ValueError("eta must be positive")
    rng = rng if rng is not None else np.random.default_rng()
    beta = eta + (d - 2) / 2.0
    A = np.zeros((d, d))  # lower-triangular factor, R = A A^T
    u = 2.0 * rng.beta(beta, beta) - 1.0
    A[0, 0] = 1.0
    A[1, 0] = u
    A[1, 1] = math.sqrt(max(1.0 - u * u, 0.0))
    for k in range(2, d):
        beta -= 0.5
        y = rng.beta(k / 2.0, beta)
        z = rng.standard_normal(k)
        nz = np.linalg.norm(z)
        while nz == 0.0:
            z = rng.standard_normal(k)
            nz = np.linalg.norm(z)
        # new factor row: direction z/|z| scaled to radius sqrt(y), then the
        # diagonal entry tops the row's norm up to exactly 1
        A[k, :k] = math.sqrt(y) * (z / nz)
        A[k, k] = math.sqrt(max(1.0 - y, 0.0))
    R = A @ A.T
    low = np.tril(R, -1)
    R = low + low.T
    np.fill_diagonal(R, 1.0)
    return R


def gen_compound_symmetric(d: int, rho: float) -> np.ndarray:
    """Covariance with unit diagonal and constant off-diagonal rho.

    Spectrum is {1 + (d-1) rho, 1 - rho (d-1 times)}, so validity is
    -1/(d-1) < rho < 1."""
    if d < 2:
        raise ValueError("compound symmetry needs d >= 2")
    if not (-1.0 / (d - 1) < rho < 1.0):
        raise NotPositiveDefinite(
            f"rho={rho} outside (-1/{d - 1}, 1); the matrix would not be SPD"
        )
    S = np.full((d, d), float(rho))
    np.fill_diagonal(S, 1.0)
    return S


def positive_orthant_case(cov: np.ndarray, mean: np.ndarray) -> MtnProblem:
    """Problem truncated to x_i >= 0 in every coordinate."""
    cov = np.asarray(cov, dtype=np.float64)
    mean = np.asarray(mean, dtype=np.float64)
    d = cov.shape[0]
    gaussian = GaussianSpec(dim=d, mean=mean, matrix_kind=MatrixKind.COVARIANCE, matrix=cov)
    box = BoxConstraints(lower=np.zeros(d), upper=np.full(d, np.inf))
    return MtnProblem(gaussian=gaussian, constraints=box)


def default_start(problem: MtnProblem) -> np.ndarray:
    """Feasible starting point for box problems.

    Midpoint where both bounds are finite, one unit inside a single finite
    bound, the mean where unconstrained. Problems in halfspace form have no
    generic interior point; those need an explicit start."""
    if not isinstance(problem.constraints, BoxConstraints):
        raise ValueError(
            "no default start for general linear constraints; provide an init point"
        )
    lo = problem.constraints.lower
    hi = problem.constraints.upper
    x = np.array(problem.gaussian.mean, dtype=np.float64)
    both = np.isfinite(lo) & np.isfinite(hi)
    only_lo = np.isfinite(lo) & ~np.isfinite(hi)
    only_hi = ~np.isfinite(lo) & np.isfinite(hi)
    x[both] = 0.5 * (lo[both] + hi[both])
    x[only_lo] = lo[only_lo] + 1.0
    x[only_hi] = hi[only_hi] - 1.0
    return x


# Gibbs oracle. Exact inverse-CDF conditionals make this a gold-standard
# (if slow) sampler for cross-checking the HMC methods at small d.


def _trunc_std_normal(a: float, b: float, u: float) -> float:
    """Quantile u of the standard normal truncated to [a, b].

    Far tails lose all precision in plain CDF space, so when the interval
    sits at or below zero the interpolation runs on log-CDF values instead;
    intervals above zero reflect to that case."""
    if a > 0.0:
        return -_trunc_std_normal(-b, -a, 1.0 - u)
    if b <= 0.0:
        la = log_ndtr(a)
        lb = log_ndtr(b)
        # log of (1-u) Phi(a) + u Phi(b), factored around the larger term
        logq = lb + np.log(u + (1.0 - u) * np.exp(la - lb))
        return float(ndtri_exp(logq))
    fa = ndtr(a)
    fb = ndtr(b)
    return float(ndtri(fa + u * (fb - fa)))


def gibbs_oracle(
    problem: MtnProblem, x0: np.ndarray, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Systematic-scan Gibbs chain of n draws for a box-truncated Gaussian.

    Each coordinate is redrawn exactly from its univariate truncated-normal
    conditional. Guarded to d <= 10: the scan is O(d^2) per draw in Python
    and exists for validation, not throughput."""
    if not isinstance(problem.constraints, BoxConstraints):
        raise UnsupportedConstraints("the Gibbs oracle handles box constraints only")
    if problem.dim > GIBBS_MAX_DIM:
        raise ValueError(f"Gibbs oracle is guarded to d <= {GIBBS_MAX_DIM}")
    validate_initial(problem, x0)
    prepare(problem, {Need.PRECISION})
    Phi = problem.gaussian.precision
    mu = problem.gaussian.mean
    lo = problem.constraints.lower
    hi = problem.constraints.upper
    d = problem.dim
    sd = 1.0 / np.sqrt(np.diag(Phi))
    x = np.array(x0, dtype=np.float64)
    out = np.empty((n, d))
    for it in range(n):
        for i in range(d):
            r = Phi[i] @ (x - mu) - Phi[i, i] * (x[i] - mu[i])
            m = mu[i] - r / Phi[i, i]
            a = (lo[i] - m) / sd[i]
            b = (hi[i] - m) / sd[i]
            x[i] = m + sd[i] * _trunc_std_normal(a, b, rng.random())
        out[it] = x
    return out


def gibbs_sample(
    problem: MtnProblem,
    x0: np.ndarray,
    n: int,
    rng: np.random.Generator,
    burn_in_frac: float = 0.1,
) -> ChainResult:
    """Run the Gibbs oracle and summarize the post-burn-in chain."""
    t0 = time.perf_counter()
    samples = gibbs_oracle(problem, x0, n, rng)
    wall = time.perf_counter() - t0
    keep = kept_slice(n, burn_in_frac)
    result = summarize(samples[n - keep:], Timings(problem.t_pre, wall))
    result.method = "gibbs-oracle"
    return result


# Benchmark harness.


class Generator(Enum):
    LKJ = "lkj"
    COMPOUND_SYMMETRIC = "compound"
    FROM_FILE = "file"


class Method(str, Enum):
    HARMONIC = "harmonic"
    ZIGZAG = "zigzag"
    ZIGZAG_NUTS = "zigzag-nuts"


@dataclass
class BenchmarkCase:
    name: str
    problem: MtnProblem
    d: int
    generator: Generator
    seed: int
    init: np.ndarray | None = None


@dataclass
class BenchCell:
    """Outcome of one (case, method) benchmark cell."""

    case: str
    d: int
    method: str
    status: str  # ok | DNF | error
    result: ChainResult | None = None
    error: str | None = None
    n_total: int = 0
    wall_total_s: float = 0.0


def parse_case_spec(text: str) -> dict:
    """Parse "kind:key=value:..." case specs.

    Kinds: lkj (d, optional eta, seed), compound (d, rho, seed),
    identity (d), file (path)."""
    parts = text.split(":")
    kind = parts[0].strip().lower()
    params: dict = {"kind": kind, "name": text}
    if kind == "file":
        if len(parts) < 2:
            raise ValueError(f"case {text!r}: file needs a path, e.g. file:problem.json")
        rest = ":".join(parts[1:])
        params["path"] = rest.removeprefix("path=")
        return params
    if kind not in ("lkj", "compound", "identity"):
        raise ValueError(f"case {text!r}: unknown kind {kind!r}")
    for part in parts[1:]:
        if "=" not in part:
            raise ValueError(f"case {text!r}: expected key=value, got {part!r}")
        key, val = part.split("=", 1)
        key = key.strip()
        if key == "d":
            params["d"] = int(val)
        elif key == "rho":
            params["rho"] = float(val)
        elif key == "eta":
            params["eta"] = float(val)
        elif key == "seed":
            params["seed"] = int(val)
        else:
            raise ValueError(f"case {text!r}: unknown key {key!r}")
    if "d" not in params:
        raise ValueError(f"case {text!r}: d is required")
    if kind == "compound" and "rho" not in params:
        raise ValueError(f"case {text!r}: compound needs rho")
    return params


def build_case(text: str, case_index: int, master_seed: int) -> BenchmarkCase:
    """Materialize one case; its generator stream is (master_seed, GEN_STREAM, index)."""
    params = parse_case_spec(text)
    kind = params["kind"]
    if kind == "file":
        problem, init = load_problem(params["path"])
        return BenchmarkCase(
            name=params["name"], problem=problem, d=problem.dim,
            generator=Generator.FROM_FILE, seed=master_seed, init=init,
        )
    d = params["d"]
    if "seed" in params:
        seed = params["seed"]
    else:
        seed = int(np.random.default_rng([master_seed, GEN_STREAM, case_index]).integers(2**31 - 1))
    rng = np.random.default_rng(seed)
    if kind == "lkj":
        cov = gen_lkj(d, params.get("eta", 1.0), rng)
        generator = Generator.LKJ
    elif kind == "compound":
        cov = gen_compound_symmetric(d, params["rho"])
        generator = Generator.COMPOUND_SYMMETRIC
    else:  # identity: compound symmetry at rho = 0, any d >= 1
        cov = np.eye(d)
        generator = Generator.COMPOUND_SYMMETRIC
    problem = positive_orthant_case(cov, np.zeros(d))
    return BenchmarkCase(
        name=params["name"], problem=problem, d=d, generator=generator, seed=seed
    )


def _method_name(method) -> str:
    if isinstance(method, Method):
        return method.value
    name = str(method).strip().lower()
    valid = {m.value for m in Method} | {"gibbs-oracle"}
    if name not in valid:
        raise ValueError(f"unknown method {name!r}")
    return name


def _sample_batch(problem, method, x0, n, rng, validate):
    """One chain segment; returns (samples, sampling wall seconds)."""
    if method == "harmonic":
        samples, wall, _ = harmonic_chain(problem, x0, n, rng, HarmonicOptions(), validate=validate)
    elif method == "zigzag":
        samples, wall, _, _ = zigzag_chain(problem, x0, n, rng, ZigzagConfig(), validate=validate)
    elif method == "zigzag-nuts":
        samples, wall, _, _ = zigzag_chain(
            problem, x0, n, rng, ZigzagConfig(use_nuts=True), validate=validate
        )
    elif method == "gibbs-oracle":
        t0 = time.perf_counter()
        samples = gibbs_oracle(problem, x0, n, rng)
        wall = time.perf_counter() - t0
    else:
        raise ValueError(f"unknown method {method!r}")
    return samples, wall


def _run_cell(args) -> BenchCell:
    """One (case, method) cell: sample in doubling batches until the minimum
    ESS reaches the target or the wall budget runs out (status DNF)."""
    case, method, target_ess, budget_s, master_seed, case_idx, method_idx = args
    problem = copy.deepcopy(case.problem)
    cell = BenchCell(case=case.name, d=case.d, method=method, status="error")
    rng = np.random.default_rng([master_seed, CELL_STREAM, case_idx, method_idx])
    start = time.perf_counter()
    try:
        x0 = case.init if case.init is not None else default_start(problem)
        batch = max(4 * target_ess, MIN_FIRST_BATCH)
        burn = batch - kept_slice(batch, 0.1)  # burn-in applies to the first batch only
        chunks: list[np.ndarray] = []
        wall_sampling = 0.0
        n_total = 0
        first = True
        while True:
            samples, wall = _sample_batch(problem, method, x0, batch, rng, validate=first)
            chunks.append(samples)
            wall_sampling += wall
            n_total += batch
            x0 = samples[-1]
            kept = np.vstack(chunks)[burn:] if len(chunks) > 1 else samples[burn:]
            result = summarize(kept, Timings(problem.t_pre, wall_sampling), target_ess)
            result.method = method
            elapsed = time.perf_counter() - start
            if result.ess_min >= target_ess:
                cell.status = "ok"
                break
            if elapsed >= budget_s:
                cell.status = "DNF"
                break
            batch = n_total  # double the total length each round
            first = False
        result.samples = None  # drop bulk data; the metrics are the product
        cell.result = result
        cell.n_total = n_total
        cell.wall_total_s = time.perf_counter() - start
    except Exception as exc:  # recorded per cell; the table must not abort
        cell.status = "error"
        cell.error = f"{type(exc).__name__}: {exc}"
        cell.wall_total_s = time.perf_counter() - start
    return cell


def run_benchmark(
    cases: list[BenchmarkCase],
    methods: list,
    target_ess: int = DEFAULT_TARGET_ESS,
    time_budget_s: float = DEFAULT_TIME_BUDGET_S,
    seed: int = 0,
    workers: int = 1,
) -> list[BenchCell]:
    """Run every (case, method) cell; DNF and per-cell errors are data.

    Each cell draws from its own stream (seed, CELL_STREAM, case index,
    method index) and deep-copies its problem, so cells are independent and
    reproducible regardless of execution order or worker count."""
    method_names = [_method_name(m) for m in methods]
    jobs = [
        (case, m, target_ess, time_budget_s, seed, ci, mi)
        for ci, case in enumerate(cases)
        for mi, m in enumerate(method_names)
    ]
    if not jobs:
        return []
    if workers <= 1:
        return [_run_cell(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell, jobs))


SUMMARY_COLUMNS = ["case", "d", "method", "t_pre_s", "t_iter_s", "t1_s", "t100_s", "status"]


def write_summary_csv(path: str, cells: list[BenchCell]) -> None:
    """One row per cell with the timing decomposition and final status."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for cell in cells:
            r = cell.result
            if r is None:
                writer.writerow([cell.case, cell.d, cell.method, "", "", "", "", cell.status])
            else:
                writer.writerow([
                    cell.case, cell.d, cell.method,
                    f"{r.t_pre:.6g}", f"{r.t_iter:.6g}", f"{r.t1:.6g}", f"{r.t100:.6g}",
                    cell.status,
                ])


def cell_dict(cell: BenchCell) -> dict:
    out = {
        "case": cell.case,
        "d": cell.d,
        "method": cell.method,
        "status": cell.status,
        "n_total": cell.n_total,
        "wall_total_s": cell.wall_total_s,
    }
    if cell.result is not None:
        out["metrics"] = metrics_dict(cell.result)
    if cell.error is not None:
        out["error"] = cell.error
    return out


def write_cell_jsons(dirpath: str, cells: list[BenchCell]) -> list[str]:
    """One JSON file per cell in dirpath; returns the paths written."""
    os.makedirs(dirpath, exist_ok=True)
    paths = []
    for i, cell in enumerate(cells):
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in f"{cell.case}_{cell.method}")
        path = os.path.join(dirpath, f"cell_{i:03d}_{safe}.json")
        with open(path, "w") as fh:
            json.dump(cell_dict(cell), fh, indent=2)
        paths.append(path)
    return paths
