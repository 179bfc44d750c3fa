"""Problem definition: a Gaussian plus constraints, with prepared caches.

A problem owns exactly one of {covariance, precision}; whatever else a
sampler needs (Cholesky factor, derived precision, minimal eigenvalue) is
computed once by :func:`prepare` and cached on the problem. Feasibility of
the region is the caller's responsibility: validation only checks that a
given starting point is strictly interior, it never searches for one.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    DimensionMismatch,
    InfeasibleStart,
    MissingCholesky,
    NoConvergence,
    NotPositiveDefinite,
)
from .linalg import UpperTriangular, cholesky_upper, invert_spd, lanczos_min_eig

# A starting point must clear every constraint by more than this.
STRICT_INTERIOR_TOL = 1e-12
# Fall back to a dense eigensolve when Lanczos stalls and the problem is small.
DENSE_EIG_FALLBACK_DIM = 2000


class MatrixKind(str, Enum):
    COVARIANCE = "covariance"
    PRECISION = "precision"


class Need(str, Enum):
    """What prepare() must have cached before a sampler can run."""

    CHOLESKY = "cholesky_of_given"
    PRECISION = "precision_matrix"
    MIN_EIGENVALUE = "min_eigenvalue"


@dataclass
class GaussianSpec:
    """Mean plus one of covariance or precision, with lazily prepared caches."""

    dim: int
    mean: np.ndarray
    matrix_kind: MatrixKind
    matrix: np.ndarray
    chol_upper: UpperTriangular | None = None
    precision_cache: np.ndarray | None = None
    lambda_min: float | None = None

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        self.matrix_kind = MatrixKind(self.matrix_kind)
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.mean.shape != (self.dim,):
            raise DimensionMismatch(f"mean has shape {self.mean.shape}, expected ({self.dim},)")
        if self.matrix.shape != (self.dim, self.dim):
            raise DimensionMismatch(
                f"matrix has shape {self.matrix.shape}, expected ({self.dim}, {self.dim})"
            )
        if not np.all(np.isfinite(self.mean)):
            raise ValueError("mean contains non-finite entries")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("matrix contains non-finite entries")
        scale = np.linalg.norm(self.matrix)
        if scale > 0 and np.linalg.norm(self.matrix - self.matrix.T) > 1e-8 * scale:
            raise ValueError("matrix must be symmetric")
        if self.chol_upper is not None:
            U = self.chol_upper.data
            if np.linalg.norm(U.T @ U - self.matrix) > 1e-8 * max(scale, 1e-300):
                raise ValueError("chol_upper does not reconstruct the stored matrix")
        if self.lambda_min is not None and self.lambda_min <= 0:
            raise ValueError("lambda_min must be positive when present")

    @property
    def precision(self) -> np.ndarray:
        """The precision matrix; requires prepare(Need.PRECISION) when covariance was given."""
        if self.matrix_kind is MatrixKind.PRECISION:
            return self.matrix
        if self.precision_cache is None:
            raise MissingCholesky("precision not prepared; call prepare with Need.PRECISION")
        return self.precision_cache


@dataclass
class BoxConstraints:
    """Elementwise bounds lower <= x <= upper; infinities mark absent bounds."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=np.float64)
        self.upper = np.asarray(self.upper, dtype=np.float64)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise DimensionMismatch("lower and upper must be 1-d arrays of equal length")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("bounds may not contain NaN")
        if not np.all(self.lower < self.upper):
            raise ValueError("every lower bound must be strictly below its upper bound")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


@dataclass
class LinearConstraints:
    """Halfspace constraints (F x + g)_i >= 0."""

    F: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        self.F = np.atleast_2d(np.asarray(self.F, dtype=np.float64))
        self.g = np.asarray(self.g, dtype=np.float64)
        if self.F.ndim != 2:
            raise DimensionMismatch("F must be a 2-d array")
        if self.g.shape != (self.F.shape[0],):
            raise DimensionMismatch(
                f"g has shape {self.g.shape}, expected ({self.F.shape[0]},)"
            )
        if not (np.all(np.isfinite(self.F)) and np.all(np.isfinite(self.g))):
            raise ValueError("constraints contain non-finite entries")
        if self.F.shape[0] > 0 and np.any(np.all(self.F == 0.0, axis=1)):
            raise ValueError("constraint rows must be non-zero")

    @property
    def count(self) -> int:
        return self.F.shape[0]


Constraints = BoxConstraints | LinearConstraints


@dataclass
class MtnProblem:
    """A truncated multivariate normal sampling problem."""

    gaussian: GaussianSpec
    constraints: Constraints
    t_pre: float = field(default=0.0)

    def __post_init__(self):
        d = self.gaussian.dim
        if isinstance(self.constraints, BoxConstraints):
            if self.constraints.dim != d:
                raise DimensionMismatch(
                    f"box constraints have dimension {self.constraints.dim}, expected {d}"
                )
        elif isinstance(self.constraints, LinearConstraints):
            if self.constraints.count > 0 and self.constraints.F.shape[1] != d:
                raise DimensionMismatch(
                    f"F has {self.constraints.F.shape[1]} columns, expected {d}"
                )
        else:
            raise TypeError(f"unsupported constraint type {type(self.constraints)!r}")

    @property
    def dim(self) -> int:
        return self.gaussian.dim


def validate_initial(problem: MtnProblem, x0: np.ndarray) -> None:
    """Check that x0 lies strictly inside the feasible region.

    A point within STRICT_INTERIOR_TOL of any boundary counts as infeasible.
    Raises DimensionMismatch or InfeasibleStart with the index of the first
    violated constraint (coordinate for boxes, row for linear constraints).
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (problem.dim,):
        raise DimensionMismatch(f"x0 has shape {x0.shape}, expected ({problem.dim},)")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 contains non-finite entries")
    cons = problem.constraints
    if isinstance(cons, BoxConstraints):
        for i in range(problem.dim):
            if not (x0[i] - cons.lower[i] > STRICT_INTERIOR_TOL
                    and cons.upper[i] - x0[i] > STRICT_INTERIOR_TOL):
                raise InfeasibleStart(i)
    else:
        slack = cons.F @ x0 + cons.g if cons.count else np.zeros(0)
        for j in range(cons.count):
            if not slack[j] > STRICT_INTERIOR_TOL:
                raise InfeasibleStart(j)


def box_to_linear(box: BoxConstraints) -> LinearConstraints:
    """Rewrite a box as halfspace rows, one per finite bound.

    Finite lower bounds come first (row e_i, offset -l_i), then finite upper
    bounds (row -e_i, offset u_i), each in coordinate order.
    """
    d = box.dim
    rows = []
    offsets = []
    for i in range(d):
        if np.isfinite(box.lower[i]):
            e = np.zeros(d)
            e[i] = 1.0
            rows.append(e)
            offsets.append(-box.lower[i])
    for i in range(d):
        if np.isfinite(box.upper[i]):
            e = np.zeros(d)
            e[i] = -1.0
            rows.append(e)
            offsets.append(box.upper[i])
    F = np.array(rows) if rows else np.zeros((0, d))
    g = np.array(offsets)
    return LinearConstraints(F, g)


def prepare(problem: MtnProblem, needs: set[Need] | frozenset[Need]) -> tuple[MtnProblem, float]:
    """Populate the caches a sampler will need; returns (problem, seconds spent).

    Idempotent: anything already cached is left untouched, so a second call
    with the same needs costs nothing and mutates nothing. Time spent is also
    accumulated on problem.t_pre.
    """
    needs = {Need(n) for n in needs}
    g = problem.gaussian
    t0 = time.perf_counter()

    if Need.CHOLESKY in needs and g.chol_upper is None:
        g.chol_upper = cholesky_upper(g.matrix)

    needs_precision = Need.PRECISION in needs or Need.MIN_EIGENVALUE in needs
    if needs_precision and g.matrix_kind is MatrixKind.COVARIANCE and g.precision_cache is None:
        g.precision_cache = invert_spd(g.matrix)

    if Need.MIN_EIGENVALUE in needs and g.lambda_min is None:
        Phi = g.precision
        try:
            lam = lanczos_min_eig(Phi)
        except NoConvergence:
            if g.dim > DENSE_EIG_FALLBACK_DIM:
                raise
            lam = float(np.linalg.eigvalsh(Phi)[0])
        if lam <= 0:
            raise NotPositiveDefinite("precision matrix has a non-positive eigenvalue")
        g.lambda_min = lam

    dt = time.perf_counter() - t0
    problem.t_pre += dt
    return problem, dt


# JSON problem files: matrix rows as nested lists, bounds use "-inf"/"inf" strings.


def _bound_to_json(value: float):
    if value == np.inf:
        return "inf"
    if value == -np.inf:
        return "-inf"
    return float(value)


def _bound_from_json(value) -> float:
    if isinstance(value, str):
        if value == "inf":
            return np.inf
        if value == "-inf":
            return -np.inf
        raise ValueError(f"unrecognized bound sentinel {value!r}")
    return float(value)


def problem_to_dict(problem: MtnProblem, init: np.ndarray | None = None) -> dict:
    g = problem.gaussian
    out = {
        "dim": g.dim,
        "mean": [float(v) for v in g.mean],
        "matrix_kind": g.matrix_kind.value,
        "matrix": [[float(v) for v in row] for row in g.matrix],
    }
    cons = problem.constraints
    if isinstance(cons, BoxConstraints):
        out["lower"] = [_bound_to_json(v) for v in cons.lower]
        out["upper"] = [_bound_to_json(v) for v in cons.upper]
    else:
        out["F"] = [[float(v) for v in row] for row in cons.F]
        out["g"] = [float(v) for v in cons.g]
    if init is not None:
        out["init"] = [float(v) for v in np.asarray(init, dtype=np.float64)]
    return out


def problem_from_dict(data: dict) -> tuple[MtnProblem, np.ndarray | None]:
    """Build a problem from its JSON dict; returns (problem, optional init point)."""
    try:
        dim = int(data["dim"])
        mean = np.asarray(data["mean"], dtype=np.float64)
        kind = MatrixKind(data["matrix_kind"])
        matrix = np.asarray(data["matrix"], dtype=np.float64)
    except KeyError as exc:
        raise ValueError(f"problem file is missing required field {exc}") from exc
    gaussian = GaussianSpec(dim, mean, kind, matrix)
    has_box = "lower" in data or "upper" in data
    has_linear = "F" in data or "g" in data
    if has_box and has_linear:
        raise ValueError("problem file mixes box bounds with F/g constraints")
    if has_box:
        lower = np.array([_bound_from_json(v) for v in data["lower"]])
        upper = np.array([_bound_from_json(v) for v in data["upper"]])
        constraints: Constraints = BoxConstraints(lower, upper)
    elif has_linear:
        F = np.asarray(data["F"], dtype=np.float64)
        if F.size == 0:
            F = F.reshape(0, dim)
        constraints = LinearConstraints(F, np.asarray(data["g"], dtype=np.float64))
    else:
        raise ValueError("problem file defines no constraints (need lower/upper or F/g)")
    problem = MtnProblem(gaussian, constraints)
    init = None
    if "init" in data:
        init = np.asarray(data["init"], dtype=np.float64)
        if init.shape != (dim,):
            raise DimensionMismatch(f"init has shape {init.shape}, expected ({dim},)")
    return problem, init


def save_problem(problem: MtnProblem, path: str, init: np.ndarray | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_dict(problem, init), fh, indent=2)
        fh.write("\n")


def load_problem(path: str) -> tuple[MtnProblem, np.ndarray | None]:
    with open(path) as fh:
        return problem_from_dict(json.load(fh))
