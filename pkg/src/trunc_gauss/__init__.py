"""Exact-trajectory HMC sampling from truncated multivariate normals.

Two samplers share the problem model: harmonic dynamics (Gaussian momentum,
sinusoidal trajectories, specular wall reflections; boxes or general linear
constraints) and zigzag dynamics (Laplace momentum, piecewise-linear
trajectories; box constraints, optionally driven by a no-U-turn scheme).
Diagnostics report autocorrelation-adjusted effective sample sizes and the
time-to-effective-sample decomposition used by the benchmark harness.
"""

from .bench import (
    BenchCell,
    BenchmarkCase,
    Method,
    build_case,
    default_start,
    gen_compound_symmetric,
    gen_lkj,
    gibbs_oracle,
    gibbs_sample,
    positive_orthant_case,
    run_benchmark,
    write_cell_jsons,
    write_summary_csv,
)
from .diagnostics import (
    ChainResult,
    MomentReport,
    Timings,
    ess_per_dimension,
    ess_univariate,
    metrics_dict,
    moment_check,
    summarize,
)
from .errors import (
    DegenerateSeries,
    DimensionMismatch,
    InfeasibleStart,
    InfeasibleState,
    MissingCholesky,
    NoConvergence,
    NotPositiveDefinite,
    PreconditionViolation,
    SingularDiagonal,
    TooManyBounces,
    TooManyEvents,
    UnsupportedConstraints,
    ZeroNormal,
)
from .harmonic import (
    HarmonicOptions,
    harmonic_chain,
    harmonic_sample,
    propose,
    reflect,
    sample_integration_time,
    whiten,
)
from .linalg import (
    UpperTriangular,
    cholesky_upper,
    invert_spd,
    lanczos_min_eig,
    solve_triangular,
)
from .model import (
    BoxConstraints,
    GaussianSpec,
    LinearConstraints,
    MatrixKind,
    MtnProblem,
    Need,
    box_to_linear,
    load_problem,
    prepare,
    problem_from_dict,
    problem_to_dict,
    save_problem,
    validate_initial,
)
from .zigzag import (
    ZigzagConfig,
    ZigzagState,
    hamiltonian,
    nuts_propose,
    refresh_momentum,
    zigzag_chain,
    zigzag_propose,
    zigzag_sample,
)

__version__ = "0.1.0"

__all__ = [
    "BenchCell",
    "BenchmarkCase",
    "BoxConstraints",
    "ChainResult",
    "DegenerateSeries",
    "DimensionMismatch",
    "GaussianSpec",
    "HarmonicOptions",
    "InfeasibleStart",
    "InfeasibleState",
    "LinearConstraints",
    "MatrixKind",
    "Method",
    "MissingCholesky",
    "MomentReport",
    "MtnProblem",
    "Need",
    "NoConvergence",
    "NotPositiveDefinite",
    "PreconditionViolation",
    "SingularDiagonal",
    "Timings",
    "TooManyBounces",
    "TooManyEvents",
    "UnsupportedConstraints",
    "UpperTriangular",
    "ZeroNormal",
    "ZigzagConfig",
    "ZigzagState",
    "box_to_linear",
    "build_case",
    "cholesky_upper",
    "default_start",
    "ess_per_dimension",
    "ess_univariate",
    "gen_compound_symmetric",
    "gen_lkj",
    "gibbs_oracle",
    "gibbs_sample",
    "hamiltonian",
    "harmonic_chain",
    "harmonic_sample",
    "invert_spd",
    "lanczos_min_eig",
    "load_problem",
    "metrics_dict",
    "moment_check",
    "nuts_propose",
    "positive_orthant_case",
    "prepare",
    "problem_from_dict",
    "problem_to_dict",
    "propose",
    "reflect",
    "refresh_momentum",
    "run_benchmark",
    "sample_integration_time",
    "save_problem",
    "solve_triangular",
    "summarize",
    "validate_initial",
    "whiten",
    "write_cell_jsons",
    "write_summary_csv",
    "zigzag_chain",
    "zigzag_propose",
    "zigzag_sample",
]
