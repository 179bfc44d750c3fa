"""Dense symmetric linear algebra used by the samplers.

Factorizations and solves wrap LAPACK-backed routines; the minimal-eigenvalue
solver is a Lanczos iteration with full reorthogonalization, since only a
crude relative accuracy is needed and the matrices are well inside dense
range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NoConvergence, NotPositiveDefinite, SingularDiagonal

# Pivot acceptance threshold for Cholesky, relative to the largest diagonal entry.
PIVOT_RTOL = 1e-14
# Relative symmetry tolerance for inputs that claim to be symmetric.
SYMMETRY_RTOL = 1e-8

DEFAULT_LANCZOS_TOL = 1e-6
DEFAULT_LANCZOS_MAX_ITERS = 300


@dataclass
class UpperTriangular:
    """Upper-triangular factor with a strictly positive diagonal."""

    dim: int
    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.shape != (self.dim, self.dim):
            raise ValueError(f"expected ({self.dim}, {self.dim}) data, got {self.data.shape}")
        if np.any(np.tril(self.data, -1) != 0.0):
            raise ValueError("below-diagonal entries must be exactly zero")
        if np.any(np.diag(self.data) <= 0.0):
            raise SingularDiagonal("triangular factor has a non-positive diagonal entry")

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.data)


def _check_square_symmetric(M: np.ndarray, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    scale = np.linalg.norm(M)
    if scale > 0 and np.linalg.norm(M - M.T) > SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} is not symmetric")
    return M


def cholesky_upper(M: np.ndarray) -> UpperTriangular:
    """Factor a symmetric positive definite M as U^T U with U upper triangular.

    Row-by-row factorization so a failing pivot can be reported by index:
    raises NotPositiveDefinite(pivot=j) when pivot j falls at or below
    PIVOT_RTOL times the largest diagonal entry.
    """
    M = _check_square_symmetric(M, "matrix")
    d = M.shape[0]
    if d == 0:
        return UpperTriangular(0, np.zeros((0, 0)))
    threshold = PIVOT_RTOL * float(np.max(np.diag(M)))
    U = np.zeros((d, d))
    for j in range(d):
        row = M[j, j:] - U[:j, j] @ U[:j, j:]
        pivot = row[0]
        if not pivot > threshold:
            raise NotPositiveDefinite(
                f"Cholesky pivot {j} is {pivot:.3e} (threshold {threshold:.3e})", pivot=j
            )
        ujj = np.sqrt(pivot)
        U[j, j] = ujj
        U[j, j + 1:] = row[1:] / ujj
    return UpperTriangular(d, U)


def solve_triangular(U: UpperTriangular | np.ndarray, b: np.ndarray, transposed: bool = False) -> np.ndarray:
    """Solve U y = b, or U^T y = b when transposed, for upper-triangular U."""
    data = U.data if isinstance(U, UpperTriangular) else np.asarray(U, dtype=np.float64)
    if np.any(np.diag(data) == 0.0):
        raise SingularDiagonal("triangular solve with a zero diagonal entry")
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != data.shape[0]:
        raise ValueError(f"right-hand side has length {b.shape[0]}, expected {data.shape[0]}")
    if data.shape[0] == 0:
        return np.zeros_like(b)
    return scipy.linalg.solve_triangular(data, b, trans="T" if transposed else "N", lower=False)


def invert_spd(M: np.ndarray) -> np.ndarray:
    """Invert a symmetric positive definite matrix via its Cholesky factor.

    The result is symmetrized exactly before returning.
    """
    U = cholesky_upper(M)
    d = U.dim
    if d == 0:
        return np.zeros((0, 0))
    Uinv = scipy.linalg.solve_triangular(U.data, np.eye(d), lower=False)
    Minv = Uinv @ Uinv.T
    return (Minv + Minv.T) / 2.0


def lanczos_min_eig(
    Phi: np.ndarray,
    max_iters: int | None = None,
    tol: float = DEFAULT_LANCZOS_TOL,
    rng: np.random.Generator | None = None,
) -> float:
    """Minimal eigenvalue of a symmetric positive definite matrix.

    Lanczos iteration with full reorthogonalization of each new Krylov
    vector against all previous ones. Convergence is judged by the Ritz
    residual ||Phi q - lambda q|| <= tol * lambda for the smallest Ritz
    pair. A fixed-seed start vector keeps results deterministic unless an
    explicit generator is supplied.
    """
    Phi = _check_square_symmetric(Phi, "matrix")
    d = Phi.shape[0]
    if d == 0:
        raise ValueError("matrix is empty")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iters is None:
        max_iters = min(d, DEFAULT_LANCZOS_MAX_ITERS)
    max_iters = min(max_iters, d)
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    if rng is None:
        rng = np.random.default_rng(0)

    scale = float(np.linalg.norm(Phi, ord=np.inf))
    Q = np.zeros((d, max_iters))
    alphas = np.zeros(max_iters)
    betas = np.zeros(max_iters)  # betas[k] couples vectors k and k+1

    q = rng.standard_normal(d)
    q /= np.linalg.norm(q)
    Q[:, 0] = q
    r = Phi @ q
    alphas[0] = q @ r
    r = r - alphas[0] * q

    for k in range(max_iters):
        if k > 0:
            w = Phi @ Q[:, k]
            alphas[k] = Q[:, k] @ w
            r = w - alphas[k] * Q[:, k] - betas[k - 1] * Q[:, k - 1]
        # Full reorthogonalization, applied twice to scrub rounding residue.
        for _ in range(2):
            r -= Q[:, : k + 1] @ (Q[:, : k + 1].T @ r)
        beta = float(np.linalg.norm(r))
        theta, s = _smallest_ritz_pair(alphas[: k + 1], betas[:k])
        residual = beta * abs(s[-1])
        if residual <= tol * abs(theta) or beta <= 1e-14 * max(scale, 1.0):
            # Invariant subspace (happy breakdown) also lands here: the
            # tridiagonal block then holds exact eigenvalues.
            return float(theta)
        if k + 1 < max_iters:
            betas[k] = beta
            Q[:, k + 1] = r / beta
    raise NoConvergence(max_iters)


def _smallest_ritz_pair(alphas: np.ndarray, betas: np.ndarray) -> tuple[float, np.ndarray]:
    if len(alphas) == 1:
        return float(alphas[0]), np.ones(1)
    vals, vecs = scipy.linalg.eigh_tridiagonal(alphas, betas, select="i", select_range=(0, 0))
    return float(vals[0]), vecs[:, 0]
