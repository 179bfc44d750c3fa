"""Exact-trajectory HMC for truncated Gaussians via harmonic dynamics.

The chain runs in whitened coordinates where the target is a standard
normal: positions rotate along exact sinusoids, so the only work is finding
where a trajectory first crosses a constraint wall and reflecting the
velocity there. Proposals are always accepted.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .diagnostics import ChainResult, Timings, summarize
from .errors import (
    InfeasibleState,
    MissingCholesky,
    TooManyBounces,
    ZeroNormal,
)
from .model import (
    BoxConstraints,
    LinearConstraints,
    MatrixKind,
    MtnProblem,
    Need,
    box_to_linear,
    prepare,
    validate_initial,
)

# Wall-hit roots closer to zero than this are re-detections of the wall just
# bounced off and are discarded.
EPS_WALL_TIME = 1e-10
# A trajectory tangent to a wall within this relative margin never crosses it.
TANGENT_RTOL = 1e-12
# Slack this far below zero means the state has genuinely left the region.
FEASIBILITY_TOL = 1e-9

DEFAULT_TIME_LOWER = math.pi / 8
DEFAULT_TIME_UPPER = math.pi / 2
DEFAULT_MAX_BOUNCES = 10**6

TWO_PI = 2.0 * math.pi


@dataclass
class WhitenedConstraints:
    """Halfspace constraints (Fw y + gw)_i >= 0 in whitened coordinates."""

    Fw: np.ndarray
    gw: np.ndarray

    def __post_init__(self):
        self.Fw = np.atleast_2d(np.asarray(self.Fw, dtype=np.float64))
        self.gw = np.asarray(self.gw, dtype=np.float64)
        if self.gw.shape != (self.Fw.shape[0],):
            raise ValueError("gw length must match the number of rows of Fw")
        self._gram: np.ndarray | None = None

    @property
    def count(self) -> int:
        return self.Fw.shape[0]

    @property
    def gram(self) -> np.ndarray:
        """Fw Fw^T, cached; row j reflections only need its j-th column."""
        if self._gram is None:
            self._gram = self.Fw @ self.Fw.T
        return self._gram

    def slack(self, y: np.ndarray) -> np.ndarray:
        return self.Fw @ y + self.gw


@dataclass
class HarmonicState:
    """Whitened position and velocity, plus total integrated time."""

    y: np.ndarray
    v: np.ndarray
    t_elapsed: float = 0.0


class WhitenedSpace:
    """Coordinate maps between the original x-space and the whitened y-space.

    With precision Phi = U^T U:  y = U (x - mu),  x = mu + U^{-1} y.
    With covariance Sigma = U^T U:  y = U^{-T} (x - mu),  x = mu + U^T y.
    Both directions use triangular solves only, never a full inverse.
    """

    def __init__(self, problem: MtnProblem):
        g = problem.gaussian
        if g.chol_upper is None:
            raise MissingCholesky(
                "whitening needs the Cholesky factor; call prepare with Need.CHOLESKY"
            )
        self.kind = g.matrix_kind
        self.U = g.chol_upper
        self.mu = g.mean
        cons = problem.constraints
        if isinstance(cons, BoxConstraints):
            cons = box_to_linear(cons)
        self.original = cons
        self.constraints = self._whiten_constraints(cons)

    def _whiten_constraints(self, cons: LinearConstraints) -> WhitenedConstraints:
        F, g = cons.F, cons.g
        gw = F @ self.mu + g if cons.count else g.copy()
        if cons.count == 0:
            return WhitenedConstraints(np.zeros((0, self.mu.shape[0])), gw)
        if self.kind is MatrixKind.PRECISION:
            # Fw = F U^{-1}: solve U^T Z = F^T for Z = Fw^T.
            Fw = scipy.linalg.solve_triangular(self.U.data, F.T, trans="T", lower=False).T
        else:
            Fw = F @ self.U.data.T
        return WhitenedConstraints(Fw, gw)

    def whiten(self, x: np.ndarray) -> np.ndarray:
        diff = np.asarray(x, dtype=np.float64) - self.mu
        if self.kind is MatrixKind.PRECISION:
            return self.U.data @ diff
        return scipy.linalg.solve_triangular(self.U.data, diff, trans="T", lower=False)

    def unwhiten(self, y: np.ndarray) -> np.ndarray:
        if self.kind is MatrixKind.PRECISION:
            return self.mu + scipy.linalg.solve_triangular(self.U.data, y, lower=False)
        return self.mu + self.U.data.T @ y


def whiten(problem: MtnProblem) -> WhitenedSpace:
    """Build the whitened-coordinate view of a prepared problem."""
    return WhitenedSpace(problem)


def position_at(y0: np.ndarray, v0: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact harmonic flow: y(t) = y0 cos t + v0 sin t, v(t) = v0 cos t - y0 sin t."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0.0:
        return y0, v0
    c, s = math.cos(t), math.sin(t)
    return y0 * c + v0 * s, v0 * c - y0 * s


def _first_hit(a: np.ndarray, b: np.ndarray, c: np.ndarray, horizon: float):
    """Smallest root in (EPS_WALL_TIME, horizon] of a_j cos t + b_j sin t + c_j = 0.

    Each row is r cos(t - phi) + c with r = sqrt(a^2 + b^2), phi = atan2(b, a);
    rows with r - |c| <= TANGENT_RTOL * r never cross. Returns (t, row) or
    (inf, -1). Ties go to the smaller row index.
    """
    if a.shape[0] == 0:
        return math.inf, -1
    r = np.hypot(a, b)
    reachable = (r > 0.0) & (r - np.abs(c) > TANGENT_RTOL * r)
    if not np.any(reachable):
        return math.inf, -1
    phi = np.arctan2(b, a)
    alpha = np.arccos(np.clip(-c / np.where(r > 0.0, r, 1.0), -1.0, 1.0))
    t1 = np.mod(phi + alpha, TWO_PI)
    t2 = np.mod(phi - alpha, TWO_PI)
    t1[t1 <= EPS_WALL_TIME] += TWO_PI
    t2[t2 <= EPS_WALL_TIME] += TWO_PI
    times = np.where(reachable, np.minimum(t1, t2), math.inf)
    j = int(np.argmin(times))
    t = float(times[j])
    if t > horizon:
        return math.inf, -1
    return t, j


def first_wall_hit(
    y0: np.ndarray, v0: np.ndarray, cons: WhitenedConstraints, horizon: float
) -> tuple[float, int] | None:
    """First time in (EPS_WALL_TIME, horizon] at which any wall slack reaches zero.

    Returns (t, row index) or None. Raises InfeasibleState when the starting
    slack is already below -FEASIBILITY_TOL on any row.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    a = cons.Fw @ y0
    b = cons.Fw @ v0
    if np.any(a + cons.gw < -FEASIBILITY_TOL):
        raise InfeasibleState("wall slack below tolerance at segment start")
    t, j = _first_hit(a, b, cons.gw, horizon)
    if j < 0:
        return None
    return t, j


def reflect(v: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Specular reflection of v in the wall with inward normal f."""
    n2 = float(f @ f)
    if n2 == 0.0:
        raise ZeroNormal("cannot reflect against a zero constraint normal")
    return v - (2.0 * float(f @ v) / n2) * f


def _sweep_grazing(v, a, b, c, cons, G, band):
    """Reflect every wall resting on (or within `band` of) zero slack with
    outward velocity. Such walls sit inside the EPS_WALL_TIME dead zone of the
    root finder — simultaneous hits park all but the bounced wall there — and
    would otherwise only be seen again after going around the far side of the
    trajectory's ellipse. A few passes, since one reflection can turn another
    grazing wall outward. Returns (v, b, reflections)."""
    nref = 0
    for _ in range(8):
        changed = False
        slack = a + c
        cut = band + EPS_WALL_TIME * (np.abs(a) + np.abs(b) + np.abs(c))
        for j in np.flatnonzero(slack <= cut):
            if b[j] < 0.0:
                coef = 2.0 * b[j] / G[j, j]
                v = v - coef * cons.Fw[j]
                b = b - coef * G[:, j]
                nref += 1
                changed = True
        if not changed:
            break
    return v, b, nref


def _run_trajectory(
    y: np.ndarray,
    v: np.ndarray,
    T: float,
    cons: WhitenedConstraints,
    max_bounces: int,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Advance (y, v) by total time T with reflections; returns bounce count."""
    if cons.count == 0:
        y, v = position_at(y, v, T)
        return y, v, 0

    G = cons.gram
    a = cons.Fw @ y
    b = cons.Fw @ v
    c = cons.gw
    if np.any(a + c < -FEASIBILITY_TOL):
        raise InfeasibleState("entering proposal from an infeasible state")
    # The entry band is the clamp tolerance: a restart from an emitted sample
    # may rest up to FEASIBILITY_TOL outside a wall and must reflect rather
    # than slip through the root finder's dead zone.
    v, b, bounces = _sweep_grazing(v, a, b, c, cons, G, FEASIBILITY_TOL)

    remaining = float(T)
    while True:
        t, j = _first_hit(a, b, c, remaining)
        if j < 0:
            y, v = position_at(y, v, remaining)
            break
        y, v = position_at(y, v, t)
        # Slacks rotate exactly like the state, so update them incrementally.
        ct, st = math.cos(t), math.sin(t)
        a, b = a * ct + b * st, b * ct - a * st
        coef = 2.0 * b[j] / G[j, j]
        v = v - coef * cons.Fw[j]
        b = b - coef * G[:, j]
        v, b, nswept = _sweep_grazing(v, a, b, c, cons, G, 0.0)
        remaining -= t
        bounces += 1 + nswept
        if bounces > max_bounces:
            raise TooManyBounces(f"exceeded {max_bounces} bounces in one trajectory")

    final_slack = cons.slack(y)
    low = final_slack < 0.0
    if np.any(low):
        if np.any(final_slack < -FEASIBILITY_TOL):
            raise InfeasibleState("trajectory left the feasible region")
        for j in np.flatnonzero(low):
            y = y + (-final_slack[j] / G[j, j]) * cons.Fw[j]
    return y, v, bounces


def propose(
    state: HarmonicState,
    T: float,
    cons: WhitenedConstraints,
    max_bounces: int = DEFAULT_MAX_BOUNCES,
) -> HarmonicState:
    """Run the exact dynamics for duration T, reflecting at each wall hit.

    The segment clock restarts after every bounce. The returned position is
    clamped back onto the feasible side if rounding left any slack in
    [-FEASIBILITY_TOL, 0); a slack below -FEASIBILITY_TOL raises
    InfeasibleState.
    """
    if T <= 0:
        raise ValueError("integration time must be positive")
    y = np.array(state.y, dtype=np.float64)
    v = np.array(state.v, dtype=np.float64)
    y, v, _ = _run_trajectory(y, v, T, cons, max_bounces)
    return HarmonicState(y, v, state.t_elapsed + T)


def sample_integration_time(
    rng: np.random.Generator,
    lower: float = DEFAULT_TIME_LOWER,
    upper: float = DEFAULT_TIME_UPPER,
) -> float:
    """Integration time drawn uniformly from [lower, upper]."""
    if not 0 < lower <= upper:
        raise ValueError("need 0 < lower <= upper")
    return float(rng.uniform(lower, upper))


@dataclass
class HarmonicOptions:
    """Tuning knobs for the harmonic sampler."""

    time_lower: float = DEFAULT_TIME_LOWER
    time_upper: float = DEFAULT_TIME_UPPER
    fixed_time: float | None = None
    burn_in_frac: float = 0.1
    max_bounces: int = DEFAULT_MAX_BOUNCES

    def __post_init__(self):
        if not 0 < self.time_lower <= self.time_upper:
            raise ValueError("need 0 < time_lower <= time_upper")
        if self.fixed_time is not None and self.fixed_time <= 0:
            raise ValueError("fixed_time must be positive")
        if not 0 <= self.burn_in_frac < 1:
            raise ValueError("burn_in_frac must lie in [0, 1)")
        if self.max_bounces < 1:
            raise ValueError("max_bounces must be positive")


def _clamp_original(x: np.ndarray, constraints) -> np.ndarray:
    """Snap a sample onto the feasible set when rounding pushed it just outside."""
    if isinstance(constraints, BoxConstraints):
        lo, hi = constraints.lower, constraints.upper
        if np.any(lo - x > FEASIBILITY_TOL) or np.any(x - hi > FEASIBILITY_TOL):
            raise InfeasibleState("emitted sample violates box constraints")
        return np.clip(x, lo, hi)
    if constraints.count == 0:
        return x
    F, g = constraints.F, constraints.g
    s = F @ x + g
    if np.any(s < -FEASIBILITY_TOL):
        raise InfeasibleState("emitted sample violates linear constraints")
    norms2 = np.einsum("ij,ij->i", F, F)
    for _ in range(8):
        neg = s < 0.0
        if not np.any(neg):
            break
        for j in np.flatnonzero(neg):
            x = x + (-s[j] / norms2[j]) * F[j]
        s = F @ x + g
    if np.any(s < 0.0):
        raise InfeasibleState("could not clamp sample back onto the feasible set")
    return x


def kept_slice(n: int, burn_in_frac: float) -> int:
    """Number of post-burn-in rows: floor(n * (1 - burn_in_frac)), computed robustly."""
    return int(math.floor(n * (1.0 - burn_in_frac) + 1e-9))


def harmonic_chain(
    problem: MtnProblem,
    x0: np.ndarray,
    n: int,
    rng: np.random.Generator,
    opts: HarmonicOptions | None = None,
    validate: bool = True,
) -> tuple[np.ndarray, float, int]:
    """Raw chain of n draws; returns (samples, sampling seconds, total bounces).

    validate=False skips the strict-interior check on x0, for continuation
    runs restarting from an emitted sample that may sit on a wall."""
    opts = opts or HarmonicOptions()
    if validate:
        validate_initial(problem, x0)
    prepare(problem, {Need.CHOLESKY})
    ws = whiten(problem)
    cons = ws.constraints
    _ = cons.gram  # build once before the clock-sensitive loop
    d = problem.dim
    y = ws.whiten(np.asarray(x0, dtype=np.float64))
    samples = np.empty((n, d))
    bounces = 0
    t0 = time.perf_counter()
    for i in range(n):
        v = rng.standard_normal(d)
        if opts.fixed_time is not None:
            T = opts.fixed_time
        else:
            T = sample_integration_time(rng, opts.time_lower, opts.time_upper)
        y, v, nb = _run_trajectory(y, v, T, cons, opts.max_bounces)
        bounces += nb
        samples[i] = _clamp_original(ws.unwhiten(y), problem.constraints)
    wall = time.perf_counter() - t0
    return samples, wall, bounces


def harmonic_sample(
    problem: MtnProblem,
    x0: np.ndarray,
    n: int,
    rng: np.random.Generator,
    opts: HarmonicOptions | None = None,
) -> ChainResult:
    """Sample n draws and summarize the post-burn-in chain."""
    opts = opts or HarmonicOptions()
    samples, wall, bounces = harmonic_chain(problem, x0, n, rng, opts)
    keep = kept_slice(n, opts.burn_in_frac)
    kept = samples[n - keep:]
    result = summarize(kept, Timings(problem.t_pre, wall))
    result.method = "harmonic"
    result.n_events = bounces
    return result
