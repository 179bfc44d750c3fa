"""Zigzag dynamics with Laplace momentum for box-truncated Gaussians.

Between events the position moves at unit speed along v = sign(p) while the
momentum follows an exact quadratic in time, so trajectories are advanced
event-to-event analytically: a momentum coordinate reaching zero flips that
velocity, a coordinate reaching its bound reflects. A no-U-turn variant
doubles trajectory segments until the path folds back on itself.

The event loops are compiled with numba; the module-level operations are
thin wrappers over the same kernels.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from numba import njit

from .diagnostics import ChainResult, Timings, summarize
from .errors import (
    InfeasibleState,
    PreconditionViolation,
    TooManyEvents,
    UnsupportedConstraints,
)
from .harmonic import kept_slice
from .model import (
    BoxConstraints,
    MtnProblem,
    Need,
    prepare,
    validate_initial,
)

logger = logging.getLogger("trunc_gauss.zigzag")

# Gradient-event roots below 1e-12 * (1 + horizon) are rounding ghosts.
GRAD_ROOT_EPS_REL = 1e-12
# Events closer together than this are treated as simultaneous; the boundary
# bounce is processed first since it can cancel the pending momentum flip.
SIMULTANEITY_TOL = 1e-12
# Entry tolerance for applying an event to a state.
EVENT_STATE_TOL = 1e-9

DEFAULT_MAX_EVENTS = 10**7
DEFAULT_MAX_TREE_DEPTH = 10

STATUS_OK = 0
STATUS_TOO_MANY_EVENTS = 1


def default_travel_time(lambda_min: float) -> float:
    """Default trajectory duration: sqrt(2) / sqrt(lambda_min)."""
    if lambda_min <= 0:
        raise ValueError("lambda_min must be positive")
    return math.sqrt(2.0 / lambda_min)


def default_base_time(lambda_min: float) -> float:
    """Default duration of one tree segment: 0.1 / sqrt(lambda_min)."""
    if lambda_min <= 0:
        raise ValueError("lambda_min must be positive")
    return 0.1 / math.sqrt(lambda_min)


@dataclass
class ZigzagConfig:
    """Tuning for the zigzag samplers; None fields default from lambda_min."""

    T: float | None = None
    t_base: float | None = None
    use_nuts: bool = False
    max_tree_depth: int = DEFAULT_MAX_TREE_DEPTH
    max_events_per_proposal: int = DEFAULT_MAX_EVENTS
    burn_in_frac: float = 0.1

    def __post_init__(self):
        if self.T is not None and self.T <= 0:
            raise ValueError("T must be positive")
        if self.t_base is not None and self.t_base <= 0:
            raise ValueError("t_base must be positive")
        if self.max_tree_depth < 1:
            raise ValueError("max_tree_depth must be at least 1")
        if self.max_events_per_proposal < 1:
            raise ValueError("max_events_per_proposal must be positive")
        if not 0 <= self.burn_in_frac < 1:
            raise ValueError("burn_in_frac must lie in [0, 1)")

    def resolved(self, lambda_min: float) -> "ZigzagConfig":
        """Fill default T and t_base from the precision's minimal eigenvalue."""
        return replace(
            self,
            T=self.T if self.T is not None else default_travel_time(lambda_min),
            t_base=self.t_base if self.t_base is not None else default_base_time(lambda_min),
        )


class EventKind(Enum):
    GRADIENT_FLIP = "gradient_flip"
    BOUNDARY_BOUNCE = "boundary_bounce"


@dataclass
class ZigzagState:
    """Position, momentum, velocity, and the two O(d)-updatable caches.

    grad = Phi (x - mu) and phi_v = Phi v; Phi and mu ride along so the
    state is self-contained for the dynamics.
    """

    x: np.ndarray
    p: np.ndarray
    v: np.ndarray
    grad: np.ndarray
    phi_v: np.ndarray
    Phi: np.ndarray
    mu: np.ndarray

    @classmethod
    def from_position(
        cls, problem: MtnProblem, x: np.ndarray, p: np.ndarray
    ) -> "ZigzagState":
        Phi = np.ascontiguousarray(problem.gaussian.precision)
        mu = problem.gaussian.mean
        x = np.array(x, dtype=np.float64)
        p = np.array(p, dtype=np.float64)
        v = np.where(p > 0, 1.0, -1.0)
        return cls(x, p, v, Phi @ (x - mu), Phi @ v, Phi, mu)

    def copy(self) -> "ZigzagState":
        return ZigzagState(
            self.x.copy(), self.p.copy(), self.v.copy(),
            self.grad.copy(), self.phi_v.copy(), self.Phi, self.mu,
        )


def hamiltonian(state: ZigzagState) -> float:
    """H = 0.5 (x - mu)^T Phi (x - mu) + sum |p|, using the gradient cache."""
    return 0.5 * float((state.x - state.mu) @ state.grad) + float(np.sum(np.abs(state.p)))


def refresh_momentum(rng: np.random.Generator, d: int) -> np.ndarray:
    """Independent Laplace draws by inverse CDF: p = -sign(w) ln(1 - 2|w|).

    w is uniform on (-1/2, 1/2); draws that would land exactly on 0 or -1/2
    are rejected and redrawn so momenta are finite and non-zero.
    """
    w = rng.uniform(-0.5, 0.5, size=d)
    bad = (w == 0.0) | (w == -0.5)
    while np.any(bad):
        w[bad] = rng.uniform(-0.5, 0.5, size=int(bad.sum()))
        bad = (w == 0.0) | (w == -0.5)
    return -np.sign(w) * np.log1p(-2.0 * np.abs(w))


def momentum_at(state: ZigzagState, t: float) -> np.ndarray:
    """Momentum after coasting for time t: p - grad t - phi_v t^2 / 2."""
    if t == 0.0:
        return state.p.copy()
    return state.p - state.grad * t - 0.5 * state.phi_v * t * t


# Numba kernels. The Python-facing operations below delegate to these, and
# the chain drivers run entirely inside them.


@njit(cache=True)
def _min_quad_root(p, g, pv, horizon):
    """Smallest root of p_i - g_i t - pv_i t^2/2 across i, within
    (eps, horizon] where eps = 1e-12 (1 + horizon). Returns (t, i) with
    i = -1 when no coordinate has a root in range; ties keep the smallest i."""
    eps_t = 1e-12 * (1.0 + horizon)
    best_t = np.inf
    best_i = -1
    for i in range(p.shape[0]):
        A = -0.5 * pv[i]
        B = -g[i]
        C = p[i]
        if A == 0.0:
            if B != 0.0:
                r = -C / B
                if eps_t < r <= horizon and r < best_t:
                    best_t = r
                    best_i = i
            continue
        D = B * B - 4.0 * A * C
        if D < 0.0:
            continue
        sq = math.sqrt(D)
        s = 1.0 if B >= 0.0 else -1.0
        q = -0.5 * (B + s * sq)
        r = q / A
        if eps_t < r <= horizon and r < best_t:
            best_t = r
            best_i = i
        if q != 0.0:
            r = C / q
            if eps_t < r <= horizon and r < best_t:
                best_t = r
                best_i = i
    return best_t, best_i


@njit(cache=True)
def _min_boundary_time(x, v, lo, hi, horizon):
    """Earliest bound crossing within (0, horizon] at unit speed; (t, i) or i = -1."""
    best_t = np.inf
    best_i = -1
    for i in range(x.shape[0]):
        if v[i] > 0.0:
            if hi[i] == np.inf:
                continue
            t = hi[i] - x[i]
        else:
            if lo[i] == -np.inf:
                continue
            t = x[i] - lo[i]
        if 0.0 < t <= horizon and t < best_t:
            best_t = t
            best_i = i
    return best_t, best_i


@njit(cache=True)
def _advance(x, p, v, g, pv, t):
    """Coast for time t: x += v t, p by its exact quadratic, g += pv t."""
    for i in range(x.shape[0]):
        p[i] -= (g[i] + 0.5 * pv[i] * t) * t
        x[i] += v[i] * t
        g[i] += pv[i] * t


@njit(cache=True)
def _flip_coord(i, v, pv, Phi):
    """Flip velocity coordinate i; update the Phi v cache in O(d)."""
    v[i] = -v[i]
    dv = 2.0 * v[i]
    for k in range(v.shape[0]):
        pv[k] += dv * Phi[i, k]


@njit(cache=True)
def _hamiltonian_kernel(x, p, g, mu):
    u = 0.0
    k = 0.0
    for i in range(x.shape[0]):
        u += (x[i] - mu[i]) * g[i]
        k += abs(p[i])
    return 0.5 * u + k


@njit(cache=True)
def _propose_zigzag(x, p, v, g, pv, Phi, mu, lo, hi, T, max_events, h_out):
    """Evolve the state in place for total duration T.

    Gradient flips and boundary bounces are applied event by event; events
    within SIMULTANEITY_TOL are resolved boundary-first, and each event is
    followed by a stuck-coordinate sweep so simultaneous hits all bounce.
    Returns (events, status); fills h_out with the post-event Hamiltonian
    while it has room."""
    remaining = T
    nev = _bounce_stuck(x, p, v, pv, Phi, lo, hi)
    nrec = 0
    while remaining > 0.0:
        tg, ig = _min_quad_root(p, g, pv, remaining)
        tb, ib = _min_boundary_time(x, v, lo, hi, remaining)
        if ib < 0 and ig < 0:
            _advance(x, p, v, g, pv, remaining)
            break
        boundary_first = ib >= 0 and (ig < 0 or tb <= tg + 1e-12)
        t = tb if boundary_first else tg
        _advance(x, p, v, g, pv, t)
        if boundary_first:
            if v[ib] > 0.0:
                x[ib] = hi[ib]
            else:
                x[ib] = lo[ib]
            p[ib] = -p[ib]
            _flip_coord(ib, v, pv, Phi)
        else:
            p[ig] = 0.0
            _flip_coord(ig, v, pv, Phi)
        nev += 1 + _bounce_stuck(x, p, v, pv, Phi, lo, hi)
        remaining -= t
        if nrec < h_out.shape[0]:
            h_out[nrec] = _hamiltonian_kernel(x, p, g, mu)
            nrec += 1
        if nev >= max_events:
            return nev, 1
    return nev, 0


@njit(cache=True)
def _laplace_draw():
    while True:
        w = np.random.random() - 0.5
        if w == 0.0 or w == -0.5:
            continue
        val = -math.log1p(-2.0 * abs(w))
        return val if w > 0.0 else -val


@njit(cache=True)
def _refresh_kernel(p, v):
    for i in range(p.shape[0]):
        pi = _laplace_draw()
        p[i] = pi
        v[i] = 1.0 if pi > 0.0 else -1.0


@njit(cache=True)
def _bounce_stuck(x, p, v, pv, Phi, lo, hi):
    """Bounce every coordinate resting on a bound with outward velocity.

    Simultaneous boundary hits advance all tied coordinates onto their
    bounds but only the first gets the regular bounce; the rest sit at
    crossing time zero, which the event search excludes, so they are
    reflected here. The band absorbs the one-ulp scatter of tied arrivals;
    positions snap onto the bound exactly. Returns the bounce count."""
    n = 0
    for i in range(x.shape[0]):
        if v[i] > 0.0:
            if hi[i] == np.inf:
                continue
            if x[i] >= hi[i] - 1e-12 * (1.0 + abs(hi[i])):
                x[i] = hi[i]
                p[i] = -p[i]
                _flip_coord(i, v, pv, Phi)
                n += 1
        else:
            if lo[i] == -np.inf:
                continue
            if x[i] <= lo[i] + 1e-12 * (1.0 + abs(lo[i])):
                x[i] = lo[i]
                p[i] = -p[i]
                _flip_coord(i, v, pv, Phi)
                n += 1
    return n


@njit(cache=True)
def _chain_zigzag(x0, Phi, mu, lo, hi, T, n, seed, max_events, samples_out, events_out):
    np.random.seed(seed)
    d = x0.shape[0]
    x = x0.copy()
    g = np.dot(Phi, x - mu)
    p = np.empty(d)
    v = np.empty(d)
    h_none = np.empty(0)
    for it in range(n):
        _refresh_kernel(p, v)
        pv = np.dot(Phi, v)
        nev, status = _propose_zigzag(x, p, v, g, pv, Phi, mu, lo, hi, T, max_events, h_none)
        if status != 0:
            return it, status
        samples_out[it] = x
        events_out[it] = nev
        if (it & 255) == 255:
            # rebuild the gradient cache now and then against rounding drift
            g = np.dot(Phi, x - mu)
    return n, 0


@njit(cache=True)
def _uturn(xm, vm, xp, vp):
    a = 0.0
    b = 0.0
    for i in range(xm.shape[0]):
        dx = xp[i] - xm[i]
        a += dx * vm[i]
        b += dx * vp[i]
    return a < 0.0 or b < 0.0


@njit(cache=True)
def _nuts_leaf(direction, x, p, v, g, pv, Phi, mu, lo, hi, t_base, budget):
    """One segment forward or backward in time; returns the new state in
    forward orientation plus (events, status)."""
    xn = x.copy()
    gn = g.copy()
    pn = p * direction
    vn = v * direction
    pvn = pv * direction
    h_none = np.empty(0)
    nev, status = _propose_zigzag(xn, pn, vn, gn, pvn, Phi, mu, lo, hi, t_base, budget, h_none)
    if direction < 0:
        for i in range(pn.shape[0]):
            pn[i] = -pn[i]
            vn[i] = -vn[i]
            pvn[i] = -pvn[i]
    return xn, pn, vn, gn, pvn, nev, status


@njit(cache=True)
def _nuts_build(depth, direction, x, p, v, g, pv, Phi, mu, lo, hi, t_base, budget):
    """Build a subtree of 2^depth segments from the given edge state.

    Returns (minus edge, plus edge, proposal position, leaf count, turned,
    events, status); the proposal is drawn uniformly over the subtree's
    segment endpoints."""
    if depth == 0:
        xn, pn, vn, gn, pvn, nev, status = _nuts_leaf(
            direction, x, p, v, g, pv, Phi, mu, lo, hi, t_base, budget
        )
        return (xn, pn, vn, gn, pvn, xn, pn, vn, gn, pvn, xn, 1, False, nev, status)

    res1 = _nuts_build(depth - 1, direction, x, p, v, g, pv, Phi, mu, lo, hi, t_base, budget)
    (xm, pm, vm, gm, pvm, xp, pp, vp, gp, pvp, prop1, n1, turned1, ev1, st1) = res1
    if st1 != 0 or turned1:
        return res1

    if direction > 0:
        res2 = _nuts_build(
            depth - 1, direction, xp, pp, vp, gp, pvp, Phi, mu, lo, hi, t_base, budget - ev1
        )
    else:
        res2 = _nuts_build(
            depth - 1, direction, xm, pm, vm, gm, pvm, Phi, mu, lo, hi, t_base, budget - ev1
        )
    (xm2, pm2, vm2, gm2, pvm2, xp2, pp2, vp2, gp2, pvp2, prop2, n2, turned2, ev2, st2) = res2
    ev = ev1 + ev2

    if direction > 0:
        oxm, opm, ovm, ogm, opvm = xm, pm, vm, gm, pvm
        oxp, opp, ovp, ogp, opvp = xp2, pp2, vp2, gp2, pvp2
    else:
        oxm, opm, ovm, ogm, opvm = xm2, pm2, vm2, gm2, pvm2
        oxp, opp, ovp, ogp, opvp = xp, pp, vp, gp, pvp

    if st2 != 0 or turned2:
        return (oxm, opm, ovm, ogm, opvm, oxp, opp, ovp, ogp, opvp,
                prop1, n1, True, ev, st2)

    ntot = n1 + n2
    prop = prop2 if np.random.random() * ntot < n2 else prop1
    turned = _uturn(oxm, ovm, oxp, ovp)
    return (oxm, opm, ovm, ogm, opvm, oxp, opp, ovp, ogp, opvp,
            prop, ntot, turned, ev, 0)


@njit(cache=True)
def _nuts_tree(x, p, v, g, pv, Phi, mu, lo, hi, t_base, max_depth, max_events):
    """One full doubling loop from a fresh-momentum state.

    Returns (proposal position, events, depth reached, hit_max_depth, status).
    Uses whatever RNG state the kernel thread currently has."""
    d = x.shape[0]
    xm = x.copy()
    pm = p.copy()
    vm = v.copy()
    gm = g.copy()
    pvm = pv.copy()
    xp = x.copy()
    pp = p.copy()
    vp = v.copy()
    gp = g.copy()
    pvp = pv.copy()
    xprop = x.copy()
    ntot = 1
    nev = 0
    depth_reached = 0
    stopped = False
    for depth in range(max_depth):
        direction = 1 if np.random.random() < 0.5 else -1
        if direction > 0:
            res = _nuts_build(
                depth, 1, xp, pp, vp, gp, pvp, Phi, mu, lo, hi, t_base, max_events - nev
            )
        else:
            res = _nuts_build(
                depth, -1, xm, pm, vm, gm, pvm, Phi, mu, lo, hi, t_base, max_events - nev
            )
        (bxm, bpm, bvm, bgm, bpvm, bxp, bpp, bvp, bgp, bpvp, bprop, bn, bturned, bev, bst) = res
        nev += bev
        if bst != 0:
            return xprop, nev, depth_reached, False, bst
        if bturned:
            stopped = True
            break
        if direction > 0:
            xp, pp, vp, gp, pvp = bxp, bpp, bvp, bgp, bpvp
        else:
            xm, pm, vm, gm, pvm = bxm, bpm, bvm, bgm, bpvm
        if np.random.random() * (ntot + bn) < bn:
            xprop = bprop
        ntot += bn
        depth_reached = depth + 1
        if _uturn(xm, vm, xp, vp):
            stopped = True
            break
    return xprop, nev, depth_reached, not stopped, 0


@njit(cache=True)
def _chain_nuts(
    x0, Phi, mu, lo, hi, t_base, max_depth, n, seed, max_events,
    samples_out, events_out, depths_out,
):
    np.random.seed(seed)
    d = x0.shape[0]
    x = x0.copy()
    g = np.dot(Phi, x - mu)
    p = np.empty(d)
    v = np.empty(d)
    max_depth_hits = 0
    for it in range(n):
        _refresh_kernel(p, v)
        pv = np.dot(Phi, v)
        xprop, nev, depth, hit_max, status = _nuts_tree(
            x, p, v, g, pv, Phi, mu, lo, hi, t_base, max_depth, max_events
        )
        if status != 0:
            return it, status, max_depth_hits
        if hit_max:
            max_depth_hits += 1
        x = xprop.copy()
        g = np.dot(Phi, x - mu)
        samples_out[it] = x
        events_out[it] = nev
        depths_out[it] = depth
    return n, 0, max_depth_hits


@njit(cache=True)
def _nuts_single(x, p, v, g, pv, Phi, mu, lo, hi, t_base, max_depth, max_events, seed):
    np.random.seed(seed)
    return _nuts_tree(x, p, v, g, pv, Phi, mu, lo, hi, t_base, max_depth, max_events)


# Python-facing operations.


def next_gradient_event(state: ZigzagState, horizon: float) -> tuple[float, int] | None:
    """First momentum zero crossing within (eps, horizon], or None.

    eps = GRAD_ROOT_EPS_REL * (1 + horizon) suppresses re-detection of the
    event just applied. Simultaneous roots resolve to the smallest index."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    t, i = _min_quad_root(state.p, state.grad, state.phi_v, horizon)
    if i < 0:
        return None
    return float(t), int(i)


def next_boundary_event(
    state: ZigzagState, box: BoxConstraints, horizon: float
) -> tuple[float, int] | None:
    """First bound crossing within (0, horizon] at unit speed, or None."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if np.any(state.x < box.lower) or np.any(state.x > box.upper):
        raise InfeasibleState("position outside the box")
    t, i = _min_boundary_time(state.x, state.v, box.lower, box.upper, horizon)
    if i < 0:
        return None
    return float(t), int(i)


def advance_segment(state: ZigzagState, t: float) -> ZigzagState:
    """Coast the state for time t (no events); O(d) via the caches."""
    if t < 0:
        raise ValueError("t must be non-negative")
    out = state.copy()
    _advance(out.x, out.p, out.v, out.grad, out.phi_v, t)
    return out


def apply_event(
    state: ZigzagState,
    coord: int,
    kind: EventKind,
    box: BoxConstraints | None = None,
) -> ZigzagState:
    """Apply a gradient flip or boundary bounce at the current position.

    Gradient flips require |p_coord| <= EVENT_STATE_TOL; bounces require the
    coordinate to sit within EVENT_STATE_TOL of the bound it is moving
    toward, and snap it exactly onto that bound."""
    i = coord
    if not 0 <= i < state.x.shape[0]:
        raise ValueError(f"coordinate {i} out of range")
    kind = EventKind(kind)
    out = state.copy()
    if kind is EventKind.GRADIENT_FLIP:
        if abs(state.p[i]) > EVENT_STATE_TOL:
            raise PreconditionViolation(
                f"gradient flip with |p[{i}]| = {abs(state.p[i]):.3e}"
            )
        out.p[i] = 0.0
        _flip_coord(i, out.v, out.phi_v, out.Phi)
    else:
        if box is None:
            raise ValueError("boundary bounce needs the box constraints")
        bound = box.upper[i] if state.v[i] > 0 else box.lower[i]
        if not np.isfinite(bound) or abs(state.x[i] - bound) > EVENT_STATE_TOL:
            raise PreconditionViolation(
                f"boundary bounce with x[{i}] = {state.x[i]!r} not at its bound"
            )
        out.x[i] = bound
        out.p[i] = -out.p[i]
        _flip_coord(i, out.v, out.phi_v, out.Phi)
    return out


def _box_arrays(box: BoxConstraints) -> tuple[np.ndarray, np.ndarray]:
    return (
        np.ascontiguousarray(box.lower, dtype=np.float64),
        np.ascontiguousarray(box.upper, dtype=np.float64),
    )


def zigzag_propose(
    state: ZigzagState,
    config: ZigzagConfig,
    box: BoxConstraints,
    rng: np.random.Generator | None = None,
    h_trace: np.ndarray | None = None,
) -> ZigzagState:
    """Deterministically evolve a fresh-momentum state for duration config.T.

    If given, h_trace (prefilled with NaN) receives the Hamiltonian after
    each event. Raises TooManyEvents past config.max_events_per_proposal."""
    if config.T is None:
        raise ValueError("config.T is unset; call config.resolved(lambda_min) first")
    lo, hi = _box_arrays(box)
    out = state.copy()
    h_out = h_trace if h_trace is not None else np.empty(0)
    nev, status = _propose_zigzag(
        out.x, out.p, out.v, out.grad, out.phi_v, out.Phi, out.mu,
        lo, hi, config.T, config.max_events_per_proposal, h_out,
    )
    if status == STATUS_TOO_MANY_EVENTS:
        raise TooManyEvents(f"exceeded {config.max_events_per_proposal} events in one trajectory")
    return out


def nuts_propose(
    state: ZigzagState,
    config: ZigzagConfig,
    box: BoxConstraints,
    rng: np.random.Generator,
) -> ZigzagState:
    """One no-U-turn proposal from a fresh-momentum state.

    Doubles the trajectory in a random time direction until it folds back,
    then picks uniformly among the segment endpoints. Reaching the depth cap
    logs a warning and returns the proposal from the completed tree."""
    if config.t_base is None:
        raise ValueError("config.t_base is unset; call config.resolved(lambda_min) first")
    lo, hi = _box_arrays(box)
    seed = int(rng.integers(1, 2**31 - 1))
    xprop, nev, depth, hit_max, status = _nuts_single(
        state.x, state.p, state.v, state.grad, state.phi_v, state.Phi, state.mu,
        lo, hi, config.t_base, config.max_tree_depth,
        config.max_events_per_proposal, seed,
    )
    if status == STATUS_TOO_MANY_EVENTS:
        raise TooManyEvents(f"exceeded {config.max_events_per_proposal} events in one tree")
    if hit_max:
        logger.warning("no-U-turn tree reached max depth %d", config.max_tree_depth)
    out = ZigzagState(
        xprop,
        state.p.copy(),
        state.v.copy(),
        state.Phi @ (xprop - state.mu),
        state.phi_v.copy(),
        state.Phi,
        state.mu,
    )
    return out


def _check_box(problem: MtnProblem) -> BoxConstraints:
    if not isinstance(problem.constraints, BoxConstraints):
        raise UnsupportedConstraints(
            "zigzag samplers handle element-wise truncations only; "
            "general linear constraints need the harmonic sampler"
        )
    return problem.constraints


def zigzag_chain(
    problem: MtnProblem,
    x0: np.ndarray,
    n: int,
    rng: np.random.Generator,
    config: ZigzagConfig | None = None,
    validate: bool = True,
) -> tuple[np.ndarray, float, int, dict]:
    """Raw chain of n draws; returns (samples, sampling seconds, events, info).

    validate=False skips the strict-interior check on x0, for continuation
    runs restarting from an emitted sample that may sit exactly on a bound."""
    config = config or ZigzagConfig()
    box = _check_box(problem)
    if validate:
        validate_initial(problem, x0)
    prepare(problem, {Need.PRECISION, Need.MIN_EIGENVALUE})
    cfg = config.resolved(problem.gaussian.lambda_min)
    Phi = np.ascontiguousarray(problem.gaussian.precision)
    mu = np.ascontiguousarray(problem.gaussian.mean)
    lo, hi = _box_arrays(box)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    d = problem.dim
    samples = np.empty((n, d))
    events = np.zeros(n, dtype=np.int64)
    seed = int(rng.integers(1, 2**31 - 1))
    info: dict = {"max_depth_hits": 0}
    t0 = time.perf_counter()
    if cfg.use_nuts:
        depths = np.zeros(n, dtype=np.int64)
        done, status, hits = _chain_nuts(
            x0, Phi, mu, lo, hi, cfg.t_base, cfg.max_tree_depth, n, seed,
            cfg.max_events_per_proposal, samples, events, depths,
        )
        info["max_depth_hits"] = int(hits)
        info["tree_depths"] = depths
        if hits:
            logger.warning(
                "no-U-turn tree hit max depth %d in %d of %d iterations",
                cfg.max_tree_depth, int(hits), n,
            )
    else:
        done, status = _chain_zigzag(
            x0, Phi, mu, lo, hi, cfg.T, n, seed,
            cfg.max_events_per_proposal, samples, events,
        )
    wall = time.perf_counter() - t0
    if status == STATUS_TOO_MANY_EVENTS:
        raise TooManyEvents(
            f"exceeded {cfg.max_events_per_proposal} events in iteration {done}"
        )
    return samples, wall, int(events.sum()), info


def zigzag_sample(
    problem: MtnProblem,
    x0: np.ndarray,
    n: int,
    rng: np.random.Generator,
    config: ZigzagConfig | None = None,
) -> ChainResult:
    """Sample n draws with zigzag dynamics and summarize the post-burn-in chain."""
    config = config or ZigzagConfig()
    samples, wall, events, info = zigzag_chain(problem, x0, n, rng, config)
    keep = kept_slice(n, config.burn_in_frac)
    kept = samples[n - keep:]
    result = summarize(kept, Timings(problem.t_pre, wall))
    result.method = "zigzag-nuts" if config.use_nuts else "zigzag"
    result.n_events = events
    return result
