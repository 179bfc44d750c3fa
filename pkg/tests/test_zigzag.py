"""Zigzag sampler: Laplace momentum, event scheduling, piecewise dynamics, chains."""

import logging
import math

import numpy as np
import pytest

from trunc_gauss.errors import (
    InfeasibleState,
    PreconditionViolation,
    TooManyEvents,
    UnsupportedConstraints,
)
from trunc_gauss.model import (
    BoxConstraints,
    GaussianSpec,
    LinearConstraints,
    MatrixKind,
    MtnProblem,
    Need,
    prepare,
)
from trunc_gauss.zigzag import (
    EventKind,
    ZigzagConfig,
    ZigzagState,
    advance_segment,
    apply_event,
    default_base_time,
    default_travel_time,
    hamiltonian,
    momentum_at,
    next_boundary_event,
    next_gradient_event,
    nuts_propose,
    refresh_momentum,
    zigzag_chain,
    zigzag_propose,
    zigzag_sample,
)
from trunc_gauss.diagnostics import ess_univariate

from helpers import HALF_NORMAL_MEAN, HALF_NORMAL_VAR, first_root_scan, mean_se, var_se


def make_problem(Phi, lower, upper, mean=None):
    Phi = np.asarray(Phi, dtype=np.float64)
    d = Phi.shape[0]
    mean = np.zeros(d) if mean is None else np.asarray(mean, float)
    g = GaussianSpec(dim=d, mean=mean, matrix_kind=MatrixKind.PRECISION, matrix=Phi)
    problem = MtnProblem(g, BoxConstraints(np.asarray(lower, float), np.asarray(upper, float)))
    prepare(problem, {Need.PRECISION, Need.MIN_EIGENVALUE})
    return problem


def make_state(Phi, x, p, lower=None, upper=None, mean=None):
    d = np.asarray(Phi).shape[0]
    lower = np.full(d, -np.inf) if lower is None else lower
    upper = np.full(d, np.inf) if upper is None else upper
    problem = make_problem(Phi, lower, upper, mean)
    return ZigzagState.from_position(problem, np.asarray(x, float), np.asarray(p, float)), problem


# momentum refresh


def test_refresh_momentum_moments():
    p = refresh_momentum(np.random.default_rng(0), 100_000)
    # standard Laplace: mean 0, var 2, P(|p| > 3) = exp(-3)
    n = p.size
    assert abs(p.mean()) <= 3 * math.sqrt(2.0 / n)
    assert abs(p.var() - 2.0) <= 3 * math.sqrt(20.0 / n)  # Var(p^2) = 24 - 4 = 20
    tail = np.mean(np.abs(p) > 3.0)
    q = math.exp(-3.0)
    assert abs(tail - q) <= 3 * math.sqrt(q * (1 - q) / n)
    assert np.all(np.isfinite(p))


def test_refresh_momentum_deterministic():
    a = refresh_momentum(np.random.default_rng(11), 50)
    b = refresh_momentum(np.random.default_rng(11), 50)
    assert np.array_equal(a, b)


# momentum_at


def test_momentum_at_quadratic_decay():
    state, _ = make_state(np.eye(1), [1.0], [1.0])
    # grad = x - mu = 1, phi_v = v = 1: p(t) = 1 - t - t^2/2
    for t in [0.0, 0.3, 0.7]:
        assert abs(momentum_at(state, t)[0] - (1.0 - t - t * t / 2.0)) <= 1e-15


def test_momentum_at_flat_when_centered():
    state, _ = make_state(np.eye(1), [0.0], [2.0], mean=[0.0])
    # at the mean the pull starts at zero; only the t^2 term acts
    assert abs(momentum_at(state, 0.5)[0] - (2.0 - 0.125)) <= 1e-15


def test_momentum_at_zero_returns_fresh_copy():
    state, _ = make_state(np.eye(2), [0.5, -0.5], [1.0, 2.0])
    p = momentum_at(state, 0.0)
    assert np.array_equal(p, state.p)
    p[0] = 99.0
    assert state.p[0] == 1.0


# next_gradient_event


def test_gradient_event_pure_quadratic():
    # p(t) = 1 - t^2 hits zero at t = 1 (grad 0, phi_v 2)
    state, _ = make_state(np.diag([2.0]), [0.0], [1.0])
    assert state.grad[0] == 0.0 and state.phi_v[0] == 2.0
    t, i = next_gradient_event(state, 10.0)
    assert i == 0
    assert abs(t - 1.0) <= 1e-12


def test_gradient_event_pure_linear():
    # p(t) = 1 - t hits zero at t = 1 (grad 1, phi_v 0): needs v = 0 on that
    # coordinate, so build a 2d state where coordinate 1 moves away
    Phi = np.array([[1.0, -1.0], [-1.0, 2.0]])
    state, _ = make_state(Phi, [2.0, 1.0], [1.0, 1.0])
    # grad = Phi x = (1, 0); phi_v = Phi (1,1) = (0, 1)
    assert state.grad[0] == 1.0 and state.phi_v[0] == 0.0
    t, i = next_gradient_event(state, 10.0)
    assert i == 0
    assert abs(t - 1.0) <= 1e-12


def test_gradient_event_matches_scan_oracle():
    rng = np.random.default_rng(21)
    for _ in range(50):
        d = 5
        A = rng.standard_normal((d, d))
        Phi = A @ A.T / d + np.eye(d)
        x = rng.standard_normal(d)
        p = refresh_momentum(rng, d)
        state, _ = make_state(Phi, x, p)
        horizon = 5.0
        hit = next_gradient_event(state, horizon)

        roots = []
        for i in range(d):
            root = first_root_scan(
                lambda ts, i=i: state.p[i]
                - state.grad[i] * ts
                - state.phi_v[i] * ts * ts / 2.0,
                horizon,
            )
            if root is not None:
                roots.append(root)
        ref = min(roots) if roots else None
        if hit is None:
            assert ref is None or ref > horizon - 1e-9
        else:
            assert ref is not None
            assert abs(hit[0] - ref) <= 1e-9


def test_gradient_event_rejects_bad_horizon():
    state, _ = make_state(np.eye(1), [1.0], [1.0])
    with pytest.raises(ValueError):
        next_gradient_event(state, 0.0)


# next_boundary_event


def box(lower, upper):
    return BoxConstraints(np.asarray(lower, float), np.asarray(upper, float))


def test_boundary_event_upper_wall():
    state, _ = make_state(np.eye(1), [0.7], [1.0])  # v = +1
    t, i = next_boundary_event(state, box([0.0], [1.0]), 10.0)
    assert i == 0
    assert t == pytest.approx(0.3, abs=1e-15)


def test_boundary_event_open_direction():
    state, _ = make_state(np.eye(1), [0.7], [1.0])
    assert next_boundary_event(state, box([0.0], [np.inf]), 10.0) is None


def test_boundary_event_picks_earliest_coordinate():
    state, _ = make_state(np.eye(2), [0.2, 0.5], [-1.0, -1.0])  # both moving down
    t, i = next_boundary_event(state, box([-1.0, 0.0], [1.0, 1.0]), 10.0)
    assert i == 1
    assert t == pytest.approx(0.5, abs=1e-15)


def test_boundary_event_outside_box():
    state, _ = make_state(np.eye(1), [2.0], [1.0])
    with pytest.raises(InfeasibleState):
        next_boundary_event(state, box([0.0], [1.0]), 10.0)


# advance_segment


def test_advance_zero_time_is_identity():
    state, _ = make_state(np.eye(2), [0.5, 0.5], [1.0, -1.0])
    out = advance_segment(state, 0.0)
    for name in ("x", "p", "v", "grad", "phi_v"):
        assert np.array_equal(getattr(out, name), getattr(state, name))


def test_advance_hand_case():
    state, _ = make_state(np.eye(2), [0.5, 0.5], [1.0, 2.0])  # v = (1, 1)
    out = advance_segment(state, 0.2)
    assert np.allclose(out.x, [0.7, 0.7], atol=1e-15)
    # p_i(t) = p_i - 0.5 t - t^2/2
    assert np.allclose(out.p, [1.0 - 0.1 - 0.02, 2.0 - 0.1 - 0.02], atol=1e-15)
    assert np.allclose(out.grad, [0.7, 0.7], atol=1e-15)
    assert np.array_equal(out.v, state.v)


def test_advance_caches_match_recomputation():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((4, 4))
    Phi = A @ A.T / 4 + np.eye(4)
    x = rng.standard_normal(4)
    p = refresh_momentum(rng, 4)
    state, problem = make_state(Phi, x, p)
    out = advance_segment(state, 0.37)
    fresh = ZigzagState.from_position(problem, out.x, out.p)
    assert np.max(np.abs(out.grad - fresh.grad)) <= 1e-10
    assert np.max(np.abs(out.phi_v - fresh.phi_v)) <= 1e-10
    assert np.array_equal(out.v, fresh.v)


def test_advance_rejects_negative_time():
    state, _ = make_state(np.eye(1), [0.0], [1.0])
    with pytest.raises(ValueError):
        advance_segment(state, -0.1)


# apply_event


def test_apply_boundary_bounce():
    state, _ = make_state(np.eye(1), [0.0], [-0.7], lower=[0.0], upper=[np.inf])
    out = apply_event(state, 0, EventKind.BOUNDARY_BOUNCE, box([0.0], [np.inf]))
    assert out.p[0] == 0.7
    assert out.v[0] == 1.0
    assert out.x[0] == 0.0


def test_apply_gradient_flip_after_advancing_to_the_event():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((3, 3))
    Phi = A @ A.T / 3 + np.eye(3)
    state, problem = make_state(Phi, rng.standard_normal(3), refresh_momentum(rng, 3))
    t, i = next_gradient_event(state, 50.0)
    at_event = advance_segment(state, t)
    out = apply_event(at_event, i, EventKind.GRADIENT_FLIP)
    assert out.p[i] == 0.0
    assert out.v[i] == -at_event.v[i]
    assert np.max(np.abs(out.phi_v - out.Phi @ out.v)) <= 1e-10


def test_apply_flip_rejects_nonzero_momentum():
    state, _ = make_state(np.eye(1), [0.5], [1.0])
    with pytest.raises(PreconditionViolation):
        apply_event(state, 0, EventKind.GRADIENT_FLIP)


def test_apply_bounce_rejects_position_off_the_bound():
    state, _ = make_state(np.eye(1), [0.5], [1.0], lower=[0.0], upper=[1.0])
    with pytest.raises(PreconditionViolation):
        apply_event(state, 0, EventKind.BOUNDARY_BOUNCE, box([0.0], [1.0]))


def test_apply_bounce_rejects_infinite_bound():
    state, _ = make_state(np.eye(1), [0.5], [1.0], lower=[0.0], upper=[np.inf])
    with pytest.raises(PreconditionViolation):
        apply_event(state, 0, EventKind.BOUNDARY_BOUNCE, box([0.0], [np.inf]))


def test_apply_event_argument_errors():
    state, _ = make_state(np.eye(1), [0.0], [-1.0], lower=[0.0], upper=[np.inf])
    with pytest.raises(ValueError):
        apply_event(state, 3, EventKind.BOUNDARY_BOUNCE, box([0.0], [np.inf]))
    with pytest.raises(ValueError):
        apply_event(state, 0, EventKind.BOUNDARY_BOUNCE)


# proposals


def corr_problem():
    Phi = np.array(
        [
            [2.0, 0.4, 0.1],
            [0.4, 1.5, 0.3],
            [0.1, 0.3, 1.0],
        ]
    )
    return make_problem(Phi, [0.0] * 3, [1.0] * 3)


def test_propose_conserves_hamiltonian_at_every_event():
    problem = corr_problem()
    rng = np.random.default_rng(9)
    state = ZigzagState.from_position(problem, np.full(3, 0.5), refresh_momentum(rng, 3))
    config = ZigzagConfig().resolved(problem.gaussian.lambda_min)
    h0 = hamiltonian(state)
    trace = np.full(10_000, np.nan)
    out = zigzag_propose(state, config, problem.constraints, h_trace=trace)
    seen = trace[np.isfinite(trace)]
    assert seen.size > 0
    assert np.max(np.abs(seen - h0)) <= 1e-8 * (1.0 + abs(h0))
    assert abs(hamiltonian(out) - h0) <= 1e-8 * (1.0 + abs(h0))


def test_propose_keeps_unit_velocities_and_coherent_caches():
    problem = corr_problem()
    rng = np.random.default_rng(10)
    state = ZigzagState.from_position(problem, np.full(3, 0.5), refresh_momentum(rng, 3))
    config = ZigzagConfig().resolved(problem.gaussian.lambda_min)
    out = zigzag_propose(state, config, problem.constraints)
    assert set(np.unique(out.v)).issubset({-1.0, 1.0})
    scale = 1.0 + max(np.max(np.abs(out.grad)), np.max(np.abs(out.phi_v)))
    assert np.max(np.abs(out.grad - out.Phi @ (out.x - out.mu))) <= 1e-8 * scale
    assert np.max(np.abs(out.phi_v - out.Phi @ out.v)) <= 1e-8 * scale
    assert np.all(out.x >= 0.0) and np.all(out.x <= 1.0)


def euler_zigzag(Phi, mu, lower, upper, x0, p0, T, h):
    """Tiny-step first-order integrator for the zigzag ODE, boundary reflective."""
    x = x0.copy()
    p = p0.copy()
    v = np.sign(p)
    steps = int(round(T / h))
    for _ in range(steps):
        p -= h * (Phi @ (x - mu))
        x += h * v
        hit_lo = x < lower
        hit_hi = x > upper
        x[hit_lo] = 2.0 * lower[hit_lo] - x[hit_lo]
        x[hit_hi] = 2.0 * upper[hit_hi] - x[hit_hi]
        flip = hit_lo | hit_hi
        p[flip] = -p[flip]
        moving = p != 0.0
        v[moving] = np.sign(p[moving])
    return x, p


def test_propose_matches_tiny_step_integrator_half_line():
    problem = make_problem(np.eye(1), [0.0], [np.inf])
    state = ZigzagState.from_position(problem, np.array([0.8]), np.array([1.3]))
    config = ZigzagConfig(T=2.0).resolved(1.0)
    out = zigzag_propose(state, config, problem.constraints)
    x_ref, _ = euler_zigzag(
        np.eye(1), np.zeros(1), np.array([0.0]), np.array([np.inf]),
        np.array([0.8]), np.array([1.3]), 2.0, 1e-5,
    )
    assert abs(out.x[0] - x_ref[0]) <= 1e-3


def test_propose_matches_tiny_step_integrator_2d_box():
    Phi = np.array([[2.0, 0.3], [0.3, 1.0]])
    problem = make_problem(Phi, [0.0, 0.0], [1.0, 1.0])
    x0 = np.array([0.5, 0.6])
    p0 = np.array([1.0, -0.8])
    state = ZigzagState.from_position(problem, x0, p0)
    config = ZigzagConfig(T=1.3).resolved(problem.gaussian.lambda_min)
    out = zigzag_propose(state, config, problem.constraints)
    x_ref, _ = euler_zigzag(
        Phi, np.zeros(2), np.zeros(2), np.ones(2), x0, p0, 1.3, 1e-5
    )
    assert np.max(np.abs(out.x - x_ref)) <= 1e-3


def test_propose_event_budget():
    problem = corr_problem()
    state = ZigzagState.from_position(
        problem, np.full(3, 0.5), refresh_momentum(np.random.default_rng(2), 3)
    )
    config = ZigzagConfig(max_events_per_proposal=1).resolved(problem.gaussian.lambda_min)
    with pytest.raises(TooManyEvents):
        zigzag_propose(state, config, problem.constraints)


# chains


def test_chain_half_normal_moments():
    problem = make_problem(np.eye(1), [0.0], [np.inf])
    samples, _, events, info = zigzag_chain(
        problem, np.array([1.0]), 20_000, np.random.default_rng(12)
    )
    assert events > 0
    assert info["max_depth_hits"] == 0
    x = samples[2000:, 0]
    assert np.all(samples >= 0.0)
    ess = ess_univariate(x)
    assert abs(x.mean() - HALF_NORMAL_MEAN) <= 3 * mean_se(x, ess)
    assert abs(x.var(ddof=1) - HALF_NORMAL_VAR) <= 3 * var_se(x, ess)


@pytest.mark.parametrize("use_nuts", [False, True])
def test_chain_survives_simultaneous_boundary_hits(use_nuts):
    # all ten coordinates sit exactly on the wall at the start
    problem = make_problem(np.eye(10), [0.0] * 10, [np.inf] * 10)
    config = ZigzagConfig(use_nuts=use_nuts)
    samples, _, _, _ = zigzag_chain(
        problem, np.zeros(10), 500, np.random.default_rng(13),
        config=config, validate=False,
    )
    assert np.all(samples >= 0.0)
    assert np.all(np.isfinite(samples))


@pytest.mark.parametrize("use_nuts", [False, True])
def test_chain_corner_start_recovers_half_normal_mean(use_nuts):
    problem = make_problem(np.eye(10), [0.0] * 10, [np.inf] * 10)
    config = ZigzagConfig(use_nuts=use_nuts)
    samples, _, _, _ = zigzag_chain(
        problem, np.ones(10), 2000, np.random.default_rng(14), config=config
    )
    assert np.all(samples >= 0.0)
    assert abs(samples[200:].mean() - HALF_NORMAL_MEAN) < 0.02


def test_nuts_unconstrained_standard_normal():
    problem = make_problem(np.eye(1), [-np.inf], [np.inf])
    result = zigzag_sample(
        problem, np.array([0.5]), 20_000, np.random.default_rng(15),
        config=ZigzagConfig(use_nuts=True),
    )
    assert result.method == "zigzag-nuts"
    x = result.samples[:, 0]
    se = mean_se(x, result.ess_min)
    assert abs(x.mean()) <= 3 * se
    assert abs(x.var(ddof=1) - 1.0) <= 3 * var_se(x, result.ess_min)


def test_nuts_logs_when_tree_depth_saturates(caplog):
    problem = make_problem(np.eye(1), [0.0], [1.0])
    state = ZigzagState.from_position(problem, np.array([0.5]), np.array([1.0]))
    config = ZigzagConfig(t_base=1e-4, max_tree_depth=1).resolved(1.0)
    with caplog.at_level(logging.WARNING, logger="trunc_gauss.zigzag"):
        nuts_propose(state, config, problem.constraints, np.random.default_rng(16))
    assert "max depth" in caplog.text


def test_zigzag_sample_methods_and_timing_identity():
    problem = make_problem(np.eye(2), [0.0, 0.0], [np.inf, np.inf])
    result = zigzag_sample(problem, np.ones(2), 1000, np.random.default_rng(17))
    assert result.method == "zigzag"
    assert result.samples.shape == (900, 2)
    assert result.n_events > 0
    assert result.t1 == result.t_pre + result.t_iter
    assert result.t100 == result.t_pre + 100.0 * result.t_iter


# configuration


def test_config_validation():
    with pytest.raises(ValueError):
        ZigzagConfig(T=0.0)
    with pytest.raises(ValueError):
        ZigzagConfig(t_base=-1.0)
    with pytest.raises(ValueError):
        ZigzagConfig(max_tree_depth=0)
    with pytest.raises(ValueError):
        ZigzagConfig(max_events_per_proposal=0)
    with pytest.raises(ValueError):
        ZigzagConfig(burn_in_frac=1.5)


def test_config_resolved_fills_defaults():
    cfg = ZigzagConfig().resolved(4.0)
    assert cfg.T == default_travel_time(4.0)
    assert cfg.t_base == default_base_time(4.0)
    kept = ZigzagConfig(T=0.7, t_base=0.05).resolved(4.0)
    assert kept.T == 0.7 and kept.t_base == 0.05


def test_default_times_scale_with_stiffness():
    assert default_travel_time(1.0) == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert default_travel_time(4.0) == pytest.approx(math.sqrt(0.5), rel=1e-12)
    assert default_base_time(1.0) == pytest.approx(0.1, rel=1e-12)


def test_zigzag_rejects_general_linear_constraints():
    g = GaussianSpec(2, np.zeros(2), MatrixKind.PRECISION, np.eye(2))
    problem = MtnProblem(g, LinearConstraints(np.array([[1.0, 1.0]]), np.array([0.0])))
    prepare(problem, {Need.PRECISION, Need.MIN_EIGENVALUE})
    with pytest.raises(UnsupportedConstraints):
        zigzag_chain(problem, np.array([1.0, 1.0]), 10, np.random.default_rng(0))
