"""ESS estimator calibration, timing decomposition, and moment checks."""

import math

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

import trunc_gauss.diagnostics as diag
from trunc_gauss.diagnostics import (
    ChainResult,
    MomentReport,
    Timings,
    ess_per_dimension,
    ess_univariate,
    metrics_dict,
    moment_check,
    summarize,
)
from trunc_gauss.errors import DegenerateSeries

from helpers import HALF_NORMAL_MEAN, HALF_NORMAL_VAR, ar1_series


# ess_univariate calibration


def test_ess_iid_near_length():
    x = np.random.default_rng(0).standard_normal(10_000)
    ess = ess_univariate(x)
    assert 0.8 * x.size <= ess <= 1.2 * x.size


def test_ess_ar1_matches_theory():
    # AR(1) with coefficient 0.9: tau = (1 + 0.9) / (1 - 0.9) = 19
    L = 100_000
    x = ar1_series(np.random.default_rng(1), L, 0.9)
    ess = ess_univariate(x)
    expected = L / 19.0
    assert abs(ess - expected) <= 0.25 * expected


def test_ess_alternating_series_exceeds_iid_rate():
    # strong negative lag-1 correlation superefficiently cancels noise; the
    # estimate is clipped at L
    rng = np.random.default_rng(2)
    z = rng.standard_normal(5001)
    x = z[1:] - z[:-1]
    assert ess_univariate(x) == 5000.0


def test_ess_validation_errors():
    with pytest.raises(DegenerateSeries):
        ess_univariate(np.full(100, 3.7))
    with pytest.raises(ValueError):
        ess_univariate(np.arange(5, dtype=float))
    with pytest.raises(ValueError):
        ess_univariate(np.array([0.0, np.nan] + [1.0] * 50))
    with pytest.raises(ValueError):
        ess_univariate(np.zeros((10, 2)))


# affine invariance


def test_ess_invariant_under_power_of_two_scaling():
    x = ar1_series(np.random.default_rng(3), 2000, 0.5)
    base = ess_univariate(x)
    assert ess_univariate(x * 2.0**7) == base
    assert ess_univariate(x * 2.0**-3) == base


def test_ess_invariant_under_general_affine_map():
    x = ar1_series(np.random.default_rng(4), 2000, 0.5)
    base = ess_univariate(x)
    moved = ess_univariate(1.7 * x - 0.4)
    assert abs(moved - base) <= 1e-9 * base


@given(
    st.integers(min_value=0, max_value=2**32 - 1),
    st.integers(min_value=-8, max_value=8),
)
def test_ess_power_of_two_scaling_is_exact(seed, k):
    rng = np.random.default_rng(seed)
    x = ar1_series(rng, 256, float(rng.uniform(-0.9, 0.9)))
    assert ess_univariate(x * 2.0**k) == ess_univariate(x)


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_ess_of_duplicated_chain_at_most_doubles(seed):
    rng = np.random.default_rng(seed)
    L = int(rng.integers(30, 400))
    x = ar1_series(rng, L, float(rng.uniform(-0.8, 0.8)))
    single = ess_univariate(x)
    doubled = ess_univariate(np.concatenate([x, x]))
    assert doubled <= 2.0 * single * 1.1


# summarize


def test_summarize_fabricated_arithmetic(monkeypatch):
    # pin the ESS so the arithmetic is exact: L = 1000 iterations costing 10 s
    # of sampling at ESS_min = 100 means 10 iterations and 0.1 s per effective
    # sample; with 2 s of setup, t1 = 2.1 s and t100 = 12 s
    monkeypatch.setattr(diag, "ess_per_dimension", lambda s: np.array([100.0]))
    samples = np.random.default_rng(6).standard_normal((1000, 1))
    result = summarize(samples, Timings(t_pre=2.0, wall_time_sampling=10.0))
    assert result.ess_min == 100.0
    assert result.n_es == 10.0
    assert result.t_iter == 0.1
    assert result.t1 == 2.1
    assert result.t100 == 12.0
    assert result.n_iterations == 1000


def test_summarize_identities_hold_exactly():
    samples = ar1_series(np.random.default_rng(7), 5000, 0.6).reshape(-1, 2)
    result = summarize(samples, Timings(t_pre=0.37, wall_time_sampling=4.21))
    assert result.t1 == result.t_pre + result.t_iter
    assert result.t100 == result.t_pre + 100.0 * result.t_iter
    assert result.t1 <= result.t100
    assert result.ess.shape == (2,)
    assert result.ess_min == float(np.min(result.ess))
    # same chain, slower sampling: larger t_iter strictly raises t1 and t100
    slower = summarize(samples, Timings(t_pre=0.37, wall_time_sampling=8.42))
    assert slower.t_iter > result.t_iter
    assert slower.t1 > result.t1
    assert slower.t100 > result.t100


def test_summarize_iid_ess_min_near_length():
    samples = np.random.default_rng(8).standard_normal((10_000, 3))
    result = summarize(samples, Timings(0.0, 1.0))
    assert 0.75 * 10_000 <= result.ess_min <= 10_000


def test_summarize_slowest_dimension_drives_ess_min():
    rng = np.random.default_rng(9)
    L = 20_000
    samples = np.column_stack([rng.standard_normal(L), ar1_series(rng, L, 0.95)])
    result = summarize(samples, Timings(0.0, 1.0))
    assert int(np.argmin(result.ess)) == 1
    assert result.ess[1] < 0.3 * result.ess[0]


def test_summarize_zero_dimension_degenerates_to_length():
    result = summarize(np.zeros((500, 0)), Timings(1.0, 2.0))
    assert result.ess_min == 500.0
    assert result.ess.shape == (0,)


def test_summarize_validation():
    with pytest.raises(ValueError):
        summarize(np.zeros(100), Timings(0.0, 1.0))
    with pytest.raises(ValueError):
        summarize(np.zeros((5, 2)), Timings(0.0, 1.0))
    with pytest.raises(ValueError):
        summarize(np.random.default_rng(0).standard_normal((100, 1)), Timings(0.0, 1.0), target_ess=0)


# moment_check


def half_normal_samples(rng, n):
    return np.abs(rng.standard_normal(n))


def test_moment_check_accepts_matching_reference():
    x = half_normal_samples(np.random.default_rng(10), 20_000).reshape(-1, 1)
    report = moment_check(x, np.array([HALF_NORMAL_MEAN]), np.array([[HALF_NORMAL_VAR]]))
    assert report.passed
    assert report.flagged.size == 0
    assert abs(report.z_scores[0]) <= 3.0


def test_moment_check_flags_shifted_reference():
    x = half_normal_samples(np.random.default_rng(11), 20_000).reshape(-1, 1)
    report = moment_check(
        x, np.array([HALF_NORMAL_MEAN + 0.2]), np.array([[HALF_NORMAL_VAR]])
    )
    assert not report.passed
    assert 0 in report.flagged
    assert abs(report.z_scores[0]) > 3.0


def test_moment_check_empty_dimension():
    report = moment_check(np.zeros((100, 0)), np.zeros(0), np.zeros((0, 0)))
    assert report.passed
    assert report.z_scores.shape == (0,)


def test_moment_check_validation():
    x = np.zeros((50, 2))
    with pytest.raises(ValueError):
        moment_check(x, np.zeros(3), np.eye(3))
    with pytest.raises(ValueError):
        moment_check(x, np.zeros(2), np.eye(2), tolerance_se=0.0)


# metrics_dict


def test_metrics_dict_keys_and_optional_fields():
    samples = np.random.default_rng(12).standard_normal((200, 2))
    result = summarize(samples, Timings(0.5, 1.5))
    base = metrics_dict(result)
    assert set(base) == {
        "ess", "ess_min", "n_es", "t_pre_s", "t_iter_s", "t1_s", "t100_s",
        "n_iterations",
    }
    assert base["t1_s"] == base["t_pre_s"] + base["t_iter_s"]
    result.method = "zigzag"
    result.n_events = 77
    tagged = metrics_dict(result)
    assert tagged["method"] == "zigzag"
    assert tagged["n_events"] == 77
    assert len(tagged["ess"]) == 2
