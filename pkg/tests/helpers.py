"""Shared oracles and generators for the test suite.

The root-finding oracles are deliberately independent of the library: a
dense grid scan brackets the leftmost sign change and plain bisection
polishes it, so closed-form event times can be checked against a method
with no shared code or shared failure modes.
"""

import numpy as np

# Analytic moments of N(0,1) truncated to [0, inf).
HALF_NORMAL_MEAN = 0.7978845608028654  # sqrt(2/pi)
HALF_NORMAL_VAR = 0.36338022763241865  # 1 - 2/pi


def bisect(f, lo, hi, iters=200):
    """Root of scalar f on [lo, hi]; f(lo) and f(hi) must differ in sign."""
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (flo < 0.0) == (fm < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def first_root_scan(f, hi, n=8192, lo=0.0):
    """Leftmost sign change of f on (lo, hi], by grid scan plus bisection.

    f must accept a vector of times. Returns None when the sampled signs
    never flip; callers pick n fine enough for their function class (the
    slack and momentum curves here oscillate on the scale of the horizon,
    so thousands of cells per horizon is plenty except at tangencies).
    """
    ts = np.linspace(lo, hi, n + 1)
    vals = np.asarray(f(ts))
    sign = vals > 0.0
    flips = np.flatnonzero(sign[1:] != sign[:-1])
    if flips.size == 0:
        return None
    i = int(flips[0])
    return bisect(lambda t: float(f(np.array([t]))[0]), ts[i], ts[i + 1])


def spd_random(rng, d, shift=1.0):
    """Random symmetric positive definite matrix with lambda_min >= shift-ish."""
    A = rng.standard_normal((d, d))
    M = A @ A.T / d + shift * np.eye(d)
    return (M + M.T) / 2.0


def mean_se(x, ess):
    """Standard error of the sample mean, discounted by effective sample size."""
    return float(np.std(x, ddof=1) / np.sqrt(ess))


def var_se(x, ess):
    """Standard error of the sample variance via the fourth central moment."""
    xc = x - x.mean()
    m4 = float(np.mean(xc**4))
    s2 = float(np.var(x, ddof=1))
    return float(np.sqrt(max(m4 - s2 * s2, 0.0) / ess))


def combined_mean_z(xa, ess_a, xb, ess_b):
    """|z| of the difference of two independent sample means, per dimension."""
    xa = np.atleast_2d(xa.T).T
    xb = np.atleast_2d(xb.T).T
    se2 = np.var(xa, axis=0, ddof=1) / ess_a + np.var(xb, axis=0, ddof=1) / ess_b
    return np.abs(xa.mean(axis=0) - xb.mean(axis=0)) / np.sqrt(se2)


def ar1_series(rng, L, coeff=0.9):
    """AR(1) chain x_t = coeff * x_{t-1} + eps_t, stationary start."""
    eps = rng.standard_normal(L)
    x = np.empty(L)
    x[0] = eps[0] / np.sqrt(1.0 - coeff**2)
    for t in range(1, L):
        x[t] = coeff * x[t - 1] + eps[t]
    return x
