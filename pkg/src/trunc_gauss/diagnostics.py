"""Chain diagnostics: effective sample size, timing decomposition, moment checks.

ESS follows the initial-sequence construction on autocorrelation pairs:
sum rho_hat over lag pairs while the pair sums stay positive, enforce
monotone decrease, then ESS = L / (1 + 2 sum rho_hat).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import next_fast_len

from .errors import DegenerateSeries

MIN_SERIES_LENGTH = 10
DEFAULT_TARGET_ESS = 100


@dataclass
class Timings:
    """Wall-clock inputs to the summary: one-time setup and sampling loop time."""

    t_pre: float
    wall_time_sampling: float


@dataclass
class ChainResult:
    """Samples plus the diagnostics and timing decomposition derived from them.

    t_iter is the average cost of one effective sample, so
    t1 = t_pre + t_iter and t100 = t_pre + 100 * t_iter hold by construction.
    """

    samples: np.ndarray
    t_pre: float
    wall_time_sampling: float
    ess: np.ndarray
    ess_min: float
    n_iterations: int
    n_es: float
    t_iter: float
    t1: float
    t100: float
    n_events: int | None = None
    method: str | None = None


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance estimates gamma_hat_k for k = 0 .. L-1, via FFT."""
    L = x.shape[0]
    xc = x - x.mean()
    nfft = next_fast_len(2 * L)
    f = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:L]
    return acov / L


def ess_univariate(series: np.ndarray) -> float:
    """Effective sample size of one scalar chain, clipped to (0, L].

    Raises DegenerateSeries for a constant series and ValueError for one too
    short to autocorrelate meaningfully.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    L = x.shape[0]
    if L < MIN_SERIES_LENGTH:
        raise ValueError(f"series has {L} points; need at least {MIN_SERIES_LENGTH}")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    acov = _autocovariance(x)
    if acov[0] <= 0.0:
        raise DegenerateSeries("series is constant")
    rho = acov / acov[0]

    # Sum autocorrelations over lag pairs while the pair sums remain positive,
    # forcing the sequence of pair sums to be non-increasing.
    total = 0.0
    prev = np.inf
    for m in range(L // 2):
        pair = rho[2 * m] + rho[2 * m + 1]
        if pair <= 0.0:
            break
        if pair > prev:
            pair = prev
        total += pair
        prev = pair
    tau = 2.0 * total - 1.0
    if tau <= 0.0:
        return float(L)
    return float(min(L, L / tau))


def ess_per_dimension(samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValueError("samples must be a 2-d array (iterations by dimension)")
    return np.array([ess_univariate(samples[:, j]) for j in range(samples.shape[1])])


def summarize(
    samples: np.ndarray,
    timings: Timings,
    target_ess: int = DEFAULT_TARGET_ESS,
) -> ChainResult:
    """Diagnostics and timing decomposition for a (post-burn-in) chain.

    n_es = L / ESS_min is how many iterations one effective sample costs, so
    t_iter = wall_time_sampling * n_es / L = wall_time_sampling / ESS_min.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValueError("samples must be a 2-d array (iterations by dimension)")
    L, d = samples.shape
    if L < MIN_SERIES_LENGTH:
        raise ValueError(f"chain has {L} samples; need at least {MIN_SERIES_LENGTH}")
    if target_ess <= 0:
        raise ValueError("target_ess must be positive")
    if d > 0:
        ess = ess_per_dimension(samples)
        ess_min = float(np.min(ess))
    else:
        ess = np.zeros(0)
        ess_min = float(L)
    n_es = L / ess_min
    t_iter = timings.wall_time_sampling / ess_min
    return ChainResult(
        samples=samples,
        t_pre=timings.t_pre,
        wall_time_sampling=timings.wall_time_sampling,
        ess=ess,
        ess_min=ess_min,
        n_iterations=L,
        n_es=n_es,
        t_iter=t_iter,
        t1=timings.t_pre + t_iter,
        t100=timings.t_pre + 100.0 * t_iter,
    )


@dataclass
class MomentReport:
    """Per-dimension z-scores of sample means against reference moments."""

    z_scores: np.ndarray
    flagged: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.intp))
    passed: bool = True
    ess: np.ndarray = field(default_factory=lambda: np.zeros(0))


def moment_check(
    samples: np.ndarray,
    reference_mean: np.ndarray,
    reference_cov: np.ndarray,
    tolerance_se: float = 3.0,
) -> MomentReport:
    """Flag dimensions whose sample mean is further than tolerance_se standard
    errors from the reference mean, with standard errors based on ESS rather
    than the raw chain length."""
    samples = np.asarray(samples, dtype=np.float64)
    reference_mean = np.asarray(reference_mean, dtype=np.float64)
    reference_cov = np.atleast_2d(np.asarray(reference_cov, dtype=np.float64))
    if samples.ndim != 2:
        raise ValueError("samples must be a 2-d array")
    d = samples.shape[1]
    if reference_mean.shape != (d,) or reference_cov.shape != (d, d):
        raise ValueError("reference moments do not match the sample dimension")
    if tolerance_se <= 0:
        raise ValueError("tolerance_se must be positive")
    if d == 0:
        return MomentReport(z_scores=np.zeros(0))
    ess = ess_per_dimension(samples)
    se = np.sqrt(np.diag(reference_cov) / ess)
    deviation = samples.mean(axis=0) - reference_mean
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, deviation / se, np.where(deviation == 0, 0.0, np.inf))
    flagged = np.flatnonzero(np.abs(z) > tolerance_se)
    return MomentReport(z_scores=z, flagged=flagged, passed=flagged.size == 0, ess=ess)


def metrics_dict(result: ChainResult) -> dict:
    """Metric fields serialized for the CLI and benchmark outputs."""
    out = {
        "ess": [float(v) for v in result.ess],
        "ess_min": float(result.ess_min),
        "n_es": float(result.n_es),
        "t_pre_s": float(result.t_pre),
        "t_iter_s": float(result.t_iter),
        "t1_s": float(result.t1),
        "t100_s": float(result.t100),
        "n_iterations": int(result.n_iterations),
    }
    if result.n_events is not None:
        out["n_events"] = int(result.n_events)
    if result.method is not None:
        out["method"] = result.method
    return out
