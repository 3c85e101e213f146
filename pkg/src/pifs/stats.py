"""Means, norm-based hypothesis tests, and bootstrap bands for step functions.

Treating the 1-norm of an indicator summary as a random variable enables a
two-sample z-test on corpora of diagrams; resampling the functions
themselves yields percentile intervals and sup-norm confidence bands.  All
randomness comes from the counter-based Philox generator, so results are
reproducible across platforms and independent of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from .stepfn import EMPTY, StepFunction, linear_combine, lp_norm

__all__ = [
    "ZTestResult",
    "ConfidenceBand",
    "mean_pif",
    "norm_variance",
    "two_sample_z_test",
    "bootstrap_percentile",
    "confidence_band",
]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def empirical_quantile(sorted_values: np.ndarray, q: float) -> float:
    """Classical order-statistic quantile: the ceil(q*B)-th smallest value."""
    b = len(sorted_values)
    if b == 0:
        raise ValueError("empty sample")
    k = min(b - 1, max(0, math.ceil(q * b) - 1))
    return float(sorted_values[k])


def mean_pif(fs: Sequence[StepFunction]) -> StepFunction:
    """Pointwise mean of a nonempty set of step functions."""
    if len(fs) == 0:
        raise ValueError("mean of an empty set of functions")
    acc = EMPTY
    for f in fs:
        acc = linear_combine(1.0, acc, 1.0, f)
    return linear_combine(1.0 / len(fs), acc, 0.0, EMPTY)


def norm_variance(fs: Sequence[StepFunction], y: float) -> float:
    """Sample variance of the 1-norms around ``y`` with the n-1 divisor."""
    n = len(fs)
    if n < 2:
        raise ValueError(f"variance needs at least two functions, got {n}")
    return math.fsum((lp_norm(f, 1) - y) ** 2 for f in fs) / (n - 1)


@dataclass(frozen=True)
class ZTestResult:
    """Two-sided z-test on the 1-norms of two families of step functions."""

    z: float
    p_value: float
    reject: bool
    y1: float
    y2: float
    s1_sq: float
    s2_sq: float
    n: int
    alpha: float
    critical: float


def two_sample_z_test(
    fs1: Sequence[StepFunction], fs2: Sequence[StepFunction], alpha: float
) -> ZTestResult:
    """Test whether the mean-summary 1-norms of two samples differ.

    ``Y_i`` is the 1-norm of the mean function of sample ``i`` and ``s_i^2``
    the sample variance of the individual 1-norms; the statistic is
    ``z = (Y1 - Y2) / sqrt(s1^2/n + s2^2/n)`` with a two-sided p-value from
    the standard normal.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha!r}")
    n = len(fs1)
    if len(fs2) != n:
        raise ValueError(f"sample sizes differ: {n} vs {len(fs2)}")
    if n < 2:
        raise ValueError(f"need at least two functions per sample, got {n}")
    y1 = lp_norm(mean_pif(fs1), 1)
    y2 = lp_norm(mean_pif(fs2), 1)
    s1_sq = norm_variance(fs1, y1)
    s2_sq = norm_variance(fs2, y2)
    denom = math.sqrt(s1_sq / n + s2_sq / n)
    if denom == 0.0:
        z = 0.0 if y1 == y2 else math.copysign(math.inf, y1 - y2)
    else:
        z = (y1 - y2) / denom
    p_value = 0.0 if math.isinf(z) else math.erfc(abs(z) / math.sqrt(2.0))
    critical = NormalDist().inv_cdf(1.0 - alpha / 2.0)
    return ZTestResult(
        z=z,
        p_value=p_value,
        reject=abs(z) > critical,
        y1=y1,
        y2=y2,
        s1_sq=s1_sq,
        s2_sq=s2_sq,
        n=n,
        alpha=alpha,
        critical=critical,
    )


def bootstrap_percentile(
    samples: Sequence[float],
    B: int,
    alpha: float,
    seed: int,
    statistic: Callable[[np.ndarray], float] | None = None,
) -> tuple[float, float]:
    """Percentile interval from ``B`` resamples drawn with replacement.

    Returns the (alpha, 1-alpha) empirical quantiles of the statistic
    (sample mean by default) over the bootstrap replicates.
    """
    data = np.asarray(samples, dtype=float)
    if data.size == 0:
        raise ValueError("empty sample")
    if B < 100:
        raise ValueError(f"need at least 100 replicates, got {B}")
    if not 0 < alpha < 0.5:
        raise ValueError(f"alpha must be in (0, 0.5), got {alpha!r}")
    idx = _rng(seed).integers(0, data.size, size=(B, data.size))
    if statistic is None:
        stats = data[idx].mean(axis=1)
    else:
        stats = np.array([statistic(data[row]) for row in idx])
    stats.sort()
    return empirical_quantile(stats, alpha), empirical_quantile(stats, 1.0 - alpha)


@dataclass(frozen=True)
class ConfidenceBand:
    """Lower/upper step functions bracketing a mean at level ``1 - alpha``."""

    lower: StepFunction
    upper: StepFunction
    alpha: float
    theta_hat: float


def confidence_band(
    fs: Sequence[StepFunction], B: int, alpha: float, seed: int
) -> ConfidenceBand:
    """Sup-norm bootstrap confidence band for the mean of ``fs``.

    Each replicate resamples the ``n`` functions with replacement and takes
    ``theta* = sqrt(n) * sup |resample mean - sample mean|``; the band is the
    sample mean shifted by ``+-theta_hat / sqrt(n)`` on each interval, where
    ``theta_hat`` is the (1-alpha) empirical quantile of the replicates.
    """
    n = len(fs)
    if n < 2:
        raise ValueError(f"need at least two functions, got {n}")
    if B < 100:
        raise ValueError(f"need at least 100 replicates, got {B}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha!r}")
    center = mean_pif(fs)

    # all inputs are constant on the intervals of the pooled breakpoint grid,
    # so the sup over the real line is a max over grid intervals
    grid = np.unique(np.concatenate([np.asarray(f.breakpoints) for f in fs]))
    if grid.size >= 2:
        lefts = grid[:-1]
        table = np.stack([f.sample_values(lefts) for f in fs])
        center_vals = table.mean(axis=0)
        idx = _rng(seed).integers(0, n, size=(B, n))
        rep_means = table[idx].mean(axis=1)
        theta_star = math.sqrt(n) * np.abs(rep_means - center_vals).max(axis=1)
    else:
        theta_star = np.zeros(B)
    theta_star.sort()
    theta_hat = empirical_quantile(theta_star, 1.0 - alpha)

    shift = theta_hat / math.sqrt(n)
    if center.is_empty:
        lower = upper = EMPTY
    else:
        lower = StepFunction(center.breakpoints, tuple(v - shift for v in center.values))
        upper = StepFunction(center.breakpoints, tuple(v + shift for v in center.values))
    return ConfidenceBand(lower=lower, upper=upper, alpha=alpha, theta_hat=theta_hat)
