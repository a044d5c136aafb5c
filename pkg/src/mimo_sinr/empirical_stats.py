"""Empirical SINR densities and agreement metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._backend import kernels
from .analytic_pdf import DensityCurve
from .channel_mc import SinrSampleSet
from .errors import UsageError


@dataclass(frozen=True)
class KdeSettings:
    """Gaussian-kernel KDE options.

    ``bandwidth`` is a positive float or the rule tag ``"silverman"``.
    """

    bandwidth: float | str = "silverman"
    grid_points: int = 512

    def __post_init__(self):
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "silverman":
                raise UsageError(f"unknown bandwidth rule {self.bandwidth!r}")
        elif not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise UsageError("explicit bandwidth must be > 0")
        if self.grid_points < 16:
            raise UsageError("grid_points must be >= 16")


class DensityDistance(NamedTuple):
    l1: float
    sup: float
    common_grid_points: int


class MomentSummary(NamedTuple):
    mean: float
    variance: float
    skewness: float | None
    excess_kurtosis: float | None


def _as_array(samples):
    if isinstance(samples, SinrSampleSet):
        return np.asarray(samples.samples, dtype=float), samples.config
    return np.asarray(samples, dtype=float).ravel(), None


def silverman_bandwidth(x) -> float:
    """``0.9 * min(std, IQR / 1.34) * n ** -0.2``.

    Falls back to whichever spread measure is nonzero; raises when the
    samples are all equal.
    """
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise UsageError("bandwidth rule needs at least 2 samples")
    std = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25) / 1.34
    spread = min(std, iqr) if iqr > 0 else std
    if not spread > 0:
        raise UsageError("bandwidth rule is undefined for constant samples")
    return 0.9 * spread * x.size ** -0.2


def kde(samples, settings: KdeSettings = KdeSettings()) -> DensityCurve:
    """Gaussian KDE on a uniform grid spanning ``[min - 3h, max + 3h]``."""
    x, config = _as_array(samples)
    if x.size == 0:
        raise UsageError("cannot estimate a density from no samples")
    if not np.all(np.isfinite(x)):
        raise UsageError("samples must be finite")
    h = silverman_bandwidth(x) if settings.bandwidth == "silverman" else float(settings.bandwidth)
    xs = np.sort(x)
    lo = xs[0] - 3.0 * h
    hi = xs[-1] + 3.0 * h
    n = settings.grid_points
    dx = (hi - lo) / (n - 1)
    values = kernels.kde_uniform_grid(xs, lo, dx, n, h)
    grid = lo + dx * np.arange(n)
    return DensityCurve(grid, np.maximum(values, 0.0), "empirical", config)


def compare(analytic: DensityCurve, empirical: DensityCurve,
            min_gamma: float | None = None) -> DensityDistance:
    """L1 and sup distance on the union grid restricted to the common support.

    Both curves are linearly interpolated onto the union of their grid
    points inside the overlap (and above ``min_gamma`` when given).
    """
    if (analytic.config is not None and empirical.config is not None
            and analytic.config != empirical.config):
        raise UsageError("curves come from different configurations")
    lo = max(analytic.grid[0], empirical.grid[0])
    hi = min(analytic.grid[-1], empirical.grid[-1])
    if min_gamma is not None:
        lo = max(lo, min_gamma)
    if not lo < hi:
        raise UsageError("curves have no overlapping support")
    grid = np.union1d(analytic.grid, empirical.grid)
    grid = grid[(grid >= lo) & (grid <= hi)]
    grid = np.union1d(grid, [lo, hi])
    a = np.interp(grid, analytic.grid, analytic.values)
    b = np.interp(grid, empirical.grid, empirical.values)
    diff = np.abs(a - b)
    return DensityDistance(float(np.trapezoid(diff, grid)), float(diff.max()), int(grid.size))


def moment_summary(samples) -> MomentSummary:
    """Mean, variance, skewness and excess kurtosis (population moments).

    Skewness and kurtosis are ``None`` when the variance is zero.
    """
    x, _ = _as_array(samples)
    if x.size < 4:
        raise UsageError("moment summary needs at least 4 samples")
    mean = float(np.mean(x))
    d = x - mean
    m2 = float(np.mean(d * d))
    if m2 <= 0.0 or m2 <= (np.finfo(float).eps * abs(mean)) ** 2:
        return MomentSummary(mean, 0.0, None, None)
    m3 = float(np.mean(d ** 3))
    m4 = float(np.mean(d ** 4))
    return MomentSummary(mean, m2, m3 / m2 ** 1.5, m4 / (m2 * m2) - 3.0)


def default_grid_bounds(samples, lower_q: float = 0.001, upper_q: float = 0.999):
    """Sample-quantile bounds for analytic grids and comparisons."""
    x, _ = _as_array(samples)
    lo, hi = np.quantile(x, [lower_q, upper_q])
    return float(lo), float(hi)
