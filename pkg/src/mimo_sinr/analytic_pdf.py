"""Approximate SINR density under MF precoding and the metrics built on it.

The density is

    f(g) = C(g) * int_0^{1/g} (1/g - v)^(K-2) exp(N v - N sigma_n^2 / (rho^2 v)) v^-(N+1) dv

with ``log C(g) = N log sigma_n^2 - N/g + (K+N-1) log N - N log rho^2
- lgamma(N) - lgamma(K-1) - 2 log g``. The inner integral is evaluated in
log space by the adaptive Gauss-Kronrod kernel in ``_backend``; the
unsimplified convolution form is kept as an independent route for checks.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, optimize

from . import special_fn
from ._backend import kernels
from .config import SystemConfig
from .errors import ConvergenceError, DomainError, UsageError

log = logging.getLogger(__name__)

_TAIL_DENSITY = 1e-14


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances for the inner singular integral and the outer metric integrals.

    ``tail_cutoff=None`` means: double from the mode until the density
    drops below 1e-14.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    tail_cutoff: float | None = None

    def __post_init__(self):
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise UsageError("rel_tol and abs_tol must be > 0")
        if self.max_subdivisions < 10:
            raise UsageError("max_subdivisions must be >= 10")
        if self.tail_cutoff is not None and not self.tail_cutoff > 0:
            raise UsageError("tail_cutoff must be > 0")


DEFAULT_SETTINGS = QuadratureSettings()


@dataclass(frozen=True)
class ModulationParams:
    """Scale and argument factor of the SER expression ``alpha * Q(beta * gamma)``."""

    alpha_tilde: float
    beta_tilde: float

    def __post_init__(self):
        if not self.alpha_tilde >= 0:
            raise UsageError("alpha_tilde must be >= 0")
        if not self.beta_tilde > 0:
            raise UsageError("beta_tilde must be > 0")


# Conventional textbook constants, plugged into alpha * Q(beta * gamma) as written.
MODULATION_PRESETS = {
    "bpsk": ModulationParams(1.0, 2.0),
    "qpsk": ModulationParams(2.0, 1.0),
}


@dataclass(frozen=True)
class GridSpec:
    gamma_min: float
    gamma_max: float
    points: int
    log_spaced: bool = False

    def __post_init__(self):
        if not (0 < self.gamma_min < self.gamma_max and math.isfinite(self.gamma_max)):
            raise UsageError(
                f"need 0 < gamma_min < gamma_max, got [{self.gamma_min!r}, {self.gamma_max!r}]")
        if self.points < 2:
            raise UsageError("grid needs at least 2 points")

    def values(self) -> np.ndarray:
        if self.log_spaced:
            return np.geomspace(self.gamma_min, self.gamma_max, self.points)
        return np.linspace(self.gamma_min, self.gamma_max, self.points)


@dataclass(frozen=True)
class DensityCurve:
    """Density values on a strictly increasing grid.

    ``kind`` is ``"analytic"`` or ``"empirical"``. Empirical curves may
    extend below zero because kernel tails are kept whole.
    """

    grid: np.ndarray
    values: np.ndarray
    kind: str
    config: SystemConfig | None = None
    rel_errors: np.ndarray | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.kind not in ("analytic", "empirical"):
            raise UsageError(f"unknown curve kind {self.kind!r}")
        if grid.ndim != 1 or grid.shape != values.shape:
            raise UsageError("grid and values must be 1-D and the same length")
        if grid.size >= 2 and not np.all(np.diff(grid) > 0):
            raise UsageError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise UsageError("density values must be finite and >= 0")
        if self.kind == "analytic" and np.any(grid <= 0):
            raise UsageError("analytic curves live on gamma > 0")

    def mass(self) -> float:
        """Trapezoid integral over the grid."""
        return float(np.trapezoid(self.values, self.grid))

    def __len__(self):
        return self.grid.size


class FGammaResult(NamedTuple):
    value: float
    log_value: float
    rel_error: float
    subdivisions: int


class MetricResult(NamedTuple):
    value: float
    error: float
    lower: float
    upper: float


def _integrand_params(config: SystemConfig):
    n = config.n_antennas
    return (float(config.n_users - 2), float(n),
            n * config.sigma_n_sq / config.rho_sq, float(n + 1))


def log_c_gamma(gamma, config: SystemConfig):
    """Log of the prefactor ``C_gamma`` of the simplified integral."""
    n, k = config.n_antennas, config.n_users
    const = (n * math.log(config.sigma_n_sq) + (k + n - 1) * math.log(n)
             - n * math.log(config.rho_sq) - math.lgamma(n) - math.lgamma(k - 1))
    g = np.asarray(gamma, dtype=float)
    return const - n / g - 2.0 * np.log(g)


def log_f_gamma_many(gammas, config: SystemConfig,
                     settings: QuadratureSettings = DEFAULT_SETTINGS):
    """Log density and achieved relative error at each ``gamma > 0``.

    Raises :class:`ConvergenceError` naming the first point whose inner
    integral did not converge.
    """
    g = np.asarray(gammas, dtype=float).ravel()
    if np.any(~np.isfinite(g)) or np.any(g <= 0):
        raise DomainError("log_f_gamma_many needs finite gamma > 0")
    if config.n_users < 2:
        raise DomainError("SINR density needs K >= 2")
    p, q, c, r = _integrand_params(config)
    log_c = log_c_gamma(g, config)
    log_abs_tol = math.log(settings.abs_tol) - log_c
    log_int, rel_err, panels, status = kernels.integrate_log_nu_many(
        1.0 / g, p, q, c, r, settings.rel_tol, log_abs_tol, settings.max_subdivisions)
    bad = np.nonzero(status != 0)[0]
    if bad.size:
        i = int(bad[0])
        raise ConvergenceError(
            "inner SINR integral did not converge",
            value=float(np.exp(log_c[i] + log_int[i])),
            error=float(rel_err[i] * np.exp(log_c[i] + log_int[i])),
            gamma=float(g[i]))
    return log_c + log_int, rel_err, panels


def f_gamma_detail(gamma: float, config: SystemConfig,
                   settings: QuadratureSettings = DEFAULT_SETTINGS) -> FGammaResult:
    """Density at one point with its log value and quadrature diagnostics."""
    if math.isnan(gamma):
        raise DomainError("gamma is NaN")
    if gamma <= 0 or math.isinf(gamma):
        return FGammaResult(0.0, -math.inf, 0.0, 0)
    lv, rel, pan = log_f_gamma_many([gamma], config, settings)
    return FGammaResult(float(np.exp(lv[0])), float(lv[0]), float(rel[0]), int(pan[0]))


def f_gamma(gamma: float, config: SystemConfig,
            settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Approximate SINR density at ``gamma``; zero off the positive axis."""
    return f_gamma_detail(gamma, config, settings).value


def _pool_size():
    from .channel_mc import worker_count
    return worker_count()


def f_gamma_curve(config: SystemConfig, grid_spec: GridSpec,
                  settings: QuadratureSettings = DEFAULT_SETTINGS,
                  workers: int | None = None) -> DensityCurve:
    """Analytic density on a uniform (or log-uniform) grid."""
    grid = grid_spec.values()
    workers = _pool_size() if workers is None else max(1, workers)
    if workers == 1 or grid.size < 64:
        lv, rel, _ = log_f_gamma_many(grid, config, settings)
    else:
        chunks = np.array_split(grid, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ch: log_f_gamma_many(ch, config, settings), chunks))
        lv = np.concatenate([p[0] for p in parts])
        rel = np.concatenate([p[1] for p in parts])
    return DensityCurve(grid, np.exp(lv), "analytic", config, rel_errors=rel)


# --- unsimplified convolution route -------------------------------------------------


def _log_convolution(w: float, config: SystemConfig, rel_tol: float) -> float:
    """log of int_0^w f_z(z) f_t(w - z) dz with an independent integrator."""
    if not w > 0:
        return -math.inf

    def log_term(z):
        return special_fn.log_f_z(z, config) + special_fn.log_f_t(w - z, config)

    zs = np.linspace(0.0, w, 4003)[1:-1]
    vals = log_term(zs)
    i = int(np.argmax(vals))
    peak = float(vals[i])
    if not math.isfinite(peak):
        return -math.inf
    # refine the split point so quad sees the peak
    lo = zs[max(i - 1, 0)]
    hi = zs[min(i + 1, zs.size - 1)]
    res = optimize.minimize_scalar(lambda z: -float(log_term(z)), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-14 * w})
    zmax = float(res.x) if res.success else float(zs[i])
    peak = max(peak, float(log_term(zmax)))
    val, _ = integrate.quad(lambda z: math.exp(float(log_term(z)) - peak), 0.0, w,
                            points=[zmax], epsabs=0.0, epsrel=rel_tol, limit=1000)
    return math.log(val) + peak if val > 0 else -math.inf


def f_w(w: float, config: SystemConfig, rel_tol: float = 1e-11) -> float:
    """Density of ``w = t + z`` by direct convolution of the two densities."""
    return math.exp(_log_convolution(w, config, rel_tol))


def f_gamma_convolution(gamma: float, config: SystemConfig, rel_tol: float = 1e-11) -> float:
    """SINR density via ``f_w(1/gamma) / gamma^2`` without the substitution.

    Slow; used to cross-check :func:`f_gamma`.
    """
    if gamma <= 0:
        return 0.0
    return math.exp(_log_convolution(1.0 / gamma, config, rel_tol) - 2.0 * math.log(gamma))


# --- outer integrals ----------------------------------------------------------------


def _log_f_scalar(gamma, config, settings):
    return float(log_f_gamma_many([gamma], config, settings)[0][0])


def density_mode(config: SystemConfig, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """SINR value at which the approximate density peaks."""
    n = config.n_antennas
    mean_t = config.sigma_n_sq / config.rho_sq * (n / (n - 1) if n > 1 else 1.0)
    mean_z = (config.n_users - 1) / n
    guess = 1.0 / (mean_t + mean_z)
    lo, hi = guess / 100.0, guess * 100.0
    for _ in range(8):
        grid = np.geomspace(lo, hi, 161)
        lv = log_f_gamma_many(grid, config, settings)[0]
        i = int(np.argmax(lv))
        if 0 < i < grid.size - 1:
            break
        lo, hi = (lo / 100.0, hi) if i == 0 else (lo, hi * 100.0)
    else:
        raise ConvergenceError("could not bracket the density mode")
    res = optimize.minimize_scalar(lambda u: -_log_f_scalar(math.exp(u), config, settings),
                                   bounds=(math.log(grid[i - 1]), math.log(grid[i + 1])),
                                   method="bounded", options={"xatol": 1e-10})
    return float(math.exp(res.x))


def support_bounds(config: SystemConfig, settings: QuadratureSettings = DEFAULT_SETTINGS,
                   mode: float | None = None) -> tuple[float, float]:
    """``(lower, upper)`` outside which the density is below 1e-14.

    The upper bound doubles from the mode (or is ``settings.tail_cutoff``
    when given); the lower bound halves from the mode.
    """
    mode = density_mode(config, settings) if mode is None else mode
    floor = math.log(_TAIL_DENSITY)
    upper = settings.tail_cutoff
    if upper is None:
        upper = 2.0 * mode
        while _log_f_scalar(upper, config, settings) >= floor:
            upper *= 2.0
            if upper > 1e12:
                raise ConvergenceError("density tail does not decay", gamma=upper)
    lower = 0.5 * mode
    while lower > 1e-300 and _log_f_scalar(lower, config, settings) >= floor:
        lower *= 0.5
    return lower, upper


def expectation(fn: Callable[[float], float], config: SystemConfig,
                settings: QuadratureSettings = DEFAULT_SETTINGS) -> MetricResult:
    """``int fn(g) f(g) dg`` over the numerically relevant support.

    The outer integral is split at the mode and done by QUADPACK; the error
    returned is QUADPACK's estimate for the two halves (truncation error is
    added by callers that can bound it).
    """
    mode = density_mode(config, settings)
    lower, upper = support_bounds(config, settings, mode)
    upper_mode = min(mode, upper)

    def integrand(g):
        return fn(g) * math.exp(_log_f_scalar(g, config, settings))

    total = 0.0
    err = 0.0
    for a, b in ((lower, upper_mode), (upper_mode, upper)):
        if b <= a:
            continue
        val, e = integrate.quad(integrand, a, b, epsabs=settings.abs_tol,
                                epsrel=max(settings.rel_tol * 10, 1e-10), limit=500)
        total += val
        err += e
    return MetricResult(total, err, lower, upper)


def normalization(config: SystemConfig, settings: QuadratureSettings = DEFAULT_SETTINGS) -> MetricResult:
    """Total mass of the approximate density (1 up to quadrature error)."""
    return expectation(lambda g: 1.0, config, settings)


def avg_ser(config: SystemConfig, mod: ModulationParams,
            settings: QuadratureSettings = DEFAULT_SETTINGS, full_output: bool = False):
    """Average symbol error rate ``alpha * E[Q(beta * gamma)]`` under the density.

    With ``full_output`` returns a :class:`MetricResult` whose error adds
    the truncation bound ``alpha * Q(beta * upper)``.
    """
    if mod.alpha_tilde == 0:
        res = MetricResult(0.0, 0.0, 0.0, math.inf)
        return res if full_output else 0.0
    beta = mod.beta_tilde
    res = expectation(lambda g: special_fn.q_function(beta * g), config, settings)
    value = min(max(mod.alpha_tilde * res.value, 0.0), mod.alpha_tilde / 2.0)
    err = mod.alpha_tilde * (res.error + special_fn.q_function(beta * res.upper))
    out = MetricResult(value, err, res.lower, res.upper)
    return out if full_output else value


def avg_sum_rate(config: SystemConfig, settings: QuadratureSettings = DEFAULT_SETTINGS,
                 full_output: bool = False):
    """Average sum rate ``K * E[log2(1 + gamma)]`` under the density."""
    k = config.n_users
    res = expectation(lambda g: math.log2(1.0 + g), config, settings)
    # mass beyond the cutoff is below f(upper) * upper with f < 1e-14 there
    trunc = k * math.log2(1.0 + 2.0 * res.upper) * _TAIL_DENSITY * res.upper
    log.debug("sum-rate truncation bound %.3g at gamma=%.6g", trunc, res.upper)
    out = MetricResult(k * res.value, k * res.error + trunc, res.lower, res.upper)
    return out if full_output else out.value
