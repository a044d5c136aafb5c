"""Log-domain densities of the chi-squared building blocks, log-gamma and Q.

Every density here returns its natural logarithm; ``-inf`` encodes a zero
density. Scalars and numpy arrays are both accepted.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .config import SystemConfig
from .errors import DomainError

_SQRT2 = math.sqrt(2.0)


def log_gamma(a: float) -> float:
    """Natural log of the gamma function for ``a > 0``."""
    if not a > 0:
        raise DomainError(f"log_gamma requires a > 0, got {a!r}")
    return math.lgamma(a)


def q_function(x):
    """Standard normal tail probability ``P(Z > x)``.

    Evaluated through ``erfc`` so that the far right tail keeps full
    relative precision.
    """
    out = 0.5 * special.erfc(np.asarray(x, dtype=float) / _SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def _log_positive(v, log_body):
    v = np.asarray(v, dtype=float)
    if np.isnan(v).any():
        raise DomainError("density argument is NaN")
    out = np.full(v.shape, -np.inf)
    pos = v > 0
    if np.any(pos):
        out[pos] = log_body(v[pos])
    return float(out) if out.ndim == 0 else out


def log_f_x(x, config: SystemConfig):
    """Log density of the received signal power ``x``.

    ``x`` is ``C_S`` times a chi-squared variable with ``2N`` degrees of
    freedom, ``C_S = rho**2 / (2N)``.
    """
    n = config.n_antennas
    two_cs = 2.0 * config.c_s
    norm = n * math.log(two_cs) + math.lgamma(n)
    return _log_positive(x, lambda v: (n - 1) * np.log(v) - v / two_cs - norm)


def log_f_z(z, config: SystemConfig):
    """Log density of the normalized interference power ``z``.

    Chi-squared with ``2K - 2`` degrees of freedom scaled by ``C_I = 1/(2N)``.
    """
    k = config.n_users
    if k < 2:
        raise DomainError("interference density needs K >= 2")
    two_ci = 2.0 * config.c_i
    norm = (k - 1) * math.log(two_ci) + math.lgamma(k - 1)
    return _log_positive(z, lambda v: (k - 2) * np.log(v) - v / two_ci - norm)


def log_f_t(t, config: SystemConfig):
    """Log density of ``t = sigma_n**2 / x`` (inverse-gamma shaped)."""
    n = config.n_antennas
    s2 = config.sigma_n_sq
    two_cs = 2.0 * config.c_s
    norm = n * math.log(two_cs) + math.lgamma(n) - n * math.log(s2)
    return _log_positive(t, lambda v: -(n + 1) * np.log(v) - s2 / (two_cs * v) - norm)
