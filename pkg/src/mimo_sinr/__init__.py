"""SINR distribution of matched-filter precoded multi-user MIMO downlinks.

Analytic approximate density, a Monte Carlo oracle of the exact SINR,
empirical density tools, and average SER / sum-rate metrics.
"""

from ._backend import BACKEND
from .analytic_pdf import (
    DensityCurve,
    GridSpec,
    ModulationParams,
    QuadratureSettings,
    avg_ser,
    avg_sum_rate,
    f_gamma,
    f_gamma_convolution,
    f_gamma_curve,
    f_w,
    normalization,
)
from .channel_mc import (
    ChannelRealization,
    SinrSampleSet,
    exact_sinr,
    sample_channel,
    sample_sinr_batch,
)
from .config import SystemConfig
from .empirical_stats import DensityDistance, KdeSettings, compare, kde, moment_summary
from .errors import ConvergenceError, DomainError, MimoSinrError, UsageError
from .special_fn import log_f_t, log_f_x, log_f_z, log_gamma, q_function

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChannelRealization",
    "ConvergenceError",
    "DensityCurve",
    "DensityDistance",
    "DomainError",
    "GridSpec",
    "KdeSettings",
    "MimoSinrError",
    "ModulationParams",
    "QuadratureSettings",
    "SinrSampleSet",
    "SystemConfig",
    "UsageError",
    "avg_ser",
    "avg_sum_rate",
    "compare",
    "exact_sinr",
    "f_gamma",
    "f_gamma_convolution",
    "f_gamma_curve",
    "f_w",
    "kde",
    "log_f_t",
    "log_f_x",
    "log_f_z",
    "log_gamma",
    "moment_summary",
    "normalization",
    "q_function",
    "sample_channel",
    "sample_sinr_batch",
]
