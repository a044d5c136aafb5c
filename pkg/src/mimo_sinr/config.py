"""Scenario parameters for the single-cell MF-precoded downlink."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import UsageError


@dataclass(frozen=True)
class SystemConfig:
    """One downlink scenario.

    Parameters
    ----------
    n_antennas : int
        Number of BS antennas, N.
    n_users : int
        Number of single-antenna users, K (at least 2).
    rho : float
        Square root of the transmit-power parameter.
    sigma_h_sq : float
        Per-component channel variance.
    sigma_n_sq : float
        Receiver noise variance.
    """

    n_antennas: int
    n_users: int
    rho: float
    sigma_h_sq: float = 1.0
    sigma_n_sq: float = 1.0

    def __post_init__(self):
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise UsageError(f"n_antennas must be a positive integer, got {self.n_antennas!r}")
        if int(self.n_users) != self.n_users or self.n_users < 2:
            raise UsageError(f"n_users must be an integer >= 2, got {self.n_users!r}")
        for name in ("rho", "sigma_h_sq", "sigma_n_sq"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise UsageError(f"{name} must be finite and > 0, got {value!r}")
        object.__setattr__(self, "n_antennas", int(self.n_antennas))
        object.__setattr__(self, "n_users", int(self.n_users))
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "sigma_h_sq", float(self.sigma_h_sq))
        object.__setattr__(self, "sigma_n_sq", float(self.sigma_n_sq))
        if not math.isfinite(self.snr_db):
            raise UsageError("rho**2 / sigma_n_sq must give a finite SNR in dB")

    @classmethod
    def from_snr_db(cls, n_antennas, n_users, snr_db, sigma_h_sq=1.0, sigma_n_sq=1.0):
        """Build a config whose rho**2 / sigma_n_sq equals ``snr_db`` in dB."""
        rho = math.sqrt(sigma_n_sq * 10.0 ** (snr_db / 10.0))
        return cls(n_antennas, n_users, rho, sigma_h_sq, sigma_n_sq)

    @property
    def rho_sq(self) -> float:
        return self.rho * self.rho

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.rho_sq / self.sigma_n_sq)

    @property
    def c_s(self) -> float:
        """Scale of the signal-power chi-squared variable, rho**2 / (2N)."""
        return self.rho_sq / (2.0 * self.n_antennas)

    @property
    def c_i(self) -> float:
        """Scale of the interference chi-squared variable, 1 / (2N)."""
        return 1.0 / (2.0 * self.n_antennas)

    def to_dict(self) -> dict:
        return {
            "n_antennas": self.n_antennas,
            "n_users": self.n_users,
            "rho": self.rho,
            "sigma_h_sq": self.sigma_h_sq,
            "sigma_n_sq": self.sigma_n_sq,
            "snr_db": self.snr_db,
        }

    def tag(self) -> str:
        """Short filesystem-safe label, e.g. ``N16_K8_snr10dB``."""
        snr = f"{self.snr_db:.6g}".replace("-", "m").replace(".", "p")
        return f"N{self.n_antennas}_K{self.n_users}_snr{snr}dB"
