"""Monte Carlo oracle: Rayleigh channel draws and the exact MF-precoded SINR.

The batch sampler splits the requested count into fixed-size shards. Shard
``i`` draws from ``PCG64(SeedSequence(seed, spawn_key=(i,)))``, so results
do not depend on how many workers process the shards.
"""

from __future__ import annotations

import functools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig
from .errors import UsageError

__all__ = [
    "SystemConfig",
    "ChannelRealization",
    "ChannelGains",
    "SinrSampleSet",
    "sample_channel",
    "sample_channels",
    "exact_sinr",
    "sinr_from_channels",
    "sample_channel_gains",
    "sample_sinr_batch",
    "rng_for_stream",
    "worker_count",
]

# complex entries generated per shard; keeps one shard near 32 MB
_SHARD_ENTRIES = 1 << 21


@dataclass(frozen=True)
class ChannelRealization:
    """K channel vectors of length N, stored as a ``(K, N)`` complex array."""

    channels: np.ndarray

    def __post_init__(self):
        if self.channels.ndim != 2:
            raise UsageError("channels must be a (K, N) array")


@dataclass(frozen=True)
class ChannelGains:
    """SNR-free pieces of the exact SINR for user 0, one entry per draw.

    ``signal[i]`` is ``||h_0||^2 / (N sigma_h^2)`` and ``interference[i]``
    is ``sum_{l>0} |h_0^T h_l^*|^2 / ||h_l||^2 / (N sigma_h^2)``. The SINR
    for any power is ``rho^2 signal / (sigma_n^2 + rho^2 interference)``.
    """

    signal: np.ndarray
    interference: np.ndarray
    n_antennas: int
    n_users: int
    sigma_h_sq: float
    seed: int

    @property
    def count(self) -> int:
        return self.signal.size

    @property
    def z(self) -> np.ndarray:
        """Normalized interference ``sum |h_0'^T h_l'^*|^2``."""
        return self.interference / self.signal


@dataclass(frozen=True)
class SinrSampleSet:
    """Exact-SINR draws for user 0 together with their provenance.

    ``x`` and ``z`` hold the signal power and normalized interference of
    each draw, so that ``samples == x / (sigma_n_sq + x * z)``.
    """

    samples: np.ndarray
    config: SystemConfig
    seed: int
    x: np.ndarray | None = field(default=None, repr=False)
    z: np.ndarray | None = field(default=None, repr=False)

    @property
    def count(self) -> int:
        return int(self.samples.size)

    def __len__(self):
        return self.count


def worker_count() -> int:
    """Worker pool size, capped by ``MIMO_SINR_THREADS`` when set."""
    env = os.environ.get("MIMO_SINR_THREADS")
    n = os.cpu_count() or 1
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise UsageError(f"MIMO_SINR_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise UsageError("MIMO_SINR_THREADS must be >= 1")
        n = min(n, cap)
    return max(1, n)


def rng_for_stream(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for ``(seed, stream)``."""
    ss = np.random.SeedSequence(int(seed) % (1 << 64), spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(ss))


def sample_channels(config: SystemConfig, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` channel sets as a ``(count, K, N)`` complex array.

    Entries are CN(0, sigma_h^2): real and imaginary parts are independent
    N(0, sigma_h^2 / 2). All-zero vectors are redrawn.
    """
    shape = (count, config.n_users, config.n_antennas)
    scale = math.sqrt(config.sigma_h_sq / 2.0)
    # interleaved (re, im) pairs viewed as complex128 without a copy
    buf = np.empty(shape + (2,))
    rng.standard_normal(out=buf)
    buf *= scale
    h = buf.view(np.complex128)[..., 0]
    while True:
        zero = ~np.any(h != 0, axis=2)
        if not zero.any():
            return h
        idx = np.nonzero(zero)
        redraw = rng.standard_normal((idx[0].size, config.n_antennas, 2)) * scale
        h[idx] = redraw.view(np.complex128)[..., 0]


def sample_channel(config: SystemConfig, rng_stream: np.random.Generator) -> ChannelRealization:
    """One realization of all K user channels."""
    return ChannelRealization(sample_channels(config, 1, rng_stream)[0])


def exact_sinr(real: ChannelRealization, config: SystemConfig, user_index: int) -> float:
    """SINR of one user under normalized MF precoding, straight from the model.

    Numerator ``rho^2/(N sigma_h^2) h_k^T h_k^*``; each interferer adds
    ``rho^2/(N sigma_h^2) |h_k^T h_l^* / ||h_l|| |^2`` to the noise.
    """
    h = real.channels
    k_users = h.shape[0]
    if not (0 <= user_index < k_users):
        raise UsageError(f"user_index {user_index} out of range for K={k_users}")
    gain = config.rho_sq / (config.n_antennas * config.sigma_h_sq)
    hk = h[user_index]
    signal = gain * np.vdot(hk, hk).real
    interference = 0.0
    for l in range(k_users):
        if l == user_index:
            continue
        hl = h[l]
        beam = hl.conj() / np.linalg.norm(hl)
        interference += gain * abs(hk @ beam) ** 2
    return float(signal / (config.sigma_n_sq + interference))


def _gains_from_channels(h: np.ndarray, sigma_h_sq: float, user_index: int = 0):
    n = h.shape[-1]
    hk = h[:, user_index, :]
    others = h[:, 1:, :] if user_index == 0 else np.delete(h, user_index, axis=1)
    mag = np.abs(h)
    norms = np.einsum("mkn,mkn->mk", mag, mag)
    norm_k = norms[:, user_index]
    norm_l = np.delete(norms, user_index, axis=1)
    # h_k^T h_l^* for every interferer; conjugating h_k keeps the big operand uncopied
    cross = np.einsum("mln,mn->ml", others, hk.conj())
    leak = (cross.real ** 2 + cross.imag ** 2) / norm_l
    scale = 1.0 / (n * sigma_h_sq)
    return norm_k * scale, leak.sum(axis=1) * scale


def sinr_from_channels(h: np.ndarray, config: SystemConfig, user_index: int = 0) -> np.ndarray:
    """Vectorized exact SINR over a ``(count, K, N)`` channel batch."""
    if not (0 <= user_index < h.shape[1]):
        raise UsageError(f"user_index {user_index} out of range for K={h.shape[1]}")
    signal, interference = _gains_from_channels(h, config.sigma_h_sq, user_index)
    rho2 = config.rho_sq
    return rho2 * signal / (config.sigma_n_sq + rho2 * interference)


def _shard_size(config: SystemConfig) -> int:
    per_draw = config.n_users * config.n_antennas
    return max(1, min(1 << 16, _SHARD_ENTRIES // per_draw))


def _run_shard(config, seed, stream, size):
    rng = rng_for_stream(seed, stream)
    h = sample_channels(config, size, rng)
    return _gains_from_channels(h, config.sigma_h_sq)


def _check_count(count):
    if int(count) != count or count < 1:
        raise UsageError(f"sample count must be a positive integer, got {count!r}")
    return int(count)


def sample_channel_gains(config: SystemConfig, count: int, seed: int,
                         workers: int | None = None) -> ChannelGains:
    """Draw the SNR-free SINR components for ``count`` independent channel sets.

    Output is identical for any ``workers``; shards are merged in stream order.
    """
    count = _check_count(count)
    shard = _shard_size(config)
    n_shards = -(-count // shard)
    sizes = [shard] * (n_shards - 1) + [count - shard * (n_shards - 1)]
    workers = worker_count() if workers is None else max(1, int(workers))
    signal = np.empty(count)
    interference = np.empty(count)

    def task(i):
        return i, _run_shard(config, seed, i, sizes[i])

    def store(item):
        i, (s, z) = item
        start = i * shard
        signal[start:start + sizes[i]] = s
        interference[start:start + sizes[i]] = z

    if workers == 1 or n_shards == 1:
        for i in range(n_shards):
            store(task(i))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for item in pool.map(task, range(n_shards)):
                store(item)
    return ChannelGains(signal, interference, config.n_antennas, config.n_users,
                        config.sigma_h_sq, int(seed))


@functools.lru_cache(maxsize=8)
def _cached_gains(n_antennas, n_users, sigma_h_sq, count, seed):
    # rho and sigma_n do not enter the channel draw, so SNR sweeps share it
    cfg = SystemConfig(n_antennas, n_users, 1.0, sigma_h_sq, 1.0)
    return sample_channel_gains(cfg, count, seed)


def sinr_from_gains(gains: ChannelGains, config: SystemConfig) -> SinrSampleSet:
    """Exact SINR samples for ``config`` from pre-drawn channel gains."""
    if (gains.n_antennas, gains.n_users, gains.sigma_h_sq) != (
            config.n_antennas, config.n_users, config.sigma_h_sq):
        raise UsageError("channel gains were drawn for a different (N, K, sigma_h_sq)")
    rho2 = config.rho_sq
    x = rho2 * gains.signal
    gamma = x / (config.sigma_n_sq + rho2 * gains.interference)
    return SinrSampleSet(gamma, config, gains.seed, x=x, z=gains.z)


def sample_sinr_batch(config: SystemConfig, count: int, seed: int,
                      cache: bool = True) -> SinrSampleSet:
    """Exact SINR of user 0 for ``count`` independent channel draws.

    Deterministic in ``(config, count, seed)``. With ``cache`` the channel
    draw is memoized per ``(N, K, sigma_h_sq, count, seed)`` so an SNR sweep
    reuses one set of channels, exactly as re-drawing with the same seed would.
    """
    count = _check_count(count)
    if cache:
        gains = _cached_gains(config.n_antennas, config.n_users, config.sigma_h_sq,
                              count, int(seed))
    else:
        gains = sample_channel_gains(config, count, seed)
    return sinr_from_gains(gains, config)
