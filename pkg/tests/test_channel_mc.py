import math

import numpy as np
import pytest
from scipy import stats

from conftest import MC_COUNT, MC_SEED
from mimo_sinr.channel_mc import (
    ChannelRealization,
    exact_sinr,
    rng_for_stream,
    sample_channel,
    sample_channel_gains,
    sample_channels,
    sample_sinr_batch,
    sinr_from_channels,
)
from mimo_sinr.config import SystemConfig
from mimo_sinr.errors import UsageError


def transcribed_sinr(h, rho, sigma_h_sq, sigma_n_sq, k):
    """Term-by-term transcription with Python complex scalars only."""
    n = len(h[0])
    g = rho * rho / (n * sigma_h_sq)
    num = g * sum((h[k][i] * h[k][i].conjugate()).real for i in range(n))
    den = sigma_n_sq
    for l in range(len(h)):
        if l == k:
            continue
        norm_l = math.sqrt(sum(abs(v) ** 2 for v in h[l]))
        inner = sum(h[k][i] * h[l][i].conjugate() / norm_l for i in range(n))
        den += g * (inner * inner.conjugate()).real
    return num / den


def test_config_validation():
    with pytest.raises(UsageError):
        SystemConfig(16, 1, 1.0)
    with pytest.raises(UsageError):
        SystemConfig(0, 2, 1.0)
    with pytest.raises(UsageError):
        SystemConfig(4, 2, -1.0)
    cfg = SystemConfig.from_snr_db(16, 8, 10.0)
    assert cfg.snr_db == pytest.approx(10.0)
    assert cfg.c_s == pytest.approx(10.0 / 32)
    assert cfg.c_i == 1 / 32


def test_sample_channel_shape():
    cfg = SystemConfig(4, 2, 1.0)
    real = sample_channel(cfg, rng_for_stream(1, 0))
    assert real.channels.shape == (2, 4)
    assert real.channels.dtype == np.complex128


def test_channel_moments():
    cfg = SystemConfig(1, 2, 1.0, sigma_h_sq=1.0)
    h = sample_channels(cfg, 500_000, rng_for_stream(3, 0)).ravel()  # 1e6 entries
    assert abs(np.mean(np.abs(h) ** 2) - 1.0) < 0.01
    assert abs(h.real.mean()) < 0.01 and abs(h.imag.mean()) < 0.01
    assert np.var(h.real) == pytest.approx(0.5, rel=0.01)
    assert np.var(h.imag) == pytest.approx(0.5, rel=0.01)


def test_exact_sinr_orthogonal_interferer():
    cfg = SystemConfig(2, 2, rho=2.0, sigma_h_sq=1.5, sigma_n_sq=0.7)
    h = np.array([[1 + 1j, 0], [0, 3 - 2j]])
    x = 4.0 / (2 * 1.5) * 2.0
    assert exact_sinr(ChannelRealization(h), cfg, 0) == pytest.approx(x / 0.7, rel=1e-15)


def test_exact_sinr_collinear_interferer():
    cfg = SystemConfig(3, 2, rho=1.7, sigma_n_sq=0.4)
    h1 = np.array([0.3 + 1j, -2.0, 0.5j])
    real = ChannelRealization(np.stack([h1, h1]))
    x = cfg.rho_sq / 3 * np.vdot(h1, h1).real
    assert exact_sinr(real, cfg, 0) == pytest.approx(x / (0.4 + x), rel=1e-14)


def test_exact_sinr_matches_transcription(cfg_16_8_10):
    real = sample_channel(cfg_16_8_10, rng_for_stream(2015, 7))
    h = [[complex(v) for v in row] for row in real.channels]
    for k in (0, 3, 7):
        want = transcribed_sinr(h, cfg_16_8_10.rho, 1.0, 1.0, k)
        assert exact_sinr(real, cfg_16_8_10, k) == pytest.approx(want, rel=1e-12)


def test_exact_sinr_index_checked(cfg_16_8_10):
    real = sample_channel(cfg_16_8_10, rng_for_stream(0, 0))
    for bad in (-1, 8):
        with pytest.raises(UsageError):
            exact_sinr(real, cfg_16_8_10, bad)


def test_vectorized_matches_scalar(cfg_16_8_10):
    h = sample_channels(cfg_16_8_10, 50, rng_for_stream(5, 0))
    for user in (0, 5):
        vec = sinr_from_channels(h, cfg_16_8_10, user)
        ref = [exact_sinr(ChannelRealization(h[i]), cfg_16_8_10, user) for i in range(50)]
        np.testing.assert_allclose(vec, ref, rtol=1e-13)


def test_batch_matches_scalar_path(cfg_16_8_10):
    batch = sample_sinr_batch(cfg_16_8_10, 10, seed=42, cache=False)
    h = sample_channels(cfg_16_8_10, 10, rng_for_stream(42, 0))
    ref = [exact_sinr(ChannelRealization(h[i]), cfg_16_8_10, 0) for i in range(10)]
    np.testing.assert_allclose(batch.samples, ref, rtol=1e-13)


def test_batch_deterministic(cfg_16_8_10):
    a = sample_sinr_batch(cfg_16_8_10, 3000, seed=11, cache=False)
    b = sample_sinr_batch(cfg_16_8_10, 3000, seed=11, cache=False)
    assert a.samples.tobytes() == b.samples.tobytes()
    assert a.count == 3000 and a.seed == 11 and a.config == cfg_16_8_10


def test_batch_independent_of_worker_count():
    cfg = SystemConfig.from_snr_db(32, 16, 5.0)  # several shards
    one = sample_channel_gains(cfg, 20_000, seed=8, workers=1)
    many = sample_channel_gains(cfg, 20_000, seed=8, workers=3)
    assert one.signal.tobytes() == many.signal.tobytes()
    assert one.interference.tobytes() == many.interference.tobytes()


def test_batch_single_sample(cfg_16_8_10):
    s = sample_sinr_batch(cfg_16_8_10, 1, seed=0, cache=False)
    assert s.count == 1 and s.samples[0] > 0


@pytest.mark.parametrize("count", [0, -3, 2.5])
def test_batch_rejects_bad_count(cfg_16_8_10, count):
    with pytest.raises(UsageError):
        sample_sinr_batch(cfg_16_8_10, count, seed=0)


def test_signal_mean_equals_rho_sq(cfg_16_8_10):
    s = sample_sinr_batch(cfg_16_8_10, MC_COUNT, seed=MC_SEED)
    assert s.x.mean() == pytest.approx(cfg_16_8_10.rho_sq, rel=0.005)


def test_samples_below_interference_free_bound(cfg_16_8_10):
    s = sample_sinr_batch(cfg_16_8_10, 100_000, seed=4, cache=False)
    assert np.all(s.samples > 0)
    assert np.all(s.samples < s.x / cfg_16_8_10.sigma_n_sq)
    np.testing.assert_allclose(s.samples, s.x / (1.0 + s.x * s.z), rtol=1e-13)


def test_norm_and_direction_uncorrelated(cfg_16_8_10):
    s = sample_sinr_batch(cfg_16_8_10, 100_000, seed=6, cache=False)
    assert abs(np.corrcoef(s.x, s.z)[0, 1]) < 0.01
    assert s.z.mean() == pytest.approx(7 / 16, rel=0.02)


def test_interference_follows_exact_beta_sum(cfg_16_8_10):
    # each |<h_k', h_l'>|^2 of independent isotropic unit vectors is Beta(1, N-1)
    n, k = cfg_16_8_10.n_antennas, cfg_16_8_10.n_users
    z = sample_sinr_batch(cfg_16_8_10, MC_COUNT, seed=MC_SEED).z
    assert z.var() == pytest.approx((k - 1) * (n - 1) / (n * n * (n + 1)), rel=0.01)
    ref = np.random.default_rng(8).beta(1, n - 1, size=(200_000, k - 1)).sum(axis=1)
    assert stats.ks_2samp(z, ref).pvalue > 1e-3
    # the same test resolves the chi-squared stand-in, so it has power here
    approx = np.random.default_rng(8).gamma(k - 1, 1.0 / n, size=200_000)
    assert stats.ks_2samp(z, approx).pvalue < 1e-6


def test_users_exchangeable(cfg_16_8_10):
    n = 100_000
    first = sinr_from_channels(sample_channels(cfg_16_8_10, n, rng_for_stream(21, 0)),
                               cfg_16_8_10, 0)
    last = sinr_from_channels(sample_channels(cfg_16_8_10, n, rng_for_stream(22, 0)),
                              cfg_16_8_10, 7)
    for stat in (np.mean, np.var):
        a, b = stat(first), stat(last)
        if stat is np.mean:
            se = math.sqrt(np.var(first) / n + np.var(last) / n)
        else:
            m4 = lambda v: np.mean((v - v.mean()) ** 4)
            se = math.sqrt((m4(first) - a * a) / n + (m4(last) - b * b) / n)
        assert abs(a - b) < 3 * se


def test_channel_variance_cancels():
    # same normals, different sigma_h^2: the SINR must not move
    a = sample_sinr_batch(SystemConfig.from_snr_db(16, 8, 5.0, sigma_h_sq=1.0), 2000, 9, cache=False)
    b = sample_sinr_batch(SystemConfig.from_snr_db(16, 8, 5.0, sigma_h_sq=3.7), 2000, 9, cache=False)
    np.testing.assert_allclose(a.samples, b.samples, rtol=1e-12)


def test_snr_sweep_reuses_channels():
    lo = sample_sinr_batch(SystemConfig.from_snr_db(16, 8, 0.0), 5000, seed=77)
    hi = sample_sinr_batch(SystemConfig.from_snr_db(16, 8, 10.0), 5000, seed=77, cache=False)
    np.testing.assert_allclose(lo.z, hi.z, rtol=1e-13)
    assert np.all(hi.samples > lo.samples)
