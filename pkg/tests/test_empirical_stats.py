import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from conftest import MC_COUNT, MC_SEED
from mimo_sinr.analytic_pdf import DensityCurve
from mimo_sinr.channel_mc import sample_sinr_batch
from mimo_sinr.config import SystemConfig
from mimo_sinr.empirical_stats import (
    KdeSettings,
    compare,
    default_grid_bounds,
    kde,
    moment_summary,
    silverman_bandwidth,
)
from mimo_sinr.errors import UsageError


def test_single_sample_is_one_gaussian_bump():
    curve = kde([5.0], KdeSettings(bandwidth=1.0, grid_points=601))
    assert curve.grid[0] == pytest.approx(2.0) and curve.grid[-1] == pytest.approx(8.0)
    assert np.allclose(curve.values, stats.norm.pdf(curve.grid, loc=5.0), rtol=1e-12, atol=0)
    assert curve.grid[np.argmax(curve.values)] == pytest.approx(5.0)


@pytest.mark.parametrize("dist", ["gamma", "bimodal", "lognormal"])
def test_kde_integrates_to_one(dist):
    rng = np.random.default_rng(11)
    x = {
        "gamma": lambda: rng.gamma(2.0, 1.0, 20_000),
        "bimodal": lambda: np.concatenate([rng.normal(0, 1, 5000), rng.normal(8, 0.5, 5000)]),
        "lognormal": lambda: rng.lognormal(0.0, 1.0, 20_000),
    }[dist]()
    curve = kde(x)
    assert curve.kind == "empirical"
    assert np.all(curve.values >= 0)
    assert abs(curve.mass() - 1.0) < 1e-2


def test_kde_standard_normal_l1():
    x = np.random.default_rng(12).normal(size=100_000)
    curve = kde(x)
    l1 = np.trapezoid(np.abs(curve.values - stats.norm.pdf(curve.grid)), curve.grid)
    assert l1 < 0.02


def test_kde_translation_equivariant():
    x = np.random.default_rng(13).gamma(3.0, 1.0, 5000)
    a = kde(x, KdeSettings(bandwidth=0.25))
    b = kde(x + 1024.0, KdeSettings(bandwidth=0.25))
    assert np.allclose(b.grid - 1024.0, a.grid, atol=1e-10)
    assert np.allclose(a.values, b.values, rtol=1e-9, atol=1e-15)


def test_kde_keeps_config(cfg_16_8_10):
    samples = sample_sinr_batch(cfg_16_8_10, 2000, 1)
    assert kde(samples).config == cfg_16_8_10


def test_kde_rejects_bad_input():
    with pytest.raises(UsageError):
        kde([])
    with pytest.raises(UsageError):
        kde([1.0])  # bandwidth rule needs two samples
    with pytest.raises(UsageError):
        kde([1.0, np.nan, 2.0])
    with pytest.raises(UsageError):
        KdeSettings(bandwidth=0.0)
    with pytest.raises(UsageError):
        KdeSettings(bandwidth="scott")
    with pytest.raises(UsageError):
        KdeSettings(grid_points=8)


def test_silverman_rule():
    x = np.random.default_rng(14).normal(size=10_000)
    std = np.std(x, ddof=1)
    iqr = np.subtract(*np.percentile(x, [75, 25])) / 1.34
    assert silverman_bandwidth(x) == pytest.approx(0.9 * min(std, iqr) * 10_000 ** -0.2)
    # heavy atom at one value: IQR collapses, std takes over
    y = np.r_[np.zeros(100), 1.0, 2.0]
    assert silverman_bandwidth(y) == pytest.approx(0.9 * np.std(y, ddof=1) * y.size ** -0.2)
    with pytest.raises(UsageError):
        silverman_bandwidth(np.ones(10))


def _bump(center, scale=1.0, kind="empirical"):
    grid = np.linspace(center - 6, center + 6, 801)
    return DensityCurve(grid, scale * stats.norm.pdf(grid, loc=center), kind)


def test_compare_self_is_zero():
    c = _bump(10.0, kind="analytic")
    d = compare(c, c)
    assert d.l1 == 0.0 and d.sup == 0.0
    assert d.common_grid_points == 801


def test_compare_scaled_copy_gives_own_mass():
    c = _bump(10.0)
    d = compare(c, _bump(10.0, scale=2.0))
    assert d.l1 == pytest.approx(c.mass(), rel=1e-12)
    assert d.sup == pytest.approx(c.values.max())


@settings(max_examples=40, deadline=None)
@given(shift=st.floats(-3, 3), scale=st.floats(0.2, 3), n=st.integers(16, 300))
def test_compare_symmetric(shift, scale, n):
    a = _bump(10.0)
    grid = np.linspace(8.0 + shift, 12.0 + shift, n)
    b = DensityCurve(grid, stats.norm.pdf(grid, loc=10.0 + shift, scale=scale), "empirical")
    assert compare(a, b) == compare(b, a)
    assert 0.0 <= compare(a, b).l1 <= 2.0


def test_compare_respects_min_gamma():
    a = _bump(10.0)
    full = compare(a, _bump(10.5))
    cut = compare(a, _bump(10.5), min_gamma=10.0)
    assert cut.l1 < full.l1


def test_compare_rejects_disjoint_or_mismatched():
    with pytest.raises(UsageError):
        compare(_bump(0.0), _bump(100.0))
    g = np.linspace(0.1, 5, 50)
    a = DensityCurve(g, np.ones(50), "analytic", SystemConfig.from_snr_db(16, 8, 0.0))
    b = DensityCurve(g, np.ones(50), "empirical", SystemConfig.from_snr_db(16, 8, 5.0))
    with pytest.raises(UsageError):
        compare(a, b)


def test_moments_constant_samples():
    m = moment_summary(np.full(100, 3.5))
    assert m.mean == 3.5 and m.variance == 0.0
    assert m.skewness is None and m.excess_kurtosis is None


def test_moments_gaussian():
    m = moment_summary(np.random.default_rng(15).normal(2.0, 3.0, 1_000_000))
    assert abs(m.skewness) < 0.02
    assert abs(m.excess_kurtosis) < 0.05
    assert m.mean == pytest.approx(2.0, abs=0.01)
    assert m.variance == pytest.approx(9.0, rel=0.01)


def test_moments_match_scipy():
    x = np.random.default_rng(16).gamma(2.0, 1.0, 5000)
    m = moment_summary(x)
    assert m.skewness == pytest.approx(stats.skew(x), rel=1e-10)
    assert m.excess_kurtosis == pytest.approx(stats.kurtosis(x), rel=1e-10)
    assert m.variance == pytest.approx(np.var(x), rel=1e-12)


def test_moments_need_four_samples():
    with pytest.raises(UsageError):
        moment_summary([1.0, 2.0, 3.0])


def test_default_grid_bounds_are_quantiles():
    x = np.arange(100_001, dtype=float)
    assert default_grid_bounds(x) == (100.0, 99_900.0)


def test_sinr_skew_shrinks_with_array_size():
    small = sample_sinr_batch(SystemConfig.from_snr_db(16, 8, 5.0), MC_COUNT, MC_SEED)
    big = sample_sinr_batch(SystemConfig.from_snr_db(32, 16, 5.0), MC_COUNT, MC_SEED)
    assert abs(moment_summary(big).skewness) < abs(moment_summary(small).skewness)
