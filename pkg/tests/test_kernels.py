import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from mimo_sinr import _kernels_py
from conftest import _kernels_c

needs_c = pytest.mark.skipif(_kernels_c is None, reason="compiled kernels not built")


def log_integrand(v, a, p, q, c, r):
    return p * math.log(a - v) + q * v - c / v - r * math.log(v)


def scipy_log_integral(a, p, q, c, r):
    # independent oracle: shift by a dense-grid maximum, split quad at it
    vs = np.linspace(0, a, 200_003)[1:-1]
    lv = p * np.log(a - vs) + q * vs - c / vs - r * np.log(vs)
    i = int(np.argmax(lv))
    shift = float(lv[i])
    f = lambda v: math.exp(log_integrand(v, a, p, q, c, r) - shift) if 0 < v < a else 0.0
    pts = sorted({vs[max(i - 50, 0)], vs[i], vs[min(i + 50, vs.size - 1)]})
    val, _ = integrate.quad(f, 0, a, points=pts, epsabs=0, epsrel=1e-13, limit=2000)
    return math.log(val) + shift


def params(n, k, snr_db, gamma):
    rho_sq = 10 ** (snr_db / 10)
    return 1.0 / gamma, float(k - 2), float(n), n / rho_sq, float(n + 1)


ORACLE_CASES = [
    (16, 8, 10.0, 1.5),
    (16, 8, 0.0, 0.3),
    (64, 8, 10.0, 6.0),
    (4, 2, 5.0, 0.8),
    (16, 2, 20.0, 12.0),
    (128, 64, 10.0, 1.9),
]


@pytest.mark.parametrize("case", ORACLE_CASES)
def test_integral_matches_scipy(kern, case):
    a, p, q, c, r = params(*case)
    lv, rel, npan, status = kern.integrate_log_nu(a, p, q, c, r, 1e-12, -1e300, 2000)
    assert status == kern.STATUS_OK
    assert rel < 1e-10
    assert lv == pytest.approx(scipy_log_integral(a, p, q, c, r), abs=1e-9)


def test_peaks_are_stationary():
    a, p, q, c, r = params(16, 8, 10.0, 1.5)
    (m,) = _kernels_py.find_peaks(a, p, q, c, r)
    deriv = -p / (a - m) + q + c / (m * m) - r / m
    assert abs(deriv) < 1e-8 * (q + r / m)
    for dv in (-1e-4, 1e-4):
        assert log_integrand(m + dv, a, p, q, c, r) < log_integrand(m, a, p, q, c, r)


def test_k2_peak_at_endpoint():
    # p = 0 and 1/gamma to the left of the interior peak: L increases up to a
    a, p, q, c, r = params(16, 2, 10.0, 20.0)
    assert _kernels_py.find_peaks(a, p, q, c, r) == [a]


@needs_c
@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 256), k=st.integers(2, 128), snr=st.floats(-10, 30),
       lg=st.floats(-4, 5))
def test_backends_find_same_peaks(n, k, snr, lg):
    args = params(n, k, snr, math.exp(lg))
    py = _kernels_py.find_peaks(*args)
    c = _kernels_c.find_peaks_py(*args)
    assert len(py) == len(c)
    assert np.allclose(py, c, rtol=1e-12, atol=0)


@needs_c
@settings(max_examples=150, deadline=None)
@given(n=st.integers(1, 256), k=st.integers(2, 128), snr=st.floats(-10, 30),
       lg=st.floats(-4, 5))
def test_backends_agree_on_integral(n, k, snr, lg):
    args = params(n, k, snr, math.exp(lg))
    lp, rp, _, sp = _kernels_py.integrate_log_nu(*args, 1e-10, -1e300, 2000)
    lc, rc, _, sc = _kernels_c.integrate_log_nu(*args, 1e-10, -1e300, 2000)
    assert sp == sc == 0
    assert lp == pytest.approx(lc, abs=1e-9 * max(1.0, abs(lp)))


def test_many_matches_scalar(kern):
    a_vals = 1.0 / np.geomspace(0.05, 30, 25)
    _, p, q, c, r = params(16, 8, 10.0, 1.0)
    lv, rel, npan, stat = kern.integrate_log_nu_many(a_vals, p, q, c, r, 1e-9, -1e300, 2000)
    for i, a in enumerate(a_vals):
        one = kern.integrate_log_nu(a, p, q, c, r, 1e-9, -1e300, 2000)
        assert lv[i] == one[0] and stat[i] == one[3] == 0


def test_tiny_budget_reports_max_subdivisions(kern):
    a, p, q, c, r = params(128, 64, 10.0, 1.9)
    *_, status = kern.integrate_log_nu(a, p, q, c, r, 1e-15, -1e300, 10)
    assert status == kern.STATUS_MAX_SUBDIVISIONS


def test_loose_absolute_tolerance_stops_early(kern):
    a, p, q, c, r = params(16, 8, 10.0, 1.5)
    tight = kern.integrate_log_nu(a, p, q, c, r, 1e-13, -1e300, 2000)
    loose = kern.integrate_log_nu(a, p, q, c, r, 1e-13, tight[0] + 5.0, 2000)
    assert loose[2] <= tight[2]
    assert loose[3] == 0


def test_kde_kernel_matches_direct_sum(kern):
    rng = np.random.default_rng(3)
    s = np.sort(rng.gamma(3.0, 1.0, 4000))
    h = 0.2
    x0, n = s[0] - 1.0, 300
    dx = (s[-1] + 1.0 - x0) / (n - 1)
    grid = x0 + dx * np.arange(n)
    direct = np.exp(-0.5 * ((grid[:, None] - s[None, :]) / h) ** 2).sum(1)
    direct /= math.sqrt(2 * math.pi) * h * s.size
    got = kern.kde_uniform_grid(s, x0, dx, n, h)
    assert np.allclose(got, direct, rtol=1e-10, atol=1e-14)


def test_kde_kernel_empty_input(kern):
    out = kern.kde_uniform_grid(np.empty(0), 0.0, 0.1, 20, 0.3)
    assert out.shape == (20,) and not out.any()


@needs_c
def test_backends_agree_on_kde():
    rng = np.random.default_rng(5)
    s = np.sort(rng.normal(size=100_000))
    a = _kernels_py.kde_uniform_grid(s, -6.0, 12 / 511, 512, 0.05)
    b = _kernels_c.kde_uniform_grid(s, -6.0, 12 / 511, 512, 0.05)
    assert np.allclose(a, b, rtol=1e-10, atol=1e-15)


@pytest.mark.parametrize("flag, expected", [("1", "python"), ("", None)])
def test_env_var_selects_backend(flag, expected):
    env = dict(os.environ, MIMO_SINR_PURE_PYTHON=flag)
    out = subprocess.run([sys.executable, "-c", "import mimo_sinr; print(mimo_sinr.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    if expected is None:
        expected = "cython" if _kernels_c is not None else "python"
    assert out == expected

